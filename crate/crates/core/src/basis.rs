//! Discretization of the confined direction (radial sector of the 2D Hermite
//! operator) and of the free axial direction (periodic Fourier grid).
//!
//! Transverse modes are the zero-angular-momentum eigenfunctions
//! `phi_k(r) = exp(-r^2/2) L_k(r^2) / sqrt(pi)` with eigenvalues `4k + 2`.
//! The full 2D spectrum has eigenvalue 4 as its first excited level, but that
//! level carries angular momentum one and never couples to radial states, so
//! the gap seen by radial fields is `Lambda_1 - 2 = 4`.
//!
//! Quadrature is Gauss-Laguerre in `s = r^2` with weight `exp(-2s)`, which is
//! the envelope of every quartic product `phi_j phi_k phi_l phi_m`. Cubic
//! projections and the L4 norm are therefore exact on the truncated space once
//! `quad_size >= 2K - 1`; orthonormality (envelope `exp(-s)`) is checked
//! numerically at build time.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

/// Orthonormality defect accepted when building a [`TransverseBasis`].
pub const ORTHONORMALITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("transverse basis needs at least one mode")]
    NoModes,
    #[error(
        "quadrature underresolved: {quad_size} nodes for {modes} modes \
         (orthonormality defect {defect:.3e})"
    )]
    QuadratureUnderresolved {
        modes: usize,
        quad_size: usize,
        defect: f64,
    },
    #[error("Gauss-Laguerre rule with {0} nodes is outside the representable range")]
    QuadratureOverflow(usize),
    #[error("axial point count must be even and at least 8, got {0}")]
    BadPointCount(usize),
    #[error("axial half length must be positive and finite, got {0}")]
    BadHalfLength(f64),
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
}

/// Default quadrature size for `modes` transverse modes.
pub fn default_quad_size(modes: usize) -> usize {
    3 * modes + 16
}

/// Laguerre polynomials `L_0(x) ..= L_n(x)`.
fn laguerre_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 - x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `(L_n(x), L_n'(x))`.
fn laguerre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let all = laguerre_all(n, x);
    let value = all[n];
    let derivative = if n == 0 {
        0.0
    } else {
        n as f64 * (value - all[n - 1]) / x
    };
    (value, derivative)
}

/// Gauss-Laguerre nodes for weight `exp(-x)` and the logarithms of the weights.
///
/// Nodes come from the Golub-Welsch eigenproblem and are polished by Newton
/// steps; weights use `1 / (x L_n'(x)^2)` evaluated in log form so that the
/// tiny weights of the outer nodes keep full relative precision.
fn gauss_laguerre(n: usize) -> Result<(Vec<f64>, Vec<f64>), BasisError> {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jacobi[(i, i)] = 2.0 * i as f64 + 1.0;
        if i + 1 < n {
            let b = (i + 1) as f64;
            jacobi[(i, i + 1)] = b;
            jacobi[(i + 1, i)] = b;
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    let mut log_weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..8 {
            let (value, derivative) = laguerre_with_derivative(n, *x);
            if derivative == 0.0 || !derivative.is_finite() {
                break;
            }
            let step = value / derivative;
            *x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * x.abs() {
                break;
            }
        }
        let (_, derivative) = laguerre_with_derivative(n, *x);
        if !derivative.is_finite() || derivative == 0.0 {
            return Err(BasisError::QuadratureOverflow(n));
        }
        log_weights.push(-x.ln() - 2.0 * derivative.abs().ln());
    }
    Ok((nodes, log_weights))
}

/// Radial eigenfunction `phi_k(r)` of `-Delta_y + |y|^2`, normalized in `L^2(R^2)`.
pub fn radial_mode(k: usize, r: f64) -> f64 {
    let s = r * r;
    laguerre_all(k, s)[k] * (-0.5 * s).exp() / PI.sqrt()
}

/// Radial-sector eigenbasis of the transverse Hermite operator with its
/// quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct TransverseBasis {
    mode_count: usize,
    eigenvalues: Vec<f64>,
    radii: Vec<f64>,
    weights: Vec<f64>,
    /// `phi_k(r_q)` stored at `[q * K + k]`.
    mode_values: Vec<f64>,
    /// `w_q phi_k(r_q)` stored at `[k * Q + q]`.
    projector: Vec<f64>,
}

impl TransverseBasis {
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn quad_size(&self) -> usize {
        self.radii.len()
    }

    /// `Lambda_k = 4k + 2`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    /// `Lambda_k - 2`, the weight of mode `k` in the transverse seminorm.
    pub fn excitation(&self, k: usize) -> f64 {
        self.eigenvalues[k] - 2.0
    }

    /// Radial quadrature nodes `r_q`.
    pub fn quad_nodes(&self) -> &[f64] {
        &self.radii
    }

    /// Weights such that `sum_q w_q f(r_q)` approximates `int_{R^2} f(|y|) dy`.
    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mode_value(&self, k: usize, q: usize) -> f64 {
        self.mode_values[q * self.mode_count + k]
    }

    pub(crate) fn mode_row(&self, q: usize) -> &[f64] {
        &self.mode_values[q * self.mode_count..(q + 1) * self.mode_count]
    }

    pub(crate) fn projector_row(&self, k: usize) -> &[f64] {
        let nq = self.radii.len();
        &self.projector[k * nq..(k + 1) * nq]
    }

    /// Largest deviation of the discrete Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let kk = self.mode_count;
        let mut worst = 0.0_f64;
        for j in 0..kk {
            let proj = self.projector_row(j);
            for k in 0..kk {
                let g: f64 = proj
                    .iter()
                    .enumerate()
                    .map(|(q, p)| p * self.mode_value(k, q))
                    .sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

/// Builds the radial transverse basis with `modes` eigenfunctions and a
/// `quad_size`-node quadrature.
pub fn build_transverse_basis(modes: usize, quad_size: usize) -> Result<TransverseBasis, BasisError> {
    if modes == 0 {
        return Err(BasisError::NoModes);
    }
    if quad_size < 2 * modes {
        return Err(BasisError::QuadratureUnderresolved {
            modes,
            quad_size,
            defect: f64::INFINITY,
        });
    }
    let (x, log_w) = gauss_laguerre(quad_size)?;
    // x = 2s = 2r^2, and int_{R^2} f dy = pi int_0^inf f ds.
    let mut radii = Vec::with_capacity(quad_size);
    let mut log_weights = Vec::with_capacity(quad_size);
    for (&xq, &lw) in x.iter().zip(&log_w) {
        let s = 0.5 * xq;
        radii.push(s.sqrt());
        log_weights.push((0.5 * PI).ln() + lw + xq);
    }
    let weights: Vec<f64> = log_weights.iter().map(|lw| lw.exp()).collect();

    let mut mode_values = vec![0.0; quad_size * modes];
    let mut projector = vec![0.0; quad_size * modes];
    for (q, &r) in radii.iter().enumerate() {
        let s = r * r;
        let lag = laguerre_all(modes - 1, s);
        for k in 0..modes {
            let l = lag[k];
            mode_values[q * modes + k] = l * (-0.5 * s).exp() / PI.sqrt();
            // w_q phi_k(r_q) in log form: the two factors overflow/underflow
            // separately at the outer nodes.
            let log_mag = log_weights[q] - 0.5 * s - 0.5 * PI.ln() + l.abs().ln();
            projector[k * quad_size + q] = if l == 0.0 { 0.0 } else { l.signum() * log_mag.exp() };
        }
    }
    if weights.iter().chain(&projector).any(|v| !v.is_finite()) {
        return Err(BasisError::QuadratureOverflow(quad_size));
    }

    let basis = TransverseBasis {
        mode_count: modes,
        eigenvalues: (0..modes).map(|k| 4.0 * k as f64 + 2.0).collect(),
        radii,
        weights,
        mode_values,
        projector,
    };
    let defect = basis.orthonormality_defect();
    if !(defect <= ORTHONORMALITY_TOL) {
        return Err(BasisError::QuadratureUnderresolved {
            modes,
            quad_size,
            defect,
        });
    }
    Ok(basis)
}

/// Uniform periodic grid on `[-L, L)` with its Fourier wavenumbers.
///
/// Coefficients follow `u(z_j) = sum_n c_n exp(i xi_n z_j)`, so that
/// `int |u|^2 dz = 2L sum |c_n|^2` on the grid.
#[derive(Clone)]
pub struct AxialGrid {
    half_length: f64,
    spacing: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for AxialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AxialGrid")
            .field("half_length", &self.half_length)
            .field("point_count", &self.nodes.len())
            .finish()
    }
}

impl PartialEq for AxialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.half_length == other.half_length && self.nodes.len() == other.nodes.len()
    }
}

pub fn build_axial_grid(half_length: f64, point_count: usize) -> Result<AxialGrid, BasisError> {
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(BasisError::BadHalfLength(half_length));
    }
    if point_count < 8 || !point_count.is_multiple_of(2) {
        return Err(BasisError::BadPointCount(point_count));
    }
    let n = point_count;
    let spacing = 2.0 * half_length / n as f64;
    let nodes = (0..n).map(|j| -half_length + j as f64 * spacing).collect();
    let base = PI / half_length;
    let wavenumbers = (0..n)
        .map(|j| {
            let signed = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            signed * base
        })
        .collect();
    let mut planner = FftPlanner::new();
    Ok(AxialGrid {
        half_length,
        spacing,
        nodes,
        wavenumbers,
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    })
}

impl AxialGrid {
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn point_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Length of the period, `2L`; converts `sum |c_n|^2` into `int |u|^2 dz`.
    pub fn measure(&self) -> f64 {
        2.0 * self.half_length
    }

    /// Index of the node `z = 0`.
    pub fn center_index(&self) -> usize {
        self.nodes.len() / 2
    }

    /// Index of the mode with wavenumber `-xi_n`.
    pub fn mirror_index(&self, n: usize) -> usize {
        (self.nodes.len() - n) % self.nodes.len()
    }

    /// Nodal values to Fourier coefficients, in place.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.forward.process(data);
        let scale = 1.0 / data.len() as f64;
        // exp(-i xi_n z_0) = (-1)^n because z_0 = -L.
        for (n, c) in data.iter_mut().enumerate() {
            let sign = if n % 2 == 0 { scale } else { -scale };
            *c *= sign;
        }
    }

    /// Fourier coefficients to nodal values, in place.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        for (n, c) in data.iter_mut().enumerate() {
            if n % 2 == 1 {
                *c = -*c;
            }
        }
        self.inverse.process(data);
    }

    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = values.to_vec();
        self.forward_in_place(&mut out);
        out
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut out = coeffs.to_vec();
        self.inverse_in_place(&mut out);
        out
    }

    /// Multiplier of the first derivative. The Nyquist mode is dropped so that
    /// derivatives of real fields stay real.
    pub fn derivative_multiplier(&self, n: usize) -> Complex64 {
        if n == self.nodes.len() / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, self.wavenumbers[n])
        }
    }

    /// Circular cross-correlation `C(s_j) = sum_n a_n exp(i xi_n s_j)` at the
    /// grid shifts `s_j = j * dz`, `j = 0..N`.
    pub(crate) fn correlate_shifts(&self, weights: &[Complex64]) -> Vec<Complex64> {
        // exp(i xi_n j dz) = exp(2 pi i n j / N) for both halves of the layout.
        let mut out = weights.to_vec();
        self.inverse.process(&mut out);
        out
    }
}

/// Grid parameters of a [`Discretization`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridParams {
    pub transverse_modes: usize,
    pub quad_size: usize,
    pub half_length: f64,
    pub axial_points: usize,
}

impl GridParams {
    pub fn new(transverse_modes: usize, half_length: f64, axial_points: usize) -> Self {
        GridParams {
            transverse_modes,
            quad_size: default_quad_size(transverse_modes),
            half_length,
            axial_points,
        }
    }
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams::new(12, 16.0, 256)
    }
}

/// Physical samples `u(r_q, z_n)` stored row-major `[q][n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalGrid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<Complex64>,
}

impl PhysicalGrid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PhysicalGrid {
            rows,
            cols,
            values: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn at(&self, q: usize, n: usize) -> Complex64 {
        self.values[q * self.cols + n]
    }
}

/// A transverse basis paired with an axial grid. Immutable and shared through
/// `Arc` by every field built on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Discretization {
    basis: Arc<TransverseBasis>,
    grid: Arc<AxialGrid>,
    params: GridParams,
}

impl Discretization {
    pub fn new(params: GridParams) -> Result<Arc<Self>, BasisError> {
        let basis = build_transverse_basis(params.transverse_modes, params.quad_size)?;
        let grid = build_axial_grid(params.half_length, params.axial_points)?;
        Ok(Arc::new(Discretization {
            basis: Arc::new(basis),
            grid: Arc::new(grid),
            params,
        }))
    }

    pub fn basis(&self) -> &TransverseBasis {
        &self.basis
    }

    pub fn grid(&self) -> &AxialGrid {
        &self.grid
    }

    pub fn grid_handle(&self) -> Arc<AxialGrid> {
        Arc::clone(&self.grid)
    }

    pub fn params(&self) -> GridParams {
        self.params
    }

    pub fn modes(&self) -> usize {
        self.basis.mode_count()
    }

    pub fn points(&self) -> usize {
        self.grid.point_count()
    }

    /// Number of spectral coefficients, `K * N_z`.
    pub fn len(&self) -> usize {
        self.modes() * self.points()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Diagonal of `omega (H_y - 2) - d_z^2` in the spectral basis.
    pub fn linear_symbol(&self, omega: f64) -> Vec<f64> {
        let xi = self.grid.wavenumbers();
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.modes() {
            let gap = omega * self.basis.excitation(k);
            out.extend(xi.iter().map(|x| gap + x * x));
        }
        out
    }

    /// Spectral coefficients `[k][n]` to physical samples `[q][n]`.
    pub fn to_physical(&self, coeffs: &[Complex64]) -> Result<PhysicalGrid, BasisError> {
        let (kk, nz) = (self.modes(), self.points());
        if coeffs.len() != kk * nz {
            return Err(BasisError::ShapeMismatch {
                expected: (kk, nz),
                found: (coeffs.len() / nz.max(1), coeffs.len() % nz.max(1)),
            });
        }
        let mut rows = coeffs.to_vec();
        for row in rows.chunks_mut(nz) {
            self.grid.inverse_in_place(row);
        }
        let nq = self.basis.quad_size();
        let mut out = PhysicalGrid::zeros(nq, nz);
        for q in 0..nq {
            let target = &mut out.values[q * nz..(q + 1) * nz];
            for (k, &phi) in self.basis.mode_row(q).iter().enumerate() {
                if phi == 0.0 {
                    continue;
                }
                let src = &rows[k * nz..(k + 1) * nz];
                for (t, s) in target.iter_mut().zip(src) {
                    *t += s * phi;
                }
            }
        }
        Ok(out)
    }

    /// Physical samples `[q][n]` to spectral coefficients `[k][n]` by
    /// quadrature projection.
    pub fn to_spectral(&self, values: &PhysicalGrid) -> Result<Vec<Complex64>, BasisError> {
        let (nq, nz) = (self.basis.quad_size(), self.points());
        if values.rows != nq || values.cols != nz || values.values.len() != nq * nz {
            return Err(BasisError::ShapeMismatch {
                expected: (nq, nz),
                found: (values.rows, values.cols),
            });
        }
        let kk = self.modes();
        let mut out = vec![Complex64::new(0.0, 0.0); kk * nz];
        for k in 0..kk {
            let target = &mut out[k * nz..(k + 1) * nz];
            for (q, &p) in self.basis.projector_row(k).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let src = &values.values[q * nz..(q + 1) * nz];
                for (t, s) in target.iter_mut().zip(src) {
                    *t += s * p;
                }
            }
            self.grid.forward_in_place(target);
        }
        Ok(out)
    }
}
