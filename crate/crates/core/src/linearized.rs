//! Dense matrices of the linearized operators
//! `L_inf = -d_z^2 + mu - (3/2pi) Q^2` and
//! `L_omega = omega (H_y - 2) - d_z^2 + mu - 3 Q^2` in real axial sectors,
//! plus coercivity, non-degeneracy and the multi-start uniqueness run.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::align::{align, peak_location};
use crate::basis::{AxialGrid, Discretization};
use crate::field::{cubic_term, embed_1d, mass, sigma_equiv_norm, Field1D, SpectralField3D};
use crate::minimizer::{minimize, FlowConfig, GroundStateRecord, MinimizeError};

/// Tolerance on `max |A - A^T|`.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearizedError {
    #[error("profile is not centered: peak at z = {peak:.3e}, grid spacing {spacing:.3e}")]
    Uncentered { peak: f64, spacing: f64 },
    #[error("assembled matrix is not symmetric: max |A - A^T| = {0:.3e}")]
    Asymmetric(f64),
    #[error("vector has dimension {found}, operator has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector has no component in the operator's basis")]
    NotInBasis,
    #[error("need at least 2 starts, got {0}")]
    TooFewStarts(usize),
    #[error("fewer than 2 starts converged")]
    TooFewSurvivors,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// `cos(xi_a z)`, `a = 0 ..= a_max`.
    Even,
    /// `sin(xi_a z)`, `a = 1 ..= a_max` (below Nyquist).
    Odd,
    Full,
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::Even => "even",
            Sector::Odd => "odd",
            Sector::Full => "full",
        })
    }
}

impl std::str::FromStr for Sector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "even" => Ok(Sector::Even),
            "odd" => Ok(Sector::Odd),
            "full" => Ok(Sector::Full),
            other => Err(format!("unknown sector '{other}' (expected even, odd or full)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Trig {
    Cos,
    Sin,
}

/// Real orthonormal (in the grid inner product) axial functions of one
/// sector, sampled on the grid.
#[derive(Clone, Debug)]
pub struct AxialSectorBasis {
    modes: Vec<(Trig, usize)>,
    wavenumbers: Vec<f64>,
    /// `samples[j * N + n] = e_j(z_n)`.
    samples: Vec<f64>,
    points: usize,
    spacing: f64,
}

impl AxialSectorBasis {
    pub fn new(grid: &AxialGrid, sector: Sector, a_max: usize) -> Self {
        let n = grid.point_count();
        let nyq = n / 2;
        let a_max = a_max.min(nyq);
        let mut modes = Vec::new();
        if matches!(sector, Sector::Even | Sector::Full) {
            modes.extend((0..=a_max).map(|a| (Trig::Cos, a)));
        }
        if matches!(sector, Sector::Odd | Sector::Full) {
            modes.extend((1..=a_max.min(nyq - 1)).map(|a| (Trig::Sin, a)));
        }
        let l = grid.half_length();
        let dz = grid.spacing();
        let mut samples = Vec::with_capacity(modes.len() * n);
        let mut wavenumbers = Vec::with_capacity(modes.len());
        for &(t, a) in &modes {
            let xi = PI * a as f64 / l;
            wavenumbers.push(xi);
            let vals: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&z| match t {
                    Trig::Cos => (xi * z).cos(),
                    Trig::Sin => (xi * z).sin(),
                })
                .collect();
            let norm = (dz * vals.iter().map(|v| v * v).sum::<f64>()).sqrt();
            samples.extend(vals.iter().map(|v| v / norm));
        }
        AxialSectorBasis {
            modes,
            wavenumbers,
            samples,
            points: n,
            spacing: dz,
        }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    fn sample(&self, j: usize) -> &[f64] {
        &self.samples[j * self.points..(j + 1) * self.points]
    }

    /// `G[a][b] = dz sum_n w(z_n) e_a(z_n) e_b(z_n)`.
    fn weighted_gram(&self, weight: &[f64]) -> DMatrix<f64> {
        let m = self.len();
        let mut g = DMatrix::zeros(m, m);
        let weighted: Vec<Vec<f64>> = (0..m)
            .map(|a| self.sample(a).iter().zip(weight).map(|(e, w)| e * w).collect())
            .collect();
        for a in 0..m {
            for b in a..m {
                let s: f64 = weighted[a].iter().zip(self.sample(b)).map(|(x, y)| x * y).sum();
                g[(a, b)] = s * self.spacing;
                g[(b, a)] = s * self.spacing;
            }
        }
        g
    }

    /// Coordinates of grid samples `f` in this basis.
    fn project(&self, f: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|a| self.spacing * self.sample(a).iter().zip(f).map(|(e, v)| e * v).sum::<f64>())
            .collect()
    }
}

/// A dense symmetric operator matrix with its basis metadata.
#[derive(Clone, Debug)]
pub struct LinearOperatorMatrix {
    pub matrix: DMatrix<f64>,
    pub sector: Sector,
    pub omega: Option<f64>,
    pub mu: f64,
    /// Number of transverse modes (1 for the 1D operator).
    pub transverse_modes: usize,
    /// Diagonal of the linear part, `omega (Lambda_k - 2) + xi^2 + mu`.
    pub linear_diagonal: Vec<f64>,
    /// `xi^2` of each basis vector (transverse-major ordering).
    pub axial_symbol: Vec<f64>,
    pub source: String,
    axial: AxialSectorBasis,
}

impl LinearOperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Ascending eigenpairs.
    pub fn eigenpairs(&self) -> Vec<(f64, DVector<f64>)> {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut pairs: Vec<(f64, DVector<f64>)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, eig.eigenvectors.column(i).into_owned()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    }

    /// Coordinates of a 1D profile in the operator's axial basis.
    pub fn vector_1d(&self, f: &Field1D) -> DVector<f64> {
        DVector::from_vec(self.axial.project(&f.real_parts()))
    }

    /// Coordinates of a real 3D field (transverse-major).
    pub fn vector_3d(&self, u: &SpectralField3D) -> DVector<f64> {
        let disc = u.discretization();
        let mut out = Vec::with_capacity(self.dim());
        for k in 0..self.transverse_modes {
            let vals = disc.grid().inverse(u.row(k));
            let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
            out.extend(self.axial.project(&re));
        }
        DVector::from_vec(out)
    }

    /// `<A v, v>`.
    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        (&self.matrix * v).dot(v)
    }
}

/// Matrix of `-d_z^2 + mu - (3/2pi) Q^2` on the given sector (all axial
/// modes of the grid).
pub fn assemble_l1d(q: &Field1D, mu: f64, sector: Sector) -> Result<LinearOperatorMatrix, LinearizedError> {
    let grid = q.grid();
    let peak = peak_location(q);
    if q.max_abs() > 0.0 && peak.abs() > grid.spacing() {
        return Err(LinearizedError::Uncentered {
            peak,
            spacing: grid.spacing(),
        });
    }
    let axial = AxialSectorBasis::new(grid, sector, grid.point_count() / 2);
    let potential: Vec<f64> = q.values().iter().map(|v| -3.0 / (2.0 * PI) * v.norm_sqr()).collect();
    let mut matrix = axial.weighted_gram(&potential);
    let axial_symbol: Vec<f64> = axial.wavenumbers().iter().map(|x| x * x).collect();
    let linear_diagonal: Vec<f64> = axial_symbol.iter().map(|x2| x2 + mu).collect();
    for (i, d) in linear_diagonal.iter().enumerate() {
        matrix[(i, i)] += d;
    }
    let op = LinearOperatorMatrix {
        matrix,
        sector,
        omega: None,
        mu,
        transverse_modes: 1,
        linear_diagonal,
        axial_symbol,
        source: "1d".to_string(),
        axial,
    };
    check_symmetry(op)
}

/// Axial wavenumber kept by [`assemble_l3d`].
pub const AXIAL_CUTOFF: f64 = 4.0 * PI;

/// Largest axial index `a` with `a pi / L <= AXIAL_CUTOFF`, capped at `N/2`.
pub fn default_axial_modes(grid: &AxialGrid) -> usize {
    let a = (AXIAL_CUTOFF * grid.half_length() / PI).floor() as usize;
    a.min(grid.point_count() / 2)
}

/// Matrix of `L_omega` over (transverse mode) x (axial sector mode), with
/// axial modes truncated by [`default_axial_modes`].
pub fn assemble_l3d(rec: &GroundStateRecord, sector: Sector) -> Result<LinearOperatorMatrix, LinearizedError> {
    let a_max = default_axial_modes(rec.state.discretization().grid());
    assemble_l3d_with(&rec.state, rec.omega, rec.mu, sector, a_max)
}

pub fn assemble_l3d_with(
    q: &SpectralField3D,
    omega: f64,
    mu: f64,
    sector: Sector,
    a_max: usize,
) -> Result<LinearOperatorMatrix, LinearizedError> {
    let disc = q.discretization();
    let basis = disc.basis();
    let kk = disc.modes();
    let nq = basis.quad_size();
    let nz = disc.points();
    let axial = AxialSectorBasis::new(disc.grid(), sector, a_max);
    let na = axial.len();
    let phys = q.to_physical();
    // G_q[a][b] = dz sum_n Q(r_q, z_n)^2 e_a e_b
    let grams: Vec<DMatrix<f64>> = (0..nq)
        .into_par_iter()
        .map(|iq| {
            let w: Vec<f64> = phys.values[iq * nz..(iq + 1) * nz].iter().map(|v| v.norm_sqr()).collect();
            axial.weighted_gram(&w)
        })
        .collect();
    let dim = kk * na;
    let mut matrix = DMatrix::zeros(dim, dim);
    for j in 0..kk {
        for k in j..kk {
            let mut block = DMatrix::<f64>::zeros(na, na);
            for (iq, g) in grams.iter().enumerate() {
                let c = basis.quad_weights()[iq] * basis.mode_value(j, iq) * basis.mode_value(k, iq);
                if c != 0.0 {
                    block += g * c;
                }
            }
            block *= -3.0;
            matrix.view_mut((j * na, k * na), (na, na)).copy_from(&block);
            if j != k {
                matrix.view_mut((k * na, j * na), (na, na)).copy_from(&block.transpose());
            }
        }
    }
    let mut linear_diagonal = Vec::with_capacity(dim);
    let mut axial_symbol = Vec::with_capacity(dim);
    for k in 0..kk {
        for x in axial.wavenumbers() {
            linear_diagonal.push(omega * basis.excitation(k) + x * x + mu);
            axial_symbol.push(x * x);
        }
    }
    for (i, d) in linear_diagonal.iter().enumerate() {
        matrix[(i, i)] += d;
    }
    let op = LinearOperatorMatrix {
        matrix,
        sector,
        omega: Some(omega),
        mu,
        transverse_modes: kk,
        linear_diagonal,
        axial_symbol,
        source: format!("3d omega={omega}"),
        axial,
    };
    check_symmetry(op)
}

fn check_symmetry(op: LinearOperatorMatrix) -> Result<LinearOperatorMatrix, LinearizedError> {
    let a = op.asymmetry();
    if a > SYMMETRY_TOL {
        return Err(LinearizedError::Asymmetric(a));
    }
    Ok(op)
}

/// Orthonormal basis of `q^perp` as the last `n - 1` columns of the
/// Householder reflector sending `q / |q|` to `e_1`.
fn complement_basis(q: &DVector<f64>) -> Result<DMatrix<f64>, LinearizedError> {
    let n = q.len();
    let norm = q.norm();
    if !(norm > 0.0) {
        return Err(LinearizedError::NotInBasis);
    }
    let mut v = q / norm;
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let vn = v.norm_squared();
    let mut h = DMatrix::<f64>::identity(n, n);
    h -= (&v * v.transpose()) * (2.0 / vn);
    Ok(h.columns(1, n - 1).into_owned())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coercivity {
    /// Smallest eigenvalue of `L` restricted to `q^perp`.
    pub min_eig_orthogonal: f64,
    /// `C_L` estimate: the same number, clamped at zero.
    pub c_l_estimate: f64,
}

pub fn coercivity_check(op: &LinearOperatorMatrix, q: &DVector<f64>) -> Result<Coercivity, LinearizedError> {
    if q.len() != op.dim() {
        return Err(LinearizedError::DimensionMismatch {
            expected: op.dim(),
            found: q.len(),
        });
    }
    let b = complement_basis(q)?;
    let restricted = b.transpose() * &op.matrix * &b;
    let min = restricted
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(Coercivity {
        min_eig_orthogonal: min,
        c_l_estimate: min.max(0.0),
    })
}

/// Smallest `|lambda|` of `D^{-1/2} L D^{-1/2}` with `D = 1 + xi^2`: the
/// discrete `H^1 -> H^{-1}` lower bound.
pub fn nondegeneracy_estimate_1d(op: &LinearOperatorMatrix) -> f64 {
    let n = op.dim();
    let scale: Vec<f64> = op.axial_symbol.iter().map(|x2| 1.0 / (1.0 + x2).sqrt()).collect();
    let mut m = op.matrix.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] *= scale[i] * scale[j];
        }
    }
    m.symmetric_eigen().eigenvalues.iter().fold(f64::INFINITY, |a, l| a.min(l.abs()))
}

/// Smallest `<L phi, phi> / |phi|^2` over `count` random vectors supported
/// on transverse modes `k >= 1`.
pub fn p1_form_ratio(op: &LinearOperatorMatrix, count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let na = op.axial.len();
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let mut v = DVector::<f64>::zeros(op.dim());
        for i in na..op.dim() {
            v[i] = rng.random_range(-1.0..1.0);
        }
        let n2 = v.norm_squared();
        if n2 > 0.0 {
            worst = worst.min(op.quadratic_form(&v) / n2);
        }
    }
    worst
}

/// `omega (H_y - 2) phi - d_z^2 phi + mu phi - 3 P(Q^2 phi)` for real `Q`.
pub fn apply_linearized(q: &SpectralField3D, omega: f64, mu: f64, phi: &SpectralField3D) -> SpectralField3D {
    let disc = q.discretization();
    let pq = q.to_physical();
    let mut pp = phi.to_physical();
    pp.values
        .iter_mut()
        .zip(&pq.values)
        .for_each(|(p, w)| *p *= 3.0 * w.norm_sqr());
    let pot = disc.to_spectral(&pp).expect("same shape");
    let sym = disc.linear_symbol(omega);
    let coeffs: Vec<Complex64> = phi
        .coeffs()
        .iter()
        .zip(&pot)
        .zip(&sym)
        .map(|((c, p), a)| c * (a + mu) - p)
        .collect();
    SpectralField3D::from_coeffs(disc, coeffs, phi.is_real()).expect("same shape")
}

/// `L_omega Q + 2 P(Q^3)`, which equals the EL residual field.
pub fn linearized_identity_defect(rec: &GroundStateRecord) -> f64 {
    let lq = apply_linearized(&rec.state, rec.omega, rec.mu, &rec.state);
    let two_cubic = cubic_term(&rec.state).scaled(2.0);
    mass(&lq.add(&two_cubic).expect("same disc")).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct StartOutcome {
    pub index: usize,
    pub converged: bool,
    pub iterations: usize,
    pub functional: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub omega: f64,
    pub mass: f64,
    pub seed: u64,
    pub starts: Vec<StartOutcome>,
    /// Max pairwise `Sigma`-equivalent distance after alignment.
    pub max_aligned_distance: f64,
    /// Max pairwise `|I_a - I_b| / |I|` with `I = E + (mu/2) M`.
    pub max_functional_spread: f64,
}

/// Positive, radial, mass-`m` initial fields: `Phi_0` times a randomized
/// off-center bump, plus small noise in modes `k >= 1`.
pub fn random_starts(disc: &Arc<Discretization>, m: f64, count: usize, seed: u64) -> Vec<SpectralField3D> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nz = disc.points();
    let xi = disc.grid().wavenumbers().to_vec();
    (0..count)
        .map(|_| {
            let width: f64 = rng.random_range(0.6..1.8);
            let center: f64 = rng.random_range(-1.5..1.5);
            let skew: f64 = rng.random_range(-0.3..0.3);
            let bump = Field1D::from_real_fn(disc.grid_handle(), |z| {
                let s = (z - center) / width;
                (1.0 + skew * s.tanh()) / s.cosh()
            });
            let mut u = embed_1d(disc, &bump);
            let noise_modes = disc.modes().min(4);
            let coeffs = u.coeffs_mut();
            for k in 1..noise_modes {
                for n in 0..nz {
                    let env = (-(xi[n] * width).powi(2) / 2.0).exp();
                    if env > 1e-12 {
                        coeffs[k * nz + n] += Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                            * (1e-3 * env);
                    }
                }
            }
            u.enforce_real();
            let s = (m / mass(&u)).sqrt();
            u.scaled(s)
        })
        .collect()
}

pub fn uniqueness_experiment(
    disc: &Arc<Discretization>,
    omega: f64,
    m: f64,
    n_starts: usize,
    seed: u64,
    cfg: &FlowConfig,
) -> Result<UniquenessReport, LinearizedError> {
    if n_starts < 2 {
        return Err(LinearizedError::TooFewStarts(n_starts));
    }
    let inits = random_starts(disc, m, n_starts, seed);
    let mut report = uniqueness_from_inits(disc, omega, m, &inits, cfg)?;
    report.seed = seed;
    Ok(report)
}

/// Minimizes from each initial field without imposing `z`-parity, then
/// compares the aligned results.
pub fn uniqueness_from_inits(
    disc: &Arc<Discretization>,
    omega: f64,
    m: f64,
    inits: &[SpectralField3D],
    cfg: &FlowConfig,
) -> Result<UniquenessReport, LinearizedError> {
    if inits.len() < 2 {
        return Err(LinearizedError::TooFewStarts(inits.len()));
    }
    let cfg = FlowConfig {
        enforce_even: false,
        ..*cfg
    };
    let results: Vec<Result<GroundStateRecord, MinimizeError>> =
        inits.par_iter().map(|u| minimize(disc, omega, m, &cfg, Some(u))).collect();
    let mut starts = Vec::new();
    let mut survivors = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => {
                let functional = rec.energy + 0.5 * rec.mu * rec.mass;
                starts.push(StartOutcome {
                    index,
                    converged: true,
                    iterations: rec.iterations,
                    functional,
                    error: None,
                });
                survivors.push((rec, functional));
            }
            Err(e) => {
                warn!("uniqueness start {index} failed: {e}");
                starts.push(StartOutcome {
                    index,
                    converged: false,
                    iterations: 0,
                    functional: f64::NAN,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    if survivors.len() < 2 {
        return Err(LinearizedError::TooFewSurvivors);
    }
    let mut max_dist: f64 = 0.0;
    let mut max_spread: f64 = 0.0;
    for i in 0..survivors.len() {
        for j in i + 1..survivors.len() {
            let (a, ia) = (&survivors[i].0.state, survivors[i].1);
            let (b, ib) = (&survivors[j].0.state, survivors[j].1);
            let moved = align(a, b).apply(a);
            max_dist = max_dist.max(sigma_equiv_norm(&moved.sub(b).expect("same disc")));
            let denom = ia.abs().max(ib.abs());
            if denom > 0.0 {
                max_spread = max_spread.max((ia - ib).abs() / denom);
            }
        }
    }
    Ok(UniquenessReport {
        omega,
        mass: m,
        seed: 0,
        starts,
        max_aligned_distance: max_dist,
        max_functional_spread: max_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_axial_grid;
    use crate::soliton::soliton;

    fn grid() -> Arc<AxialGrid> {
        Arc::new(build_axial_grid(16.0, 128).unwrap())
    }

    #[test]
    fn sector_basis_is_orthonormal() {
        let g = grid();
        for sector in [Sector::Even, Sector::Odd, Sector::Full] {
            let b = AxialSectorBasis::new(&g, sector, 64);
            let gram = b.weighted_gram(&vec![1.0; 128]);
            let defect = (gram - DMatrix::<f64>::identity(b.len(), b.len())).amax();
            assert!(defect < 1e-12, "{sector}: {defect}");
        }
        assert_eq!(AxialSectorBasis::new(&g, Sector::Full, 64).len(), 128);
        assert_eq!(AxialSectorBasis::new(&g, Sector::Even, 64).len(), 65);
        assert_eq!(AxialSectorBasis::new(&g, Sector::Odd, 64).len(), 63);
    }

    #[test]
    fn zero_profile_is_diagonal() {
        let g = grid();
        let op = assemble_l1d(&Field1D::zeros(Arc::clone(&g)), 0.7, Sector::Even).unwrap();
        let ev = op.eigenvalues();
        let mut expect: Vec<f64> = (0..=64).map(|a| (PI * a as f64 / 16.0).powi(2) + 0.7).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10);
        }
        let nd = nondegeneracy_estimate_1d(&op);
        assert!((nd - 0.7).abs() < 1e-12, "{nd}");
    }

    #[test]
    fn uncentered_rejected() {
        let g = grid();
        let s = soliton(8.0 * PI, &g).unwrap();
        let moved = s.profile.shifted(1.0);
        assert!(matches!(
            assemble_l1d(&moved, 1.0, Sector::Even),
            Err(LinearizedError::Uncentered { .. })
        ));
    }

    #[test]
    fn deflation_of_toy_operator() {
        let g = grid();
        let op = assemble_l1d(&Field1D::zeros(Arc::clone(&g)), 0.5, Sector::Even).unwrap();
        let mut q = DVector::zeros(op.dim());
        q[0] = 1.0;
        let c = coercivity_check(&op, &q).unwrap();
        let ev = op.eigenvalues();
        assert!((c.min_eig_orthogonal - ev[1]).abs() < 1e-12);
        assert!(coercivity_check(&op, &DVector::zeros(op.dim())).is_err());
        assert!(coercivity_check(&op, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn sector_parse() {
        assert_eq!("odd".parse::<Sector>().unwrap(), Sector::Odd);
        assert!("diagonal".parse::<Sector>().is_err());
        assert_eq!(Sector::Full.to_string(), "full");
    }
}
