//! Field types and the quadratic/quartic functionals built on them.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{AxialGrid, BasisError, Discretization, PhysicalGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("fields live on different discretizations")]
    Incompatible,
}

/// A field `u(r, z)` in the radial sector, stored as spectral coefficients
/// `c[k][n]` (transverse mode `k`, axial Fourier mode `n`).
#[derive(Clone, Debug)]
pub struct SpectralField3D {
    disc: Arc<Discretization>,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl PartialEq for SpectralField3D {
    fn eq(&self, other: &Self) -> bool {
        self.real == other.real && self.coeffs == other.coeffs && *self.disc == *other.disc
    }
}

impl SpectralField3D {
    pub fn zeros(disc: &Arc<Discretization>) -> Self {
        SpectralField3D {
            disc: Arc::clone(disc),
            coeffs: vec![ZERO; disc.len()],
            real: true,
        }
    }

    pub fn from_coeffs(
        disc: &Arc<Discretization>,
        coeffs: Vec<Complex64>,
        real: bool,
    ) -> Result<Self, FieldError> {
        if coeffs.len() != disc.len() {
            return Err(BasisError::ShapeMismatch {
                expected: (disc.modes(), disc.points()),
                found: (coeffs.len() / disc.points(), coeffs.len() % disc.points()),
            }
            .into());
        }
        Ok(SpectralField3D {
            disc: Arc::clone(disc),
            coeffs,
            real,
        })
    }

    /// Projects physical samples onto the truncated space.
    pub fn from_physical(
        disc: &Arc<Discretization>,
        values: &PhysicalGrid,
        real: bool,
    ) -> Result<Self, FieldError> {
        let coeffs = disc.to_spectral(values)?;
        let mut out = SpectralField3D {
            disc: Arc::clone(disc),
            coeffs,
            real,
        };
        if real {
            out.enforce_real();
        }
        Ok(out)
    }

    /// Samples `f(r, z)` at the quadrature/axial nodes and projects.
    pub fn from_fn(disc: &Arc<Discretization>, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let basis = disc.basis();
        let grid = disc.grid();
        let mut phys = PhysicalGrid::zeros(basis.quad_size(), grid.point_count());
        let mut real = true;
        for (q, &r) in basis.quad_nodes().iter().enumerate() {
            for (n, &z) in grid.nodes().iter().enumerate() {
                let v = f(r, z);
                real &= v.im == 0.0;
                phys.values[q * phys.cols + n] = v;
            }
        }
        Self::from_physical(disc, &phys, real).expect("grid shape produced by the discretization")
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize, n: usize) -> Complex64 {
        self.coeffs[k * self.disc.points() + n]
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        let nz = self.disc.points();
        &self.coeffs[k * nz..(k + 1) * nz]
    }

    /// True when the physical values are real.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn set_real(&mut self, real: bool) {
        self.real = real;
        if real {
            self.enforce_real();
        }
    }

    /// Imposes `c[k][-n] = conj(c[k][n])`, i.e. real physical values.
    pub fn enforce_real(&mut self) {
        let nz = self.disc.points();
        let grid = self.disc.grid();
        for row in self.coeffs.chunks_mut(nz) {
            for n in 0..=nz / 2 {
                let m = grid.mirror_index(n);
                let avg = 0.5 * (row[n] + row[m].conj());
                row[n] = avg;
                row[m] = avg.conj();
            }
        }
        self.real = true;
    }

    /// Imposes a real field that is even in `z`: real coefficients with
    /// `c[k][-n] = c[k][n]`.
    pub fn enforce_even(&mut self) {
        let nz = self.disc.points();
        let grid = self.disc.grid();
        for row in self.coeffs.chunks_mut(nz) {
            for n in 0..=nz / 2 {
                let m = grid.mirror_index(n);
                let avg = 0.5 * (row[n].re + row[m].re);
                row[n] = Complex64::new(avg, 0.0);
                row[m] = Complex64::new(avg, 0.0);
            }
        }
        self.real = true;
    }

    pub fn to_physical(&self) -> PhysicalGrid {
        self.disc
            .to_physical(&self.coeffs)
            .expect("coefficient count fixed at construction")
    }

    fn check(&self, other: &Self) -> Result<(), FieldError> {
        if Arc::ptr_eq(&self.disc, &other.disc) || *self.disc == *other.disc {
            Ok(())
        } else {
            Err(FieldError::Incompatible)
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Multiplies by a complex constant; the result is flagged complex unless
    /// the factor is real.
    pub fn rotated(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out.real = self.real && factor.im == 0.0;
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b);
        out.real = self.real && other.real;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a -= b);
        out.real = self.real && other.real;
        Ok(out)
    }

    /// `u(r, z + shift)`, exact for band-limited fields.
    pub fn shifted(&self, shift: f64) -> Self {
        let nz = self.disc.points();
        let xi = self.disc.grid().wavenumbers();
        let mut out = self.clone();
        for row in out.coeffs.chunks_mut(nz) {
            for (n, c) in row.iter_mut().enumerate() {
                if n == nz / 2 {
                    // the Nyquist mode has no well-defined shift; keep it real
                    *c *= (xi[n] * shift).cos();
                } else {
                    *c *= Complex64::from_polar(1.0, xi[n] * shift);
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.norm()))
    }
}

/// `<u, v> = int u conj(v) dx`.
pub fn inner(u: &SpectralField3D, v: &SpectralField3D) -> Complex64 {
    let measure = u.disc.grid().measure();
    u.coeffs.iter().zip(&v.coeffs).map(|(a, b)| a * b.conj()).sum::<Complex64>() * measure
}

/// Weighted sum `2L sum w(k, n) |c_kn|^2`.
fn weighted_norm_sq(u: &SpectralField3D, weight: impl Fn(usize, usize) -> f64) -> f64 {
    let nz = u.disc.points();
    let measure = u.disc.grid().measure();
    u.coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| weight(i / nz, i % nz) * c.norm_sqr())
        .sum::<f64>()
        * measure
}

/// `M(u) = ||u||_{L^2}^2`.
pub fn mass(u: &SpectralField3D) -> f64 {
    weighted_norm_sq(u, |_, _| 1.0)
}

/// `||u||_{Sigma_y}^2 = ||sqrt(H_y - 2) u||^2`.
pub fn sigma_y_norm_sq(u: &SpectralField3D) -> f64 {
    let basis = u.disc.basis();
    weighted_norm_sq(u, |k, _| basis.excitation(k))
}

/// `||d_z u||^2`.
pub fn dz_norm_sq(u: &SpectralField3D) -> f64 {
    let xi = u.disc.grid().wavenumbers();
    weighted_norm_sq(u, |_, n| xi[n] * xi[n])
}

/// `||u||_{L^4}^4` by physical-grid quadrature.
pub fn l4_norm_4(u: &SpectralField3D) -> f64 {
    l4_from_physical(&u.disc, &u.to_physical())
}

pub(crate) fn l4_from_physical(disc: &Discretization, phys: &PhysicalGrid) -> f64 {
    let dz = disc.grid().spacing();
    disc.basis()
        .quad_weights()
        .iter()
        .enumerate()
        .map(|(q, w)| {
            let row = &phys.values[q * phys.cols..(q + 1) * phys.cols];
            w * row.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>()
        })
        .sum::<f64>()
        * dz
}

/// Every norm entering the energy, computed once.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub mass: f64,
    pub sigma_y_sq: f64,
    pub dz_sq: f64,
    pub l4_4: f64,
}

impl Norms {
    pub fn of(u: &SpectralField3D) -> Self {
        Norms {
            mass: mass(u),
            sigma_y_sq: sigma_y_norm_sq(u),
            dz_sq: dz_norm_sq(u),
            l4_4: l4_norm_4(u),
        }
    }

    pub fn energy(&self, omega: f64) -> f64 {
        0.5 * omega * self.sigma_y_sq + 0.5 * self.dz_sq - 0.25 * self.l4_4
    }
}

/// `E_omega(u) = (omega/2)||u||_{Sigma_y}^2 + (1/2)||d_z u||^2 - (1/4)||u||_4^4`.
pub fn energy(u: &SpectralField3D, omega: f64) -> f64 {
    Norms::of(u).energy(omega)
}

/// The unadjusted energy `E_omega(u) + omega M(u)`.
pub fn modified_energy(u: &SpectralField3D, omega: f64) -> f64 {
    energy(u, omega) + omega * mass(u)
}

/// `||u||_{Sigma_y} + ||d_z u|| + ||u||`, equivalent to the weighted energy norm.
pub fn sigma_equiv_norm(u: &SpectralField3D) -> f64 {
    sigma_y_norm_sq(u).sqrt() + dz_norm_sq(u).sqrt() + mass(u).sqrt()
}

/// Keeps the `k = 0` row.
pub fn project_p0(u: &SpectralField3D) -> SpectralField3D {
    let nz = u.disc.points();
    let mut out = u.clone();
    out.coeffs[nz..].iter_mut().for_each(|c| *c = ZERO);
    out
}

/// Removes the `k = 0` row.
pub fn project_p1(u: &SpectralField3D) -> SpectralField3D {
    let nz = u.disc.points();
    let mut out = u.clone();
    out.coeffs[..nz].iter_mut().for_each(|c| *c = ZERO);
    out
}

/// `u_par(z) = <u(., z), Phi_0>`.
pub fn parallel_component(u: &SpectralField3D) -> Field1D {
    Field1D::from_coefficients(u.disc.grid_handle(), u.row(0))
}

/// `Phi_0(y) f(z)`.
pub fn embed_1d(disc: &Arc<Discretization>, f: &Field1D) -> SpectralField3D {
    let mut out = SpectralField3D::zeros(disc);
    let coeffs = f.coefficients();
    out.coeffs[..disc.points()].copy_from_slice(&coeffs);
    out.real = f.is_real();
    out
}

/// Galerkin projection of the cubic term `|u|^2 u`.
pub fn cubic_term(u: &SpectralField3D) -> SpectralField3D {
    let mut phys = u.to_physical();
    phys.values.iter_mut().for_each(|v| *v *= v.norm_sqr());
    let coeffs = u.disc.to_spectral(&phys).expect("shape preserved");
    let mut out = SpectralField3D {
        disc: Arc::clone(&u.disc),
        coeffs,
        real: u.real,
    };
    if u.real {
        out.enforce_real();
    }
    out
}

/// Applies the diagonal multiplier `m(k, n)` to the coefficients.
pub fn apply_multiplier(u: &SpectralField3D, m: impl Fn(usize, usize) -> f64) -> SpectralField3D {
    let nz = u.disc.points();
    let mut out = u.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        *c *= m(i / nz, i % nz);
    }
    out
}

/// `d_z u`.
pub fn dz(u: &SpectralField3D) -> SpectralField3D {
    let nz = u.disc.points();
    let grid = u.disc.grid();
    let mut out = u.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        *c *= grid.derivative_multiplier(i % nz);
    }
    out
}

/// A function of `z` on the axial grid, stored as nodal values.
#[derive(Clone, Debug)]
pub struct Field1D {
    grid: Arc<AxialGrid>,
    values: Vec<Complex64>,
}

impl PartialEq for Field1D {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && *self.grid == *other.grid
    }
}

impl Field1D {
    pub fn new(grid: Arc<AxialGrid>, values: Vec<Complex64>) -> Result<Self, FieldError> {
        if values.len() != grid.point_count() {
            return Err(BasisError::ShapeMismatch {
                expected: (1, grid.point_count()),
                found: (1, values.len()),
            }
            .into());
        }
        Ok(Field1D { grid, values })
    }

    pub fn from_real_fn(grid: Arc<AxialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&z| Complex64::new(f(z), 0.0)).collect();
        Field1D { grid, values }
    }

    pub fn from_coefficients(grid: Arc<AxialGrid>, coeffs: &[Complex64]) -> Self {
        let values = grid.inverse(coeffs);
        Field1D { grid, values }
    }

    pub fn zeros(grid: Arc<AxialGrid>) -> Self {
        let values = vec![ZERO; grid.point_count()];
        Field1D { grid, values }
    }

    pub fn grid(&self) -> &Arc<AxialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a -= b);
        out
    }

    pub fn mass(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn dz_norm_sq(&self) -> f64 {
        let xi = self.grid.wavenumbers();
        self.grid.measure()
            * self
                .coefficients()
                .iter()
                .zip(xi)
                .map(|(c, x)| x * x * c.norm_sqr())
                .sum::<f64>()
    }

    /// `||v||_{H^1}^2 = ||v||^2 + ||v'||^2`.
    pub fn h1_norm_sq(&self) -> f64 {
        self.mass() + self.dz_norm_sq()
    }

    pub fn l4_norm_4(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// `E_inf(v) = (1/2)||v'||^2 - (1/(8 pi))||v||_4^4`.
    pub fn energy_1d(&self) -> f64 {
        0.5 * self.dz_norm_sq() - self.l4_norm_4() / (8.0 * PI)
    }

    /// Applies the Fourier multiplier `m(n)`.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> Complex64) -> Self {
        let mut c = self.coefficients();
        c.iter_mut().enumerate().for_each(|(n, v)| *v *= m(n));
        Field1D::from_coefficients(Arc::clone(&self.grid), &c)
    }

    pub fn derivative(&self) -> Self {
        let grid = Arc::clone(&self.grid);
        self.apply_multiplier(|n| grid.derivative_multiplier(n))
    }

    pub fn second_derivative(&self) -> Self {
        let xi = self.grid.wavenumbers().to_vec();
        self.apply_multiplier(|n| Complex64::new(-xi[n] * xi[n], 0.0))
    }

    /// `v(z + shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let xi = self.grid.wavenumbers().to_vec();
        let nyq = self.grid.point_count() / 2;
        self.apply_multiplier(|n| {
            if n == nyq {
                Complex64::new((xi[n] * shift).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, xi[n] * shift)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::GridParams;

    fn disc() -> Arc<Discretization> {
        Discretization::new(GridParams::new(4, 16.0, 256)).unwrap()
    }

    fn soliton_embed(d: &Arc<Discretization>) -> SpectralField3D {
        let f = Field1D::from_real_fn(d.grid_handle(), |z| 2.0 * PI.sqrt() / z.cosh());
        embed_1d(d, &f)
    }

    #[test]
    fn zero_field_functionals() {
        let d = disc();
        let u = SpectralField3D::zeros(&d);
        assert_eq!(mass(&u), 0.0);
        assert_eq!(sigma_y_norm_sq(&u), 0.0);
        assert_eq!(dz_norm_sq(&u), 0.0);
        assert_eq!(l4_norm_4(&u), 0.0);
        assert_eq!(energy(&u, 3.0), 0.0);
    }

    #[test]
    fn soliton_norms_match_closed_forms() {
        let d = disc();
        let u = soliton_embed(&d);
        assert!((mass(&u) - 8.0 * PI).abs() < 1e-9);
        assert!(sigma_y_norm_sq(&u).abs() < 1e-20);
        assert!((dz_norm_sq(&u) - 8.0 * PI / 3.0).abs() < 1e-9);
        assert!((l4_norm_4(&u) - 32.0 * PI / 3.0).abs() < 1e-9);
        for omega in [1.0, 250.0] {
            assert!((energy(&u, omega) + 4.0 * PI / 3.0).abs() < 1e-9);
        }
        assert!((modified_energy(&u, 2.0) - energy(&u, 2.0) - 2.0 * mass(&u)).abs() < 1e-12);
    }

    #[test]
    fn mass_homogeneity() {
        let d = disc();
        let u = soliton_embed(&d);
        assert!((mass(&u.scaled(2.0)) - 4.0 * mass(&u)).abs() < 1e-10);
    }

    #[test]
    fn first_excited_mode_seminorm() {
        let d = disc();
        let nz = d.points();
        let mut c = vec![ZERO; d.len()];
        c[nz] = Complex64::new(1.0 / d.grid().measure().sqrt(), 0.0);
        let u = SpectralField3D::from_coeffs(&d, c, true).unwrap();
        assert!((mass(&u) - 1.0).abs() < 1e-14);
        assert!((sigma_y_norm_sq(&u) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn projections_on_lowest_mode() {
        let d = disc();
        let u = soliton_embed(&d);
        let p0 = project_p0(&u);
        assert_eq!(p0.coeffs(), u.coeffs());
        assert!(mass(&project_p1(&u)) == 0.0);
        let par = parallel_component(&u);
        assert!((par.mass() - 8.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn mass_matches_grid_quadrature() {
        let d = disc();
        let u = SpectralField3D::from_fn(&d, |r, z| {
            Complex64::new((-0.7 * r * r).exp() * (-(z - 0.3).powi(2)).exp(), 0.2 * (-r * r - z * z).exp())
        });
        let phys = u.to_physical();
        let w = d.basis().quad_weights();
        let grid_mass: f64 = (0..phys.rows)
            .map(|q| w[q] * (0..phys.cols).map(|n| phys.at(q, n).norm_sqr()).sum::<f64>())
            .sum::<f64>()
            * d.grid().spacing();
        assert!((mass(&u) - grid_mass).abs() < 1e-10 * mass(&u));
    }

    #[test]
    fn shift_round_trip() {
        let d = disc();
        let u = SpectralField3D::from_fn(&d, |r, z| Complex64::new((-r * r - z * z).exp(), 0.0));
        let back = u.shifted(1.3).shifted(-1.3);
        let diff = back.sub(&u).unwrap();
        assert!(mass(&diff) < 1e-24);
    }
}
