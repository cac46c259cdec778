//! Sub-grid alignment along `z`: peak location and shift/phase matching by
//! FFT cross-correlation followed by Newton refinement of the trigonometric
//! interpolant.

use num_complex::Complex64;

use crate::basis::AxialGrid;
use crate::field::{inner, Field1D, SpectralField3D};

/// `S(s) = sum_n a_n exp(i xi_n s)` with its first two derivatives. The
/// Nyquist term is skipped.
fn trig_sum(grid: &AxialGrid, a: &[Complex64], s: f64) -> (Complex64, Complex64, Complex64) {
    let xi = grid.wavenumbers();
    let nyq = grid.point_count() / 2;
    let mut v = Complex64::new(0.0, 0.0);
    let mut d1 = Complex64::new(0.0, 0.0);
    let mut d2 = Complex64::new(0.0, 0.0);
    for (n, (&an, &x)) in a.iter().zip(xi).enumerate() {
        if n == nyq || an == Complex64::new(0.0, 0.0) {
            continue;
        }
        let t = an * Complex64::from_polar(1.0, x * s);
        v += t;
        d1 += t * Complex64::new(0.0, x);
        d2 -= t * (x * x);
    }
    (v, d1, d2)
}

/// Maximizes `|sum_n a_n exp(i xi_n s)|` over `s` in `[-L, L)`; returns the
/// maximizer and the complex value there.
pub fn maximize_trig_modulus(grid: &AxialGrid, a: &[Complex64]) -> (f64, Complex64) {
    let coarse = grid.correlate_shifts(a);
    let (best, _) = coarse
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (j, v)| if v.norm_sqr() > acc.1 { (j, v.norm_sqr()) } else { acc });
    let dz = grid.spacing();
    let period = grid.measure();
    let mut s = best as f64 * dz;
    for _ in 0..60 {
        let (v, d1, d2) = trig_sum(grid, a, s);
        let f1 = 2.0 * (v.conj() * d1).re;
        let f2 = 2.0 * (d1.norm_sqr() + (v.conj() * d2).re);
        if f2 >= 0.0 {
            break;
        }
        let step = (-f1 / f2).clamp(-dz, dz);
        s += step;
        if step.abs() <= 1e-15 * (1.0 + s.abs()) {
            break;
        }
    }
    let half = grid.half_length();
    s = (s + half).rem_euclid(period) - half;
    let (v, _, _) = trig_sum(grid, a, s);
    (s, v)
}

/// Location of `max |v(z)|` of the band-limited interpolant.
pub fn peak_location(v: &Field1D) -> f64 {
    maximize_trig_modulus(v.grid(), &v.coefficients()).0
}

/// Optimal shift `s` and phase `theta` such that `exp(i theta) u(. + s)` is
/// closest to `reference` in `L^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alignment {
    pub shift: f64,
    pub phase: f64,
}

impl Alignment {
    pub fn apply(&self, u: &SpectralField3D) -> SpectralField3D {
        u.shifted(self.shift).rotated(Complex64::from_polar(1.0, self.phase))
    }
}

pub fn align(u: &SpectralField3D, reference: &SpectralField3D) -> Alignment {
    let disc = u.discretization();
    let nz = disc.points();
    let mut a = vec![Complex64::new(0.0, 0.0); nz];
    for (i, (cu, cq)) in u.coeffs().iter().zip(reference.coeffs()).enumerate() {
        a[i % nz] += cu * cq.conj();
    }
    let (shift, _) = maximize_trig_modulus(disc.grid(), &a);
    let overlap = inner(&u.shifted(shift), reference);
    Alignment {
        shift,
        phase: -overlap.arg(),
    }
}

/// Shifts `u` so that the peak of its lowest-mode profile sits at `z = 0` and
/// flips the global sign/phase so that the peak value is real positive.
pub fn center_and_fix_sign(u: &SpectralField3D) -> SpectralField3D {
    let disc = u.discretization();
    let (s, value) = maximize_trig_modulus(disc.grid(), u.row(0));
    let rotated = u.shifted(s).rotated(Complex64::from_polar(1.0, -value.arg()));
    let mut out = rotated;
    if u.is_real() {
        out.enforce_real();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Discretization, GridParams};
    use crate::field::{embed_1d, mass};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn peak_of_shifted_sech() {
        let d = Discretization::new(GridParams::new(2, 32.0, 512)).unwrap();
        let f = Field1D::from_real_fn(d.grid_handle(), |z| 1.0 / (z - 0.3712).cosh());
        assert!((peak_location(&f) - 0.3712).abs() < 1e-10);
    }

    #[test]
    fn recovers_shift_and_phase() {
        let d: Arc<Discretization> = Discretization::new(GridParams::new(3, 16.0, 256)).unwrap();
        let f = Field1D::from_real_fn(d.grid_handle(), |z| 2.0 * PI.sqrt() / z.cosh());
        let q = embed_1d(&d, &f);
        let moved = q.shifted(2.0).rotated(Complex64::from_polar(1.0, PI / 3.0));
        let al = align(&moved, &q);
        assert!((al.shift + 2.0).abs() < 1e-10, "{al:?}");
        let back = al.apply(&moved);
        assert!(mass(&back.sub(&q).unwrap()) < 1e-20);
    }
}
