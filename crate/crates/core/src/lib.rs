//! Spectral solver for the cubic NLS in a strongly confining 2D harmonic
//! trap: Hermite-Laguerre x Fourier discretization, constrained ground
//! states, the 1D reduction, linearized operators and time evolution.

// `!(x > 0.0)` is how NaN gets rejected along with the bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod align;
pub mod basis;
pub mod dynamics;
pub mod field;
pub mod inequality;
pub mod linearized;
pub mod minimizer;
pub mod reduction;
pub mod soliton;

pub use basis::{Discretization, GridParams};
pub use field::{Field1D, SpectralField3D};
