//! Numerical machinery for non-decaying SQG and 3D Euler flows on a periodic
//! box: Littlewood-Paley and uniformly local norms, kernel-split constitutive
//! laws, the Picard construction and a verification harness.

pub mod calibration;
pub mod error;
pub mod euler3d;
pub mod fft;
pub mod field;
pub mod fieldio;
pub mod grid;
pub mod harness;
pub mod interp;
pub mod kernels;
pub mod lp;
pub mod par;
pub mod quadrature;
pub mod random;
pub mod smooth;
pub mod spectral;
pub mod sqg;
pub mod ul;

pub use error::{Error, Result};
pub use field::{ScalarField, VectorField};
pub use grid::Grid;
