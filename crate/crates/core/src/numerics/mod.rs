//! Numerical building blocks: spectral and finite-difference derivatives,
//! interpolation, quadrature and Lie-group time stepping.

pub mod interp;
pub mod linalg;
pub mod spectral;
pub mod stencil;

pub use linalg::{CMatrix, RMatrix};
