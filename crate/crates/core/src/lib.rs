//! Numerical and symbolic tools for the geometric Airy curve flow on `R^n`
//! and the vector modified KdV hierarchy it induces on curvatures.

pub mod backlund;
pub mod cli;
pub mod diffpoly;
pub mod frames;
pub mod grid;
pub mod hamiltonian;
pub mod lax;
pub mod numerics;
pub mod vmkdv;
