//! Numerical laboratory for heat-semigroup Besov seminorms, Dunkl
//! s-perimeters, their s → 0⁺ limits and fractal-boundary admissibility.

pub mod error;
pub mod dunkl;
pub mod extrap;
pub mod field;
pub mod fractal;
pub mod heat;
pub mod perimeter;
pub mod quad;
pub mod region;
pub mod riesz;
pub mod seminorm;
pub mod specfun;
pub mod timeint;

pub use error::{Error, Result};
