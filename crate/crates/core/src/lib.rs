//! Inner and outer polynomial sublevel-set approximations of compact semialgebraic
//! sets, and polytopic approximations of their kernel (star-convexity certificates).

extern crate openblas_src;

pub mod approx;
pub mod conic;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod poly;
pub mod semialg;
pub mod soscomp;
pub mod sphere;

pub use error::{Error, Result};
pub use poly::{monomial_basis, Monomial, Polynomial};
pub use semialg::{BoundaryPoint, CrossingChoice, RayOptions, SemialgebraicSet};
