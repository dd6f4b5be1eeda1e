//! Small numerical toolbox: adaptive quadrature, bracketed root finding and
//! one-dimensional convex minimization.

pub mod minimize;
pub mod quad;
pub mod roots;

pub use minimize::golden_min;
pub use quad::{integrate, Integral};
pub use roots::{bisect_predicate, find_root, scan_bracket, Bracket};
