//! Small numerical kernels: Gauss rules, adaptive quadrature, bracketed roots
//! and tabulated antiderivatives.

mod gauss;
mod integrate;
mod primitive;
mod roots;

pub use gauss::{GaussRule, gauss_jacobi_symmetric, gauss_legendre, jacobi_weight_mass};
pub use integrate::{gauss_legendre_fixed, integrate_adaptive};
pub use primitive::{Primitive, graded_knots};
pub use roots::{brent, expand_bracket};
