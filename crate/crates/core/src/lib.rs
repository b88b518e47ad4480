//! Numerical laboratory for hypersurfaces in warped-product spaces: spectral geometry of
//! radial graphs, the locally constrained flow and inverse mean curvature flow,
//! Minkowski-type deficits, and conformal rigidity estimates.

pub mod ambient;
pub mod error;
pub mod flows;
pub mod functionals;
pub mod hypersurface;
pub mod lab;
pub mod numerics;
pub mod par;
pub mod rigidity;
pub mod spheregrid;

pub use error::{Error, Result};
