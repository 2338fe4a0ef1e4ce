//! Numerical laboratory for planar measures under arbitrary norms.

pub mod barycenter;
pub mod density;
pub mod geometry;
pub mod linalg;
pub mod measures;
pub mod norms;
pub mod sum;
pub mod touching;
pub mod vec2;

pub use linalg::LinearMap2;
pub use norms::{NormDescriptor, RayPolicy};
pub use vec2::Vec2;
