//! Finite-dimensional inner-product spaces, vectors, and closed convex sets
//! with exact metric projections.

mod set;
mod space;

pub use set::ConvexSet;
pub use space::{Gram, InnerProductSpace, Vector};
