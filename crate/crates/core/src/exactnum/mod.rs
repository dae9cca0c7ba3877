//! Exact arithmetic in real quadratic fields and integer 2x2 linear algebra.

mod matrix;
mod surd;

pub use matrix::{IMat2, IVec2};
pub use surd::Surd;
pub(crate) use surd::{floor_parts, ser_big, sign_of};
