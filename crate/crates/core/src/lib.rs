//! Ginzburg-Landau workbench for non-uniform applied magnetic fields.
//!
//! Everything numerical is generic over the scalar type through
//! [`scalar::Real`]; the aliases at the crate root fix `f64` as the working
//! precision used by the CLI and the acceptance suite.

pub mod bulk;
pub mod degennes;
pub mod functional;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod ncg;
pub mod scalar;
pub mod strip;

pub use error::{GlError, Result};
pub use scalar::Real;

/// Default working precision.
pub type Scalar = f64;

/// Concrete aliases at the working precision.
pub type Domain = geometry::Domain<Scalar>;
pub type FieldProfile = geometry::FieldProfile<Scalar>;
pub type Lattice = grid::Lattice<Scalar>;
