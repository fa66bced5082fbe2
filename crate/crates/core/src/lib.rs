//! Taylor-Hood finite element lab for the Stokes resolvent problem
//! `lambda u - div(A grad u) + grad phi = f`, `div u = 0` on convex polygons,
//! with no-slip or traction-free boundary conditions.

pub mod error;
pub mod experiments;
pub mod fem;
pub mod fields;
pub mod geometry;
pub mod helmholtz;
pub mod norms;
pub mod par;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = faer::c64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
