//! Numerical laboratory for the two-periodic Aztec diamond dimer model.

pub mod airy;
pub mod analytic;
pub mod bessel;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod lattice;
pub mod linalg;
pub mod oracle;
pub mod sampler;

pub use error::{Error, Result};
pub use lattice::{build_model, LatticeModel, Point, C64};

/// Version of the library crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
