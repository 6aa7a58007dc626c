//! Closed-form contour-integral machinery for the two-periodic Aztec diamond.

pub mod asymptotics;
pub mod branch;
pub mod circle;
pub mod inverse;
pub mod kernel;
pub mod polys;
pub mod quadrature;
pub mod scaled;
pub mod window;

pub use inverse::InverseEvaluator;
pub use kernel::{AnalyticKernel, DimerCoordinates, InverseEntry, Integral, KernelOptions};
pub use quadrature::{ContourSpec, QuadratureReport};
pub use scaled::Scaled;
