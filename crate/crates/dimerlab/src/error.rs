use thiserror::Error;

/// Errors surfaced by the library. Numerical failures carry enough context
/// to identify the offending evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("order must be 4m (got n = {0})")]
    InvalidOrder(usize),
    #[error("edge weights must be positive and finite (a = {a}, b = {b})")]
    InvalidWeight { a: f64, b: f64 },
    #[error("vertex ({0}, {1}) is not a vertex of the expected colour")]
    InvalidVertex(i64, i64),
    #[error("order {n} exceeds the oracle size cap {cap}")]
    SizeCapExceeded { n: usize, cap: usize },
    #[error("matrix is numerically singular at pivot {0}")]
    Singular(usize),
    #[error("residual check failed: {0:e}")]
    Residual(f64),
    #[error("imaginary residue {0:e} exceeds tolerance")]
    ImaginaryResidue(f64),
    #[error("value {0} lies outside [0, 1] beyond tolerance")]
    OutOfRange(f64),
    #[error("point {0} lies on a branch cut")]
    OnCut(String),
    #[error("contour radius {radius} violates {constraint}")]
    Radius { radius: f64, constraint: String },
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate corridor: {0}")]
    DegenerateCorridor(String),
    #[error("height function inconsistent at face ({0}, {1})")]
    HeightInconsistent(i64, i64),
    #[error("cannot write output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;
