use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },
    #[error("matrix entry {value} is not an integer")]
    NotInteger { value: f64 },
    #[error("not a point of the Siegel upper half-space: {0}")]
    NotSiegel(String),
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
    #[error("index {index} out of range {range}")]
    Index { index: usize, range: String },
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("pole at s = {0}")]
    Pole(String),
    #[error("matrix is not in the integral parabolic subgroup: {0}")]
    NotParabolic(String),
    #[error("row {0:?} is not primitive")]
    NotPrimitive(Vec<i64>),
    #[error("Re(s) = {re_s} is outside the convergence region Re(s) > {genus}")]
    ConvergenceRegion { re_s: f64, genus: usize },
    #[error("theta characteristic is odd")]
    OddCharacteristic,
    #[error("quadrature did not reach tolerance: value {value:.6e}, error estimate {estimate:.3e}")]
    Accuracy { value: f64, estimate: f64 },
    #[error("tail estimate {tail:.3e} exceeds tolerance {tolerance:.3e}")]
    Tail { tail: f64, tolerance: f64 },
    #[error("stencil step {step} leaves the region v > 0")]
    Step { step: f64 },
    #[error("series would need {terms} terms (limit {limit})")]
    Scale { terms: u64, limit: u64 },
    #[error("integration dimension {dim} exceeds the desk-scale limit {limit}")]
    DimensionGuard { dim: usize, limit: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
