use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("weights sum to {sum}, expected 1")]
    WeightSum { sum: f64 },

    #[error("quadrature did not converge: best estimate {estimate}, error estimate {error}")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    #[error("{what} too large: {size} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("input is not symmetric: {0}")]
    Asymmetric(String),

    #[error("witness violates the Lipschitz bound: |phi(x)-phi(y)| = {gap} > d(x,y) = {dist}")]
    LipschitzViolation { gap: f64, dist: f64 },

    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("kernel evaluation failed: {0}")]
    Kernel(String),

    #[error("aliasing: spectral tail mass {tail:e} beyond Nyquist exceeds 1e-6; use a finer grid")]
    Aliasing { tail: f64 },

    #[error("characteristic function sup {kappa} is not below 1: lattice-supported density")]
    Lattice { kappa: f64 },

    #[error("transport solver failed: {0}")]
    Solver(String),

    #[error("cache file invalid: {0}")]
    Cache(String),

    #[error("assertion failed for criterion {criterion}: {detail}")]
    Assertion { criterion: String, detail: String },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
