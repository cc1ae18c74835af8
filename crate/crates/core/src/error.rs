use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the object is defined.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("no analytic covariance for {model} with observable {observable}")]
    UnsupportedAnalytic { model: String, observable: String },

    #[error("no closed-form Green function for step law {0}")]
    UnsupportedExact(String),

    /// The walk has zero drift; sampled limit theorems need a transient walk.
    #[error("step law has mean {mean}; a transient walk (nonzero mean step) is required")]
    NotTransient { mean: f64 },

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("truncated tail {tail_bound:e} exceeds tolerance {tolerance:e}")]
    Truncation { tail_bound: f64, tolerance: f64 },

    #[error("degenerate variance: {0}")]
    Degenerate(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
