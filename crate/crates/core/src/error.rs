use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schedule entry {value} is not a multiple of grid step {step}")]
    OffGrid { value: f64, step: f64 },

    #[error("pmf mass leak: total mass {mass} deviates from 1 by more than {tol}")]
    MassLeak { mass: f64, tol: f64 },

    #[error("negative pmf mass {0} below clipping threshold")]
    NegativeMass(f64),

    #[error("cannot discretize unbounded support with zero tail tolerance")]
    UnboundedSupport,

    #[error("distribution not supported here: {0}")]
    Unsupported(String),

    #[error("exponential-mixture evaluator requires exponential services: {0}")]
    NotExponential(String),

    #[error("instance is not a location-scale family: {0}")]
    NotLocationScale(String),

    #[error("lognormal parameter ordering violated: {0}")]
    OrderingViolated(String),

    #[error("bound is vacuous: {0}")]
    VacuousBound(String),

    #[error("n = {n} exceeds cap {cap} for {what}; pass force to override")]
    CapExceeded { n: usize, cap: usize, what: String },

    #[error("bracket expansion failed: {0}")]
    BracketFailure(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("instance file error: {0}")]
    InstanceFile(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
