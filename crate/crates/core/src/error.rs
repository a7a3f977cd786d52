use thiserror::Error;

#[derive(Debug, Error)]
pub enum SipError {
    #[error("unknown potential family `{0}`")]
    UnknownFamily(String),

    #[error("family `{family}` requires parameter `{name}`")]
    MissingParameter { family: String, name: String },

    #[error("invalid parameters for `{family}`: {reason}")]
    InvalidParameters { family: String, reason: String },

    #[error("x = {x} lies outside the domain ({lo}, {hi})")]
    DomainViolation { x: f64, lo: f64, hi: f64 },

    #[error("non-finite {what} at x = {x}")]
    NonFinite { what: &'static str, x: f64 },

    #[error("grid crosses pole(s) at {locations:?}")]
    Pole { locations: Vec<f64> },

    #[error("branch `{branch}` is inconsistent with K = {k}")]
    BranchMismatch { branch: &'static str, k: f64 },

    #[error("parameter step alpha must be nonzero")]
    ZeroAlpha,

    #[error("lambda must be nonzero for a constant shift c/lambda")]
    ZeroLambda,

    #[error("seed is not a solution: residual {residual:e} exceeds {tolerance:e}")]
    NotASolution { residual: f64, tolerance: f64 },

    #[error("ground state is not normalizable: {0}")]
    NonNormalizable(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("seed field is non-positive at r = {r}, theta = {theta}")]
    NonPositiveSeed { r: f64, theta: f64 },

    #[error("measure weight is non-positive at x = {0}")]
    NonPositiveWeight(f64),

    #[error("{0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SipError>;
