use thiserror::Error;

/// Errors raised anywhere in the library. Scalar payloads are widened to
/// `f64` so the type stays independent of the working precision.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "geometry: projection did not certify after {iterations} iterations \
         (certificate violation {violation:e})"
    )]
    NoConvergence {
        iterations: usize,
        violation: f64,
        best_point: Vec<f64>,
        best_weights: Vec<f64>,
    },

    #[error("numeric domain: {0}")]
    NumericDomain(String),

    #[error("scaling: objective {objective} has a vanishing gradient with eta = 0")]
    DegenerateScaling { objective: usize },

    #[error("flow: state left the problem region at t = {time} (excess {excess:e})")]
    Divergence { time: f64, excess: f64 },

    #[error("merit: grid needs about {needed} evaluations, budget is {budget}; use the ascent estimator")]
    Budget { needed: u64, budget: u64 },

    #[error("config: unknown key `{0}`")]
    UnknownKey(String),

    #[error("config: value for `{key}` out of range: {reason}")]
    OutOfRange { key: String, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::UnknownKey(_)
            | Error::OutOfRange { .. }
            | Error::Config(_) => 2,
            Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
