use thiserror::Error;

/// Errors raised by games, regularizers, solvers, learners and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid game spec: {0}")]
    InvalidSpec(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { solver: &'static str, iterations: usize, residual: f64 },

    #[error("bounded-utility violation: |nu|_inf = {0} exceeds 1")]
    UnboundedUtility(f64),

    #[error("learner used out of order: {0}")]
    OutOfOrder(&'static str),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("round {round}, player {player}: {source}")]
    Round {
        round: usize,
        player: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
