use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the deferral stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular system: {0}; set ridge > 0")]
    Singular(String),

    #[error("MLE did not converge after {iterations} iterations (gradient inf-norm {grad_norm:e})")]
    Convergence { iterations: usize, grad_norm: f64 },

    #[error("state error: {0}")]
    State(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("budget overrun: spending {cost} with only {remaining} remaining")]
    BudgetOverrun { cost: f64, remaining: f64 },

    #[error("environment exhausted after {completed} of {horizon} rounds")]
    Truncated { completed: usize, horizon: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("dataset {0} contains no rows")]
    EmptyDataset(PathBuf),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
