//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed inputs: dimension mismatches, non-finite values, invalid parameters.
    #[error("input error: {0}")]
    Input(String),

    /// The response carries no variance (after offset removal), so nothing can be fit.
    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    /// Coordinate descent hit the sweep limit; carries the attained convergence proxy.
    #[error("coordinate descent did not converge after {sweeps} sweeps (max coefficient change {max_coef_change:.3e})")]
    Convergence { sweeps: usize, max_coef_change: f64 },

    /// Dense factorization failure or other numerical breakdown.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A CSV cell or row could not be parsed.
    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// A solver error annotated with the outer fold it occurred in.
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    /// A permutation replicate aborted the test.
    #[error("permutation replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Walks through fold/replicate wrappers to the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::Fold { source, .. } | Error::Replicate { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_input(&self) -> bool {
        matches!(
            self.root(),
            Error::Input(_) | Error::DegenerateResponse(_) | Error::Parse { .. } | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
