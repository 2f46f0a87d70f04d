use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a precondition (shape, range, finiteness).
    #[error("domain error: {0}")]
    Domain(String),

    /// The frequency grid is too large for the configured memory budget.
    #[error(
        "capacity error: grid size G = {grid_size} needs {required_bytes} bytes, budget is {budget_bytes} bytes"
    )]
    Capacity {
        grid_size: usize,
        required_bytes: u128,
        budget_bytes: u128,
    },

    /// A factorization or decomposition failed.
    #[error("solver error: {message}{}", condition_suffix(*.condition_estimate))]
    Solver {
        message: String,
        condition_estimate: Option<f64>,
    },

    /// Quadrature or another numerical routine did not converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An input file could not be parsed; `field` names the offending entry.
    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn condition_suffix(cond: Option<f64>) -> String {
    match cond {
        Some(c) => format!(" (condition estimate {c:e})"),
        None => String::new(),
    }
}

impl Error {
    /// Process exit status: 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Parse { .. } | Error::Io(_) => 2,
            Error::Capacity { .. } | Error::Solver { .. } | Error::Numeric(_) => 3,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>, condition_estimate: Option<f64>) -> Self {
        Error::Solver {
            message: msg.into(),
            condition_estimate,
        }
    }

    pub(crate) fn parse(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
