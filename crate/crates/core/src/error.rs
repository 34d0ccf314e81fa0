use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("{what} needs {qubits} qubits, dense cap is {cap}")]
    Resource {
        what: &'static str,
        qubits: usize,
        cap: usize,
    },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("probe outcome {outcome} has probability {probability:e}, cannot project")]
    Projection { outcome: u8, probability: f64 },

    #[error(
        "preparation step {step} aborted: flip probability {probability:e} below {threshold:e}"
    )]
    StepAborted {
        step: usize,
        probability: f64,
        threshold: f64,
    },

    #[error("{} sweep point(s) failed, first at k={}: {}", .0.len(), .0[0].0, .0[0].1)]
    Sweep(Vec<(usize, Error)>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            reason: reason.into(),
        }
    }
}
