use thiserror::Error;

/// Errors produced by the analysis pipeline.
///
/// Variants split into validation failures (bad inputs, rejected by
/// preconditions) and numerical failures (a computation that started but
/// could not finish). The CLI maps the former to exit code 2 and the
/// latter to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("no interval around lambda0={lambda0} separates the crossing from its neighbors; minimal separating half-width is {min_eta:.3e}")]
    IntervalTooTight { lambda0: f64, min_eta: f64 },

    #[error("mode {mode} has beta(lambda0)={beta:.3e} but is not listed as a center mode")]
    InconsistentCrossing { mode: usize, beta: f64 },

    #[error("boundary faces still mix field signs after {refinements} grid refinements ({faces} faces affected); adjust the box")]
    PersistentTangency { refinements: u32, faces: usize },

    #[error("operation requires crossing number {expected}, got {got}")]
    WrongArity { expected: usize, got: usize },

    #[error("isolation lost at lambda={lambda}")]
    IsolationLost { lambda: f64 },

    #[error("branch switching at lambda0={lambda0} failed: {details}")]
    SwitchFailed { lambda0: f64, details: String },

    #[error("no invariant set found at lambda={lambda} although the local theory predicts one")]
    NoInvariantSetFound { lambda: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to input
    /// validation). Used by the CLI for exit-code selection.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntervalTooTight { .. }
                | Error::InconsistentCrossing { .. }
                | Error::PersistentTangency { .. }
                | Error::IsolationLost { .. }
                | Error::SwitchFailed { .. }
                | Error::NoInvariantSetFound { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
