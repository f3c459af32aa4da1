use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    Shape {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    Validation(String),

    #[error("non-finite value in `{term}` at t = {time}")]
    NumericBlowUp { term: String, time: f64 },

    #[error("value {value} outside the tabulated range [{min}, {max}] of the primitive transform")]
    Domain { value: f64, min: f64, max: f64 },

    #[error("time step {dt} exceeds the stability bound {bound} at t = {time}")]
    RejectedStep { dt: f64, bound: f64, time: f64 },

    #[error("dyadic block {shell} is zero; Bernstein ratio undefined")]
    UndefinedRatio { shell: i32 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures that stem from the numerics blowing up rather than
    /// from bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NumericBlowUp { .. } | Error::RejectedStep { .. })
    }

    pub(crate) fn at_time(self, t: f64) -> Self {
        match self {
            Error::NumericBlowUp { term, .. } => Error::NumericBlowUp { term, time: t },
            Error::RejectedStep { dt, bound, .. } => Error::RejectedStep { dt, bound, time: t },
            other => other,
        }
    }
}
