use thiserror::Error;

pub type Result<T> = std::result::Result<T, FinslerError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FinslerError {
    /// Evaluation outside the smoothness domain (e.g. the zero vector).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("metric validity error at y = {y:?}: {reason}")]
    MetricValidity { y: Vec<f64>, reason: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("reductive decomposition error: {0}")]
    Decomposition(String),

    #[error("curve leaves the chart at t = {escape_time}")]
    ChartExit { escape_time: f64 },

    #[error("speed drift {drift:.3e} exceeds {bound:.1e} with step {step}; use a smaller step")]
    Accuracy { drift: f64, bound: f64, step: f64 },

    /// The Killing field generated by the direction vanishes at the origin.
    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),

    #[error("operation requires a built-in chart family: {0}")]
    Unsupported(String),
}
