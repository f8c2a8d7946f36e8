use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure at t = {time}: {message}")]
    Numerical { time: f64, message: String },

    #[error("dimension mismatch: expected {expected} components, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("component index {index} out of range for {len} components")]
    InvalidIndex { index: usize, len: usize },

    #[error("degenerate state: square modulus is {0}")]
    DegenerateState(f64),

    #[error("rule {rule} not applicable: {message}")]
    RuleNotApplicable { rule: &'static str, message: String },

    #[error("Everett exclusion violated at t = {time}: observer {observer} is conscious in states {states:?}")]
    EverettViolation { time: f64, observer: u32, states: Vec<u32> },

    #[error("resolution underflow: kernel width {width} is below half the bin width {bin_width}")]
    ResolutionUnderflow { width: f64, bin_width: f64 },

    #[error("model domain error: {0}")]
    ModelDomain(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("trajectory with seed {seed} failed: {source}")]
    Trajectory {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { path: path.into(), message: message.into() }
    }

    /// True when the failure comes from the integrator rather than from the input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical { .. } => true,
            Error::Trajectory { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
