use thiserror::Error;

/// Errors raised by the modeling, characterization and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid pressure {0} kPa: must be finite and non-negative")]
    InvalidPressure(f64),

    #[error("pressure {pressure} kPa exceeds safety cap {cap} kPa")]
    SafetyCap { pressure: f64, cap: f64 },

    #[error("pressure {pressure} kPa exceeds actuator maximum {max} kPa")]
    OverPressure { pressure: f64, max: f64 },

    #[error("loss cannot be computed at zero pressure")]
    ZeroPressure,

    #[error("invalid loss model: {0}")]
    InvalidModel(String),

    #[error("invalid actuator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("no cross-section configured for shape `{0}`")]
    UnknownShape(String),

    #[error("insufficient data: {needed} points required inside the fit window, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("degenerate fit: all pressures are equal")]
    DegenerateFit,

    #[error("invalid rig config: {0}")]
    InvalidRig(String),

    #[error("invalid brace layout: {0}")]
    InvalidLayout(String),

    #[error("invalid gait schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid simulation parameters: {0}")]
    InvalidSimulation(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
