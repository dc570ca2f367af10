use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("only {found} negative-energy states found, {requested} requested")]
    TooFewBoundStates { found: usize, requested: usize },

    #[error("level index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("time {t} outside pulse support [0, {tau}]")]
    TimeOutOfRange { t: f64, tau: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tridiagonal solve broke down at row {row}")]
    SolveBreakdown { row: usize },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("empty order window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("harmonic order {0} outside spectrum range")]
    OrderOutOfRange(f64),

    #[error("tuning failed: {0}")]
    Tuning(String),

    #[error("config error at line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
