use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A design matrix entry (`col = Some(_)`) or response entry (`col = None`)
    /// is NaN or infinite.
    NonFinite {
        row: usize,
        col: Option<usize>,
    },
    /// Mismatched or empty dimensions.
    Shape(String),
    /// The first design column must be the constant 1.
    MissingIntercept {
        row: usize,
    },
    InvalidModel(String),
    InvalidSchedule(String),
    NotPositiveSemidefinite {
        index: usize,
        pivot: f64,
    },
    UnknownPayoff(String),
    InvalidPayoff(String),
    UnsupportedBasis {
        case: &'static str,
        m: usize,
        supported: &'static str,
    },
    InvalidSplit {
        pool: usize,
        sets: usize,
        reason: &'static str,
    },
    /// Every basis column vanished on the regression date.
    DegenerateRegression {
        date: usize,
    },
    InvalidMode(&'static str),
    ScheduleMismatch,
    ProvenanceMismatch,
    InvalidSteps {
        steps: usize,
        dates: usize,
    },
    UnknownReference {
        case: String,
        key: String,
        known: String,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { row, col: Some(col) } => {
                write!(f, "non-finite design matrix entry at row {row}, column {col}")
            }
            Error::NonFinite { row, col: None } => {
                write!(f, "non-finite response value at row {row}")
            }
            Error::Shape(msg) => write!(f, "dimension error: {msg}"),
            Error::MissingIntercept { row } => {
                write!(f, "first design column must be 1, found otherwise at row {row}")
            }
            Error::InvalidModel(msg) => write!(f, "invalid market model: {msg}"),
            Error::InvalidSchedule(msg) => write!(f, "invalid exercise schedule: {msg}"),
            Error::NotPositiveSemidefinite { index, pivot } => {
                write!(f, "correlation matrix is not positive semidefinite (pivot {index} = {pivot:e})")
            }
            Error::UnknownPayoff(name) => {
                write!(f, "unknown payoff kind `{name}` (expected put, bestof or basket)")
            }
            Error::InvalidPayoff(msg) => write!(f, "invalid payoff: {msg}"),
            Error::UnsupportedBasis { case, m, supported } => {
                write!(f, "basis size M={m} is not supported for {case}; supported: {supported}")
            }
            Error::InvalidSplit { pool, sets, reason } => {
                write!(f, "cannot split a pool of {pool} paths into {sets} sets: {reason}")
            }
            Error::DegenerateRegression { date } => {
                write!(f, "regression at exercise date {date} has rank 0")
            }
            Error::InvalidMode(msg) => write!(f, "invalid estimator mode: {msg}"),
            Error::ScheduleMismatch => write!(f, "path sets use different exercise schedules"),
            Error::ProvenanceMismatch => {
                write!(f, "pricing results were computed on different path sets")
            }
            Error::InvalidSteps { steps, dates } => {
                write!(f, "binomial steps {steps} must be at least 100 and a multiple of the {dates} exercise dates")
            }
            Error::UnknownReference { case, key, known } => {
                write!(f, "no reference price for {case} at {key}; known keys: {known}")
            }
        }
    }
}

impl core::error::Error for Error {}
