use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("moment diverges at s = {0}")]
    Divergent(f64),
    #[error("no positive root of E[X^s] = 1: {0}")]
    NoRoot(String),
    #[error("law of log A is arithmetic (point mass)")]
    Arithmetic,
    #[error("tail indices of coordinates {first} and {second} are not separated by more than {tol}")]
    DuplicateIndices { first: usize, second: usize, tol: f64 },
    #[error("eps = {eps} outside (0, {max})")]
    EpsOutOfRange { eps: f64, max: f64 },
    #[error("matrix product underflowed to zero after {step} steps")]
    NumericUnderflow { step: usize },
    #[error("state overflowed f64 range at step {step}")]
    Overflow { step: usize },
    #[error("enumeration too large: d = {d}, s = {s} (limits d <= 8, s <= 12)")]
    TooLarge { d: usize, s: usize },
    #[error("coordinate {0} is self-dominant (tilde alpha = alpha); no dominated decomposition")]
    NotDominated(usize),
    #[error("degenerate sample: the top k + 1 order statistics coincide")]
    Degenerate,
    #[error("coordinate {0} is not in the Goldie regime (tilde alpha < alpha)")]
    WrongRegime(usize),
    #[error("u value missing for coordinate {0}")]
    MissingU(usize),
    #[error("Goldie constant missing for coordinate {0}")]
    MissingGoldie(usize),
    #[error("tail bound hypothesis violated: sup x^alpha P(Y > x) = {observed} > M = {bound}")]
    HypothesisFail { observed: f64, bound: f64 },
}

impl Error {
    /// True for failures that come from numerics rather than from malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Divergent(_)
                | Error::NoRoot(_)
                | Error::NumericUnderflow { .. }
                | Error::Overflow { .. }
                | Error::Degenerate
                | Error::HypothesisFail { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
