use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid precision: {0}")]
    InvalidPrecision(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown builtin problem '{0}'")]
    UnknownProblem(String),

    #[error("partial sum overflows the working exponent range at n = {n}")]
    Overflow { n: u64 },

    #[error("term a_{r} is zero at a scheduled index")]
    ZeroTerm { r: u64 },

    #[error("partial product vanishes at n = {n}")]
    ZeroPartialProduct { n: u64 },

    #[error("extrapolation table overflows at j = {j}, n = {n}")]
    TableOverflow { j: usize, n: usize },

    #[error("linear system is numerically singular (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("requested entry j = {j}, n = {n} lies outside the available data")]
    OutOfRange { j: usize, n: usize },

    #[error("ratio expansion needs c_0 != 0")]
    ZeroLeadingCoefficient,
}
