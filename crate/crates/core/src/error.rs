//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("interval length {length} is not an integer multiple of grid step {dt}")]
    NonIntegralGrid { length: f64, dt: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite nodal value at node {node}, component {component}")]
    NonFiniteValue { node: usize, component: usize },

    #[error("evaluation point {t} outside domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },

    #[error("window anchor {s} is not a grid node (dt = {dt})")]
    MisalignedWindow { s: f64, dt: f64 },

    #[error("operator ratio undefined for the zero function")]
    ZeroFunction,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("empty constraint set: alpha = {alpha} must lie in (0, {bound})")]
    EmptySetParameters { alpha: f64, bound: f64 },

    #[error("value {value} outside admissible range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("threshold not reached within the window: y({s_max}) = {y_end}")]
    NoCrossing { s_max: f64, y_end: f64 },

    #[error("rate function value {value} violates bounds [{eps}, {k}]")]
    GBoundsViolated { value: f64, eps: f64, k: f64 },

    #[error("Picard iteration exceeded {iterations} iterations (last difference {last_diff:.3e})")]
    MaxIterExceeded { iterations: usize, last_diff: f64 },

    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
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
