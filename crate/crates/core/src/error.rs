use thiserror::Error;

/// Errors raised by distributions, models, estimators and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{operation} is not implemented for the {family} family")]
    NotImplemented {
        operation: &'static str,
        family: &'static str,
    },

    #[error("x = {x} lies outside the support of the {family} family")]
    Domain { family: &'static str, x: f64 },

    #[error("nominal density vanishes at input coordinate {coordinate} (x = {x})")]
    SupportViolation { coordinate: usize, x: f64 },

    #[error("input vector has length {got}, model expects {expected}")]
    Shape { expected: usize, got: usize },

    #[error("coordinate index {index} out of range for dimension {dimension}")]
    Index { index: usize, dimension: usize },

    #[error("need at least {required} samples, got {got}")]
    InsufficientData { required: usize, got: usize },

    #[error("cannot compare reports from different configurations ({left} vs {right})")]
    ConfigMismatch { left: String, right: String },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
