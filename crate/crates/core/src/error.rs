use thiserror::Error;

/// Errors raised by the laboratory. Variants map onto the CLI exit codes:
/// domain-type problems exit with 2, resource limits with 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {what} = {value} exceeds limit {limit}")]
    Range {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("capacity exceeded: {what} needs {requested} bytes, budget is {budget} bytes")]
    Capacity {
        what: &'static str,
        requested: u64,
        budget: u64,
    },

    #[error("point budget exceeded: {points} grid points requested, budget is {budget}")]
    Budget { points: u64, budget: u64 },

    #[error("rule evaluation failed at p = {p}, k = {k}: {reason}")]
    RuleEvaluation { p: u64, k: u32, reason: String },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("parse error: unrecognised token `{0}`")]
    Parse(String),
}

impl LabError {
    pub fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }

    /// True for errors that are caused by exhausting a configured resource
    /// (memory or grid points) rather than by bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, LabError::Capacity { .. } | LabError::Budget { .. })
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
