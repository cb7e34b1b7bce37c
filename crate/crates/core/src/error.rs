use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("repeat probability p{index} = {value} must lie in [0, 1)")]
    RepeatProbability { index: usize, value: f64 },
    #[error("invalid configuration:\n{0}")]
    Invalid(ValidationReport),
    #[error("unstable configuration: total load {rho} >= 1")]
    Unstable { rho: f64 },
    #[error("cannot read configuration: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("busy-period fixed point did not converge after {iterations} iterations (residual {residual:e}, s = {s})")]
    NonConvergence { s: f64, iterations: usize, residual: f64 },
    #[error("infinite product hit the depth cap {depth} with factor deviation {deviation:e}")]
    Truncation { depth: usize, deviation: f64 },
    #[error("argument {arg} outside the admissible range [{lo}, {hi}] of {what}")]
    Domain {
        what: &'static str,
        arg: f64,
        lo: f64,
        hi: f64,
    },
    #[error("degenerate model: {0}")]
    Degenerate(String),
    #[error("non-finite value while evaluating {0}")]
    NonFinite(&'static str),
    #[error("numerical differentiation failed: {0}")]
    Differentiation(String),
    #[error("invalid evaluation options: {0}")]
    Options(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("t = {0} is negative")]
    NegativeTime(f64),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulator refuses an unstable configuration (total load {rho})")]
    Unstable { rho: f64 },
    #[error("invalid simulation setup: {0}")]
    Setup(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty sample set")]
    Empty,
    #[error("too few samples ({n}) for {batches} batches")]
    TooFewForBatching { n: usize, batches: usize },
}
