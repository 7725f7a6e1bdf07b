use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("cannot parse {0:?} as a decimal number")]
    Parse(String),
    #[error("no convergence after {iterations} iterations (best residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("radicand not verified positive for n2 = {0}")]
    RadicandNotPositive(usize),
    #[error("split index {split} must exceed d2*c/pi = {threshold}")]
    InvalidSplit { split: usize, threshold: f64 },
    #[error("singular block: {0}")]
    SingularBlock(String),
    #[error("singular Gram matrix of the trace operator")]
    SingularGram,
    #[error("eigensolver failure: {0}")]
    EigSolverFailure(String),
    #[error("point ({0}, {1}) outside the domain")]
    PointOutsideDomain(f64, f64),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("unbounded interval in {0}")]
    UnboundedInterval(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
