use alloc::string::String;

use crate::losses::LossBreakdown;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("objective undefined on a graph without edges")]
    EmptyGraph,

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("cache does not match the parameters it is applied to")]
    StaleCache,

    #[error("non-finite loss at epoch {epoch}: {breakdown:?}")]
    NonFiniteLoss {
        epoch: usize,
        breakdown: LossBreakdown,
    },
}
