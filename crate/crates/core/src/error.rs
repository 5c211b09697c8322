use thiserror::Error;

use crate::flow::FlowError;
use crate::graph::{EdgeId, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("unknown edge id {0}")]
    UnknownEdge(u32),
    #[error("edge {0} listed more than once")]
    DuplicateEdge(EdgeId),
    #[error("edge {0} is not critical")]
    NotCritical(EdgeId),
    #[error("{given} failed edges exceed the oracle's k = {k}")]
    TooManyFailures { given: usize, k: usize },
    #[error("query precondition violated: {0}")]
    Precondition(String),
    #[error("{0}")]
    TooLarge(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("oracle file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure_invariant {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Invariant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure_invariant;
