use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty set")]
    EmptySet,
    #[error("set is not compact (unbounded ray present)")]
    NotCompact,
    #[error("insufficient nodes: need at least {needed}, got {got}")]
    InsufficientNodes { needed: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("degree error: {0}")]
    Degree(String),
    #[error("no valid pruned subset: {0}")]
    PruneInfeasible(String),
    #[error("iteration limit reached: {0}")]
    IterationLimit(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("construction failed at stage `{stage}`: {detail}")]
    ConstructionFailed { stage: String, detail: String },
    #[error("root escaped the target set: {0}")]
    RootEscape(String),
    #[error("sweetener undefined: capacity must exceed 1")]
    SweetenerUndefined,
    #[error("unbounded supremum: {0}")]
    Unbounded(String),
    #[error("tail not certifiable: {0}")]
    TailUncertified(String),
    #[error("infeasible program: {0}")]
    Infeasible(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn failed(stage: &str, detail: impl Into<String>) -> Error {
    Error::ConstructionFailed {
        stage: stage.to_string(),
        detail: detail.into(),
    }
}
