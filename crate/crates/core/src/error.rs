use std::io;

use thiserror::Error;

/// Errors produced by the synchronization toolkit.
#[derive(Debug, Error)]
pub enum NetsyncError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The absolute FIM is singular. `unreachable` lists agents that have no
    /// path to a reference node or to an agent with prior information.
    #[error("network is not absolutely synchronizable; agents without an information source: {unreachable:?}")]
    NotSynchronizable { unreachable: Vec<usize> },

    #[error("agent graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("degenerate node {node}: zero diagonal in a non-absorbing row")]
    DegenerateNode { node: usize },

    #[error("series did not reach tolerance within {cap} terms (contraction {contraction})")]
    SeriesDivergence { cap: usize, contraction: f64 },

    #[error("tolerance {tol} not met within {max_steps} steps: {detail}")]
    ToleranceNotMet {
        tol: f64,
        max_steps: usize,
        detail: String,
    },

    #[error("memory guard: {0}")]
    MemoryGuard(String),

    #[error("variant mismatch: expected {expected}, got {got}")]
    VariantMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, NetsyncError>;

pub(crate) fn invalid(msg: impl Into<String>) -> NetsyncError {
    NetsyncError::InvalidParameter(msg.into())
}
