use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(u64),

    #[error("density undefined for a graph with {0} node(s)")]
    DensityUndefined(usize),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate external id {0:?}")]
    DuplicateId(String),

    #[error("no profile for author {0:?}")]
    MissingProfile(String),

    #[error("undefined reciprocal level: node {0} has no followers")]
    UndefinedReciprocalLevel(NodeId),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error(
        "beta fit did not converge after {iterations} iterations (alpha={alpha}, beta={beta})"
    )]
    NonConvergence {
        alpha: f64,
        beta: f64,
        iterations: usize,
    },

    #[error("degenerate beta fit: {0}")]
    DegenerateFit(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("retweet_of cycle through tweets {0:?}")]
    RetweetCycle(Vec<String>),

    #[error("tweet author {0:?} is not a node of the graph")]
    UnknownAuthor(String),

    #[error("edge {influencer} -> {target} is not in the graph")]
    EdgeNotInGraph { influencer: NodeId, target: NodeId },

    #[error("graph too large for exact {model} oracle: {reason}")]
    OracleTooLarge { model: &'static str, reason: String },

    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),

    #[error("need at least 2 cascades, got {0}")]
    TooFewCascades(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
