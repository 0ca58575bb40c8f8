//! Influence diffusion on follower graphs under the Independent Cascade and
//! First-Influencer models.
//!
//! The crate covers the full pipeline: loading a social dataset, community
//! metrics, cascade extraction from retweets, per-edge probability inference,
//! Monte Carlo and exact spread estimation, synthetic data generation and the
//! two comparison experiments (inference stability and spread prediction).

pub mod cascade;
pub mod cli;
pub mod diffusion;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod inference;
pub mod ingest;
pub mod metrics;
pub mod probs;
pub mod rng;
pub mod synth;

pub use cascade::{Activation, Cascade, CascadeLog};
pub use diffusion::{Diffusion, Model, SpreadEstimate};
pub use error::{Error, Result};
pub use graph::{CommunityGraph, EdgeId, NodeId};
pub use ingest::Dataset;
pub use probs::EdgeProbabilities;
