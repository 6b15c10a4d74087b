//! Personalized graph summarization.
//!
//! The crate compresses an undirected graph into a supernode/superedge
//! summary whose reconstruction error is weighted toward a target node set,
//! answers neighborhood-driven queries (HOP, RWR, PHP) directly on the
//! summary, and simulates communication-free multi-query answering over
//! several personalized summaries.
//!
//! Module map:
//!
//! - [`graph`]: compressed adjacency graphs, edge-list IO, generators, effective diameter
//! - [`personalization`]: hop distances to the target set and pair weights
//! - [`summary`]: summary graphs, reconstruction, size/error/cost accounting, PGS v1 files
//! - [`engine`]: the summarizer (shingling, greedy merging, adaptive threshold, sparsification)
//! - [`query`]: neighborhood, HOP, RWR and PHP queries on graphs and summaries
//! - [`eval`]: SMAPE, Spearman, compression rate, experiment drivers
//! - [`distributed`]: partitioning, per-machine payloads and query routing
//! - [`cli`]: the `pegasus` command line

pub mod cli;
pub mod distributed;
pub mod engine;
mod error;
pub mod eval;
pub mod graph;
pub mod personalization;
pub mod query;
pub mod summary;

pub use error::{Error, Result};
pub use graph::Graph;
pub use personalization::{TargetSet, WeightModel};
pub use summary::SummaryGraph;

/// Node identifier. Dense, 0-based.
pub type NodeId = u32;

/// Supernode identifier. Live ids are a subset of `0..node_count`.
pub type SupernodeId = u32;
