//! Link prediction on attributed graphs.
//!
//! Candidates for a query node are scored by a linear model over a small
//! feature map: Adamic-Adar, a locally learned attribute similarity (a tiny
//! linear program per node pair), and the coding surprise of the pair under
//! a co-clustering of the adjacency matrix. The model is trained with a
//! pairwise hinge loss. Classic baselines (Adamic-Adar, resource allocation,
//! Katz, local and superposed random walks, PropFlow) and the evaluation
//! protocol live alongside.

pub mod baselines;
pub mod cocluster;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod graph;
pub mod local;
pub mod ranker;
pub mod seed;
pub mod simplex;

pub use error::{Error, Result};
pub use graph::{Graph, NodeFeatureMatrix};
