//! Incremental graph structure learning for large and expanding node sets.
//!
//! The crate learns a sparse weighted graph over a feature matrix and keeps
//! growing it as batches of new nodes arrive. Each batch is routed through
//! three stages:
//!
//! 1. **clustering** ([`clustering`]): a community model trained once on the
//!    static seed graph assigns every incoming node to a community;
//! 2. **coarsening** ([`coarsening`]): the community subgraph is collapsed to
//!    supernodes by random-projection hashing, a small graph is learned
//!    between supernodes and the incoming nodes, and the members of the
//!    linked supernodes form a candidate set;
//! 3. **learning** ([`learners`]): the final structure learner runs only on
//!    the candidate set plus the incoming nodes.
//!
//! [`pipeline`] wires the stages together; [`metrics`], [`synth`] and
//! [`bench`] support evaluation.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the file
//! formats use.

// NaN-rejecting `!(x > 0)` checks and index loops over dense matrices are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod clustering;
pub mod coarsening;
pub mod error;
pub mod graph;
pub mod io;
pub mod learners;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{build_graph, induced_subgraph, merge_edges, Edge, EdgeList, FeatureMatrix, Graph, SubgraphMap};
pub use scalar::Scalar;

pub type Graph64 = Graph<f64>;
pub type Graph32 = Graph<f32>;
pub type Features64 = FeatureMatrix<f64>;
pub type Features32 = FeatureMatrix<f32>;
pub type EdgeList64 = EdgeList<f64>;
pub type EdgeList32 = EdgeList<f32>;
pub type ClusterModel64 = clustering::ClusterModel<f64>;
pub type LshFamily64 = coarsening::LshFamily<f64>;
pub type Coarsening64 = coarsening::Coarsening<f64>;
pub type PipelineState64 = pipeline::PipelineState<f64>;
pub type PipelineState32 = pipeline::PipelineState<f32>;

/// Derives an independent stream seed from a base seed and a tag.
pub(crate) fn mix_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
