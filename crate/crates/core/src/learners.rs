//! Structure learners: each maps the features of a node set to a weighted
//! edge list over local indices `0..n`.
//!
//! Distances and neighbour searches run in the scalar type `T`; the iterative
//! solvers (l2, log, large, glasso) work in f64 internally.

mod cov;
mod distance;
mod glasso;
mod knn;
mod smooth;

use serde::{Deserialize, Serialize};

pub use cov::{learn_cov, node_covariance};
pub use distance::{pairwise_distances, DistanceMatrix};
pub use glasso::{glasso_from_cov, learn_glasso, GlassoConfig, GlassoFit, GLASSO_MAX_N, GLASSO_RIDGE};
pub use knn::{ann_candidates, ann_family, learn_ann, learn_knn, median_distance, Kernel};
pub use smooth::{
    l2_objective, learn_l2, learn_l2_report, learn_large, learn_large_report, learn_log, learn_log_report,
    learn_log_support, log_kkt_residual, log_objective, project_simplex, PairWeights, SmoothnessConfig, SolverReport,
};

use crate::error::Result;
use crate::graph::{EdgeList, FeatureMatrix};
use crate::scalar::Scalar;

/// Floor for kernel and covariance weights, and cutoff for solver output.
pub const MIN_EDGE_WEIGHT: f64 = 1e-8;

/// Which learner to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Knn,
    Ann,
    Cov,
    L2,
    Log,
    Large,
    Glasso,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 7] = [
        LearnerKind::Knn,
        LearnerKind::Ann,
        LearnerKind::Cov,
        LearnerKind::L2,
        LearnerKind::Log,
        LearnerKind::Large,
        LearnerKind::Glasso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Knn => "knn",
            LearnerKind::Ann => "ann",
            LearnerKind::Cov => "cov",
            LearnerKind::L2 => "l2",
            LearnerKind::Log => "log",
            LearnerKind::Large => "large",
            LearnerKind::Glasso => "glasso",
        }
    }
}

impl std::fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown learner '{s}'"))
    }
}

/// Settings for every learner kind; each kind reads the fields it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerParams {
    /// Neighbour count for knn, ann and the large model's candidate graph.
    pub k: usize,
    pub kernel: Kernel,
    /// Hash count for ann and large.
    pub ann_h: usize,
    /// Bin width for ann and large, as a fraction of the median pairwise distance.
    pub ann_width: f64,
    pub cov_density: f64,
    pub smooth: SmoothnessConfig,
    pub glasso: GlassoConfig,
}

impl Default for LearnerParams {
    fn default() -> Self {
        Self {
            k: 10,
            kernel: Kernel::Auto,
            ann_h: 8,
            ann_width: 0.5,
            cov_density: 0.05,
            smooth: SmoothnessConfig::default(),
            glasso: GlassoConfig::default(),
        }
    }
}

/// Runs `kind` on `x`. Fewer than two rows give an empty edge list, and the
/// neighbour count is capped at `n − 1`.
pub fn learn<T: Scalar>(kind: LearnerKind, p: &LearnerParams, x: &FeatureMatrix<T>, seed: u64) -> Result<EdgeList<T>> {
    let n = x.n();
    if n < 2 {
        return Ok(EdgeList::empty());
    }
    let k = p.k.min(n - 1).max(1);
    match kind {
        LearnerKind::Knn => learn_knn(x, k, p.kernel),
        LearnerKind::Ann => learn_ann(x, k, p.kernel, &ann_family(x, p.ann_h, p.ann_width, seed)?),
        LearnerKind::Cov => learn_cov(x, p.cov_density),
        LearnerKind::L2 => learn_l2(&pairwise_distances(x)?, &p.smooth),
        LearnerKind::Log => learn_log(&pairwise_distances(x)?, &p.smooth),
        LearnerKind::Large => learn_large(x, k, &p.smooth, &ann_family(x, p.ann_h, p.ann_width, seed)?),
        LearnerKind::Glasso => learn_glasso(x, &p.glasso),
    }
}
