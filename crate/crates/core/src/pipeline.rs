//! Expanding-graph driver: split the rows into a static prefix and batches,
//! train the community model once, then grow the graph batch by batch.
//!
//! For each community touched by a batch the existing members are coarsened,
//! a small graph is learned between supernodes and the incoming rows, and the
//! final learner runs on the members of the linked supernodes plus the
//! incoming rows. Only edges with an incoming endpoint are merged, so the
//! graph grows monotonically.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans_fit, spectral_fit, ClusterMethod, ClusterModel, DEFAULT_MAX_ITER};
use crate::coarsening::{candidate_set, coarsen, collision_bound, default_bin_width, Coarsening, LshFamily, DEFAULT_HASHES};
use crate::error::{invalid, Error, Result};
use crate::graph::{build_graph, induced_subgraph, merge_edges, EdgeList, FeatureMatrix, Graph};
use crate::learners::{learn, GlassoConfig, Kernel, LearnerKind, LearnerParams, SmoothnessConfig};
use crate::mix_seed;
use crate::scalar::{sq_dist, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoarseningMethod {
    /// LSH bins with max-occurrence voting.
    Lsh,
    /// Every node its own supernode.
    Identity,
}

/// Edge weighting for knn/ann, flattened for the config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    Auto,
    Gaussian,
    Unit,
}

/// Flat pipeline configuration; every field has a default, unknown keys are
/// rejected when parsing JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub clust_method: ClusterMethod,
    pub clust_k: usize,
    pub coarsening: CoarseningMethod,
    /// Hash count for the coarsener.
    pub coar_h: usize,
    /// Coarsening bin width; 0 picks a width per community from its features.
    pub coar_r_bin: f64,
    pub learner_coarse: LearnerKind,
    pub learner_final: LearnerKind,
    /// Neighbour count for the knn-type learners.
    pub k: usize,
    pub kernel: KernelChoice,
    /// σ for `kernel = "gaussian"`.
    pub sigma: f64,
    pub ann_h: usize,
    pub ann_width: f64,
    pub cov_density: f64,
    pub alpha: f64,
    pub beta: f64,
    pub solver_max_iter: usize,
    pub solver_tol: f64,
    /// Solver step; 0 means automatic.
    pub solver_step: f64,
    pub glasso_rho: f64,
    pub glasso_max_iter: usize,
    pub glasso_tol: f64,
    /// Neighbour count for the global fallback and containment checks.
    pub knn_k: usize,
    pub r_split: f64,
    #[serde(rename = "T", alias = "t")]
    pub t: usize,
    pub seed: u64,
    /// Bypass clustering and coarsening; run the final learner on all rows.
    pub vanilla: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let lp = LearnerParams::default();
        Self {
            clust_method: ClusterMethod::Kmeans,
            clust_k: 8,
            coarsening: CoarseningMethod::Lsh,
            coar_h: DEFAULT_HASHES,
            coar_r_bin: 0.0,
            learner_coarse: LearnerKind::Knn,
            learner_final: LearnerKind::Knn,
            k: lp.k,
            kernel: KernelChoice::Auto,
            sigma: 1.0,
            ann_h: lp.ann_h,
            ann_width: lp.ann_width,
            cov_density: lp.cov_density,
            alpha: lp.smooth.alpha,
            beta: lp.smooth.beta,
            solver_max_iter: lp.smooth.max_iter,
            solver_tol: lp.smooth.tol,
            solver_step: lp.smooth.step,
            glasso_rho: lp.glasso.rho,
            glasso_max_iter: lp.glasso.max_iter,
            glasso_tol: lp.glasso.tol,
            knn_k: 10,
            r_split: 0.5,
            t: 25,
            seed: 0,
            vanilla: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_split > 0.0 && self.r_split <= 1.0) {
            return Err(invalid("r_split", "must lie in (0, 1]"));
        }
        if self.t == 0 {
            return Err(invalid("T", "need at least one timestamp"));
        }
        if self.clust_k == 0 {
            return Err(invalid("clust_k", "need at least one community"));
        }
        if self.k == 0 || self.knn_k == 0 {
            return Err(invalid("k", "neighbour counts must be positive"));
        }
        if self.coar_h == 0 {
            return Err(invalid("coar_h", "need at least one hash"));
        }
        if !(self.coar_r_bin >= 0.0) || !self.coar_r_bin.is_finite() {
            return Err(invalid("coar_r_bin", "must be 0 (auto) or positive"));
        }
        if self.kernel == KernelChoice::Gaussian && !(self.sigma > 0.0) {
            return Err(invalid("sigma", "must be positive"));
        }
        if self.ann_h == 0 || !(self.ann_width > 0.0) {
            return Err(invalid("ann_h", "ann needs h ≥ 1 and a positive width"));
        }
        if !(self.cov_density > 0.0 && self.cov_density <= 1.0) {
            return Err(invalid("cov_density", "must lie in (0, 1]"));
        }
        let p = self.learner_params();
        p.smooth.validate()?;
        p.glasso.validate()
    }

    pub fn learner_params(&self) -> LearnerParams {
        LearnerParams {
            k: self.k,
            kernel: match self.kernel {
                KernelChoice::Auto => Kernel::Auto,
                KernelChoice::Gaussian => Kernel::Sigma(self.sigma),
                KernelChoice::Unit => Kernel::Unit,
            },
            ann_h: self.ann_h,
            ann_width: self.ann_width,
            cov_density: self.cov_density,
            smooth: SmoothnessConfig {
                alpha: self.alpha,
                beta: self.beta,
                max_iter: self.solver_max_iter,
                tol: self.solver_tol,
                step: self.solver_step,
            },
            glasso: GlassoConfig {
                rho: self.glasso_rho,
                max_iter: self.glasso_max_iter,
                tol: self.glasso_tol,
            },
        }
    }
}

/// Static rows and the expanding batches, as row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub static_idx: Vec<usize>,
    pub batches: Vec<Vec<usize>>,
}

/// Uniform random split: `⌊r·n⌋` static rows, the rest in `t` batches whose
/// sizes differ by at most one. Each part is sorted.
pub fn split_expanding(n: usize, r_split: f64, t: usize, seed: u64) -> Result<Split> {
    if !(r_split > 0.0 && r_split <= 1.0) {
        return Err(invalid("r_split", "must lie in (0, 1]"));
    }
    if t == 0 {
        return Err(invalid("T", "need at least one timestamp"));
    }
    let n_static = (r_split * n as f64).floor() as usize;
    if n_static == 0 {
        return Err(invalid("r_split", format!("static set is empty for n = {n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut static_idx = perm[..n_static].to_vec();
    static_idx.sort_unstable();
    Ok(Split {
        static_idx,
        batches: chunk_near_equal(&perm[n_static..], t),
    })
}

fn chunk_near_equal(rest: &[usize], t: usize) -> Vec<Vec<usize>> {
    let (q, extra) = (rest.len() / t, rest.len() % t);
    let mut out = Vec::with_capacity(t);
    let mut at = 0;
    for b in 0..t {
        let len = q + usize::from(b < extra);
        let mut batch = rest[at..at + len].to_vec();
        batch.sort_unstable();
        out.push(batch);
        at += len;
    }
    out
}

/// What one step did.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub batch: usize,
    /// Node count after the step.
    pub nodes: usize,
    pub communities: usize,
    pub omega_mean: f64,
    pub omega_max: usize,
    /// Largest node set handed to the final learner.
    pub final_max: usize,
    /// Sum of the final-learner node set sizes over communities.
    pub final_total: usize,
    /// Incoming nodes whose candidate set came from a fallback.
    pub fallbacks: usize,
    pub edges_added: usize,
    pub clust_ms: f64,
    pub coar_ms: f64,
    pub learn_ms: f64,
    pub total_ms: f64,
}

/// Current graph, arrived features, community model and step log.
#[derive(Debug, Clone)]
pub struct PipelineState<T = f64> {
    pub config: PipelineConfig,
    pub graph: Graph<T>,
    pub features: FeatureMatrix<T>,
    /// Absent in vanilla mode.
    pub model: Option<ClusterModel<T>>,
    /// Community frozen at arrival, per node.
    pub communities: Vec<usize>,
    pub log: Vec<StepRecord>,
    pub init_clust_ms: f64,
    pub init_learn_ms: f64,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Builds the initial state. Without `g0` the initial graph is learned from
/// `x0` by the final learner; the community model is then trained on it.
pub fn init<T: Scalar>(x0: &FeatureMatrix<T>, g0: Option<Graph<T>>, cfg: &PipelineConfig) -> Result<PipelineState<T>> {
    init_inner(x0, g0, None, cfg)
}

/// [`init`] with a previously trained community model instead of training.
pub fn init_with_model<T: Scalar>(
    x0: &FeatureMatrix<T>,
    g0: Option<Graph<T>>,
    model: ClusterModel<T>,
    cfg: &PipelineConfig,
) -> Result<PipelineState<T>> {
    init_inner(x0, g0, Some(model), cfg)
}

fn init_inner<T: Scalar>(
    x0: &FeatureMatrix<T>,
    g0: Option<Graph<T>>,
    model: Option<ClusterModel<T>>,
    cfg: &PipelineConfig,
) -> Result<PipelineState<T>> {
    cfg.validate()?;
    if x0.n() == 0 {
        return Err(invalid("X0", "static set is empty"));
    }
    let t = Instant::now();
    let graph = match g0 {
        Some(g) if g.n() != x0.n() => {
            return Err(Error::DimensionMismatch {
                expected: x0.n(),
                found: g.n(),
            })
        }
        Some(g) => g,
        None => build_graph(x0.n(), &learn(cfg.learner_final, &cfg.learner_params(), x0, mix_seed(cfg.seed, 10))?)?,
    };
    let init_learn_ms = ms(t);
    let t = Instant::now();
    let (model, communities) = if cfg.vanilla {
        (None, vec![0; x0.n()])
    } else {
        let model = match model {
            Some(m) => {
                if m.d() != x0.d() {
                    return Err(Error::DimensionMismatch {
                        expected: x0.d(),
                        found: m.d(),
                    });
                }
                m
            }
            None => {
                let k = cfg.clust_k.min(x0.n());
                let seed = mix_seed(cfg.seed, 11);
                match cfg.clust_method {
                    ClusterMethod::Kmeans => kmeans_fit(x0, k, DEFAULT_MAX_ITER, seed)?,
                    ClusterMethod::Spectral => spectral_fit(&graph, x0, k, seed)?,
                }
            }
        };
        let communities = if model.train_assignments.len() == x0.n() {
            model.train_assignments.clone()
        } else {
            model.infer_batch(x0)?
        };
        (Some(model), communities)
    };
    Ok(PipelineState {
        config: cfg.clone(),
        graph,
        features: x0.clone(),
        model,
        communities,
        log: Vec::new(),
        init_clust_ms: ms(t),
        init_learn_ms,
    })
}

/// Candidate sets of a group of incoming rows within one community.
#[derive(Debug, Clone)]
struct Candidates {
    /// Global ids of existing nodes, sorted, per incoming row.
    omega: Vec<Vec<usize>>,
    fallbacks: usize,
    /// Bin width used by the coarsener, when it hashed.
    r_bin: Option<f64>,
    coar_ms: f64,
    learn_ms: f64,
}

// k nearest of `x` among `pool` (global ids), ties by id.
fn nearest_in<T: Scalar>(features: &FeatureMatrix<T>, pool: &[usize], x: &[T], k: usize) -> Vec<usize> {
    let mut d: Vec<(T, usize)> = pool.iter().map(|&u| (sq_dist(features.row(u), x), u)).collect();
    d.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    d.truncate(k);
    let mut ids: Vec<usize> = d.into_iter().map(|p| p.1).collect();
    ids.sort_unstable();
    ids
}

impl<T: Scalar> PipelineState<T> {
    pub fn arrived(&self) -> usize {
        self.graph.n()
    }

    /// Existing nodes of each community, ascending.
    fn members(&self, k: usize) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); k];
        for (i, &c) in self.communities.iter().enumerate() {
            if c < k {
                m[c].push(i);
            }
        }
        m
    }

    // Coarse stage for the rows `xin` against the existing nodes `members`.
    fn candidates(&self, members: &[usize], xin: &FeatureMatrix<T>, seed: u64) -> Result<Candidates> {
        let cfg = &self.config;
        let m = xin.n();
        if members.is_empty() {
            let all: Vec<usize> = (0..self.arrived()).collect();
            let omega = xin.rows().map(|x| nearest_in(&self.features, &all, x, cfg.knn_k)).collect();
            return Ok(Candidates {
                omega,
                fallbacks: m,
                r_bin: None,
                coar_ms: 0.0,
                learn_ms: 0.0,
            });
        }
        let t = Instant::now();
        let (sub, _) = induced_subgraph(&self.graph, members)?;
        let xc = self.features.select_rows(members);
        let (coarse, r_bin) = match cfg.coarsening {
            CoarseningMethod::Identity => (Coarsening::identity(&sub, &xc)?, None),
            CoarseningMethod::Lsh => {
                let r = if cfg.coar_r_bin > 0.0 {
                    T::of(cfg.coar_r_bin)
                } else {
                    default_bin_width(&xc, mix_seed(seed, 1))
                };
                let fam = LshFamily::new(xc.d(), cfg.coar_h, r, mix_seed(seed, 2))?;
                (coarsen(&sub, &xc, &fam)?, Some(r.as_f64()))
            }
        };
        let coar_ms = ms(t);
        let t = Instant::now();
        let s = coarse.super_count;
        let xs = coarse.super_features.vstack(xin)?;
        // Other incoming rows may take neighbour slots; widen k so that each
        // incoming row still reaches k supernodes.
        let mut p = cfg.learner_params();
        p.k = cfg.k + m - 1;
        let edges = learn(cfg.learner_coarse, &p, &xs, mix_seed(seed, 3))?;
        let mut links = vec![Vec::new(); m];
        for e in edges.iter() {
            if e.u < s && e.v >= s {
                links[e.v - s].push(e.u);
            }
        }
        let local = candidate_set(&coarse, &links)?;
        let mut fallbacks = 0;
        let omega = local
            .into_iter()
            .map(|set| {
                if set.is_empty() {
                    fallbacks += 1;
                    members.to_vec()
                } else {
                    set.into_iter().map(|i| members[i]).collect()
                }
            })
            .collect();
        Ok(Candidates {
            omega,
            fallbacks,
            r_bin,
            coar_ms,
            learn_ms: ms(t),
        })
    }

    // Final stage for one community: returns global edges with ≥1 incoming end.
    fn community_update(&self, members: &[usize], xb: &FeatureMatrix<T>, inc: &[usize], seed: u64) -> Result<CommunityResult<T>> {
        let base = self.arrived();
        let xin = xb.select_rows(inc);
        let cand = self.candidates(members, &xin, seed)?;
        let t = Instant::now();
        let mut union: Vec<usize> = cand.omega.iter().flatten().copied().collect();
        union.sort_unstable();
        union.dedup();
        let xf = self.features.select_rows(&union).vstack(&xin)?;
        let local = learn(self.config.learner_final, &self.config.learner_params(), &xf, mix_seed(seed, 4))?;
        let cut = union.len();
        let map: Vec<usize> = union.iter().copied().chain(inc.iter().map(|&b| base + b)).collect();
        let edges = local
            .iter()
            .filter(|e| e.v >= cut)
            .map(|e| (map[e.u], map[e.v], e.w))
            .collect();
        Ok(CommunityResult {
            edges,
            omega_sizes: cand.omega.iter().map(Vec::len).collect(),
            final_n: xf.n(),
            fallbacks: cand.fallbacks,
            coar_ms: cand.coar_ms,
            learn_ms: cand.learn_ms + ms(t),
        })
    }

    /// Adds one batch of rows. An empty batch leaves the state untouched.
    pub fn step(&mut self, xb: &FeatureMatrix<T>) -> Result<()> {
        let m = xb.n();
        if m == 0 {
            return Ok(());
        }
        if xb.d() != self.features.d() {
            return Err(Error::DimensionMismatch {
                expected: self.features.d(),
                found: xb.d(),
            });
        }
        let total = Instant::now();
        let step = self.log.len() + 1;
        let step_seed = mix_seed(self.config.seed, 1000 + step as u64);
        let base = self.arrived();
        let (edges, labels, rec) = match &self.model {
            None => self.vanilla_step(xb, step_seed)?,
            Some(model) => self.community_step(model, xb, step_seed)?,
        };
        let added = edges.len();
        self.graph = merge_edges(&self.graph, &edges, base + m)?;
        self.features = self.features.vstack(xb)?;
        self.communities.extend(labels);
        self.log.push(StepRecord {
            step,
            batch: m,
            nodes: base + m,
            edges_added: added,
            total_ms: ms(total),
            ..rec
        });
        Ok(())
    }

    fn vanilla_step(&self, xb: &FeatureMatrix<T>, seed: u64) -> Result<(EdgeList<T>, Vec<usize>, StepRecord)> {
        let base = self.arrived();
        let t = Instant::now();
        let all = self.features.vstack(xb)?;
        let edges = learn(self.config.learner_final, &self.config.learner_params(), &all, seed)?.filter(|e| e.v >= base);
        let rec = StepRecord {
            communities: 1,
            omega_mean: base as f64,
            omega_max: base,
            final_max: all.n(),
            final_total: all.n(),
            learn_ms: ms(t),
            ..empty_record()
        };
        Ok((edges, vec![0; xb.n()], rec))
    }

    fn community_step(&self, model: &ClusterModel<T>, xb: &FeatureMatrix<T>, seed: u64) -> Result<(EdgeList<T>, Vec<usize>, StepRecord)> {
        let t = Instant::now();
        let labels = model.infer_batch(xb)?;
        let clust_ms = ms(t);
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (b, &c) in labels.iter().enumerate() {
            groups.entry(c).or_default().push(b);
        }
        let members = self.members(model.k);
        let groups: Vec<(usize, Vec<usize>)> = groups.into_iter().collect();
        let results: Vec<CommunityResult<T>> = groups
            .par_iter()
            .map(|(c, inc)| self.community_update(&members[*c], xb, inc, mix_seed(seed, *c as u64)))
            .collect::<Result<_>>()?;
        let omega: Vec<usize> = results.iter().flat_map(|r| r.omega_sizes.iter().copied()).collect();
        let rec = StepRecord {
            communities: results.len(),
            omega_mean: omega.iter().sum::<usize>() as f64 / omega.len().max(1) as f64,
            omega_max: omega.iter().copied().max().unwrap_or(0),
            final_max: results.iter().map(|r| r.final_n).max().unwrap_or(0),
            final_total: results.iter().map(|r| r.final_n).sum(),
            fallbacks: results.iter().map(|r| r.fallbacks).sum(),
            clust_ms,
            coar_ms: results.iter().map(|r| r.coar_ms).sum(),
            learn_ms: results.iter().map(|r| r.learn_ms).sum(),
            ..empty_record()
        };
        // ascending community order keeps the merge deterministic
        let edges = EdgeList::max_union(results.into_iter().flat_map(|r| r.edges));
        Ok((edges, labels, rec))
    }

    /// Compares each incoming row's exact `knn_k` nearest members of
    /// `community` with the candidate set the coarse stage produces.
    pub fn neighborhood_check(&self, community: usize, incoming: &FeatureMatrix<T>, knn_k: usize, seed: u64) -> Result<ContainmentReport> {
        let members: Vec<usize> = (0..self.arrived()).filter(|&i| self.communities[i] == community).collect();
        if members.is_empty() {
            return Err(invalid("community", format!("community {community} has no members")));
        }
        if incoming.d() != self.features.d() {
            return Err(Error::DimensionMismatch {
                expected: self.features.d(),
                found: incoming.d(),
            });
        }
        let cand = self.candidates(&members, incoming, seed)?;
        let mut fractions = Vec::with_capacity(incoming.n());
        let mut bound_products = Vec::new();
        for (i, x) in incoming.rows().enumerate() {
            let exact = nearest_in(&self.features, &members, x, knn_k);
            let omega = &cand.omega[i];
            let hit = exact.iter().filter(|u| omega.binary_search(u).is_ok()).count();
            fractions.push(hit as f64 / exact.len() as f64);
            if let Some(r) = cand.r_bin {
                let mut prod = 1.0;
                for &u in &exact {
                    prod *= collision_bound(sq_dist(self.features.row(u), x).sqrt().as_f64(), r)?;
                }
                bound_products.push(prod);
            }
        }
        let mean = fractions.iter().sum::<f64>() / fractions.len().max(1) as f64;
        let full_rate = fractions.iter().filter(|&&f| f == 1.0).count() as f64 / fractions.len().max(1) as f64;
        Ok(ContainmentReport {
            mean,
            full_rate,
            bound_product_mean: (!bound_products.is_empty())
                .then(|| bound_products.iter().sum::<f64>() / bound_products.len() as f64),
            omega_mean: cand.omega.iter().map(Vec::len).sum::<usize>() as f64 / cand.omega.len().max(1) as f64,
            fractions,
        })
    }
}

struct CommunityResult<T> {
    edges: Vec<(usize, usize, T)>,
    omega_sizes: Vec<usize>,
    final_n: usize,
    fallbacks: usize,
    coar_ms: f64,
    learn_ms: f64,
}

fn empty_record() -> StepRecord {
    StepRecord {
        step: 0,
        batch: 0,
        nodes: 0,
        communities: 0,
        omega_mean: 0.0,
        omega_max: 0,
        final_max: 0,
        final_total: 0,
        fallbacks: 0,
        edges_added: 0,
        clust_ms: 0.0,
        coar_ms: 0.0,
        learn_ms: 0.0,
        total_ms: 0.0,
    }
}

/// Per-row containment of the exact neighbourhood in the candidate set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentReport {
    /// `|N_k ∩ ω| / |N_k|` per incoming row.
    pub fractions: Vec<f64>,
    pub mean: f64,
    /// Share of rows whose neighbourhood is fully contained.
    pub full_rate: f64,
    /// Mean over rows of the product of single-hash collision bounds at the
    /// exact neighbour distances; absent for identity coarsening.
    pub bound_product_mean: Option<f64>,
    pub omega_mean: f64,
}

/// Summary of a full run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub static_nodes: usize,
    pub init_clust_ms: f64,
    pub init_learn_ms: f64,
    pub steps: Vec<StepRecord>,
    pub total_ms: f64,
    /// Original row index of each node in arrival order.
    #[serde(skip)]
    pub arrival_order: Vec<usize>,
}

impl RunReport {
    pub fn clust_ms(&self) -> f64 {
        self.init_clust_ms + self.steps.iter().map(|s| s.clust_ms).sum::<f64>()
    }

    pub fn coar_ms(&self) -> f64 {
        self.steps.iter().map(|s| s.coar_ms).sum()
    }

    pub fn learn_ms(&self) -> f64 {
        self.init_learn_ms + self.steps.iter().map(|s| s.learn_ms).sum::<f64>()
    }

    /// One row per step: `step,nodes,batch,omega_mean,omega_max,final_max,clust_ms,coar_ms,learn_ms,total_ms`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,nodes,batch,omega_mean,omega_max,final_max,clust_ms,coar_ms,learn_ms,total_ms\n");
        for r in &self.steps {
            s.push_str(&format!(
                "{},{},{},{:.3},{},{},{:.3},{:.3},{:.3},{:.3}\n",
                r.step, r.nodes, r.batch, r.omega_mean, r.omega_max, r.final_max, r.clust_ms, r.coar_ms, r.learn_ms, r.total_ms
            ));
        }
        s
    }
}

/// Runs the whole expansion over the rows of `x` and returns the final graph
/// indexed by original row.
///
/// Without `g0` the static rows are a random `r_split` share. With `g0` the
/// static rows are the first `g0.n()` rows and the rest arrive in random order.
pub fn run<T: Scalar>(x: &FeatureMatrix<T>, g0: Option<Graph<T>>, cfg: &PipelineConfig) -> Result<(Graph<T>, RunReport)> {
    run_with_model(x, g0, None, cfg).map(|(g, r, _)| (g, r))
}

/// [`run`] with an optional pretrained community model; also returns the model used.
pub fn run_with_model<T: Scalar>(
    x: &FeatureMatrix<T>,
    g0: Option<Graph<T>>,
    model: Option<ClusterModel<T>>,
    cfg: &PipelineConfig,
) -> Result<(Graph<T>, RunReport, Option<ClusterModel<T>>)> {
    cfg.validate()?;
    let total = Instant::now();
    let split = match &g0 {
        None => split_expanding(x.n(), cfg.r_split, cfg.t, cfg.seed)?,
        Some(g) => {
            if g.n() == 0 || g.n() > x.n() {
                return Err(invalid("g0", format!("initial graph has {} nodes for {} rows", g.n(), x.n())));
            }
            let mut rest: Vec<usize> = (g.n()..x.n()).collect();
            rest.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
            Split {
                static_idx: (0..g.n()).collect(),
                batches: chunk_near_equal(&rest, cfg.t),
            }
        }
    };
    let x0 = x.select_rows(&split.static_idx);
    let mut state = init_inner(&x0, g0, model, cfg)?;
    for b in &split.batches {
        state.step(&x.select_rows(b))?;
    }
    let order: Vec<usize> = split.static_idx.iter().chain(split.batches.iter().flatten()).copied().collect();
    let graph = build_graph(x.n(), &state.graph.edges().relabel(&order))?;
    let report = RunReport {
        static_nodes: split.static_idx.len(),
        init_clust_ms: state.init_clust_ms,
        init_learn_ms: state.init_learn_ms,
        steps: state.log,
        total_ms: ms(total),
        arrival_order: order,
    };
    Ok((graph, report, state.model))
}
