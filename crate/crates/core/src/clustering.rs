//! Community model trained once on the static graph, plus the consistency
//! measurements used to check it.
//!
//! Both k-means and spectral clustering end with centroids in raw feature
//! space, so incoming nodes are routed by nearest centroid without touching
//! the graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{FeatureMatrix, Graph};
use crate::linalg::{block_lanczos_largest, sym_eigen, LanczosOptions};
use crate::metrics;
use crate::scalar::{sq_dist, Scalar};
use crate::synth::{gen_dcsbm, DcsbmParams};

/// Graphs up to this many nodes use the dense eigensolver.
pub const DENSE_EIGEN_MAX: usize = 512;

/// Default Lloyd iteration cap.
pub const DEFAULT_MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMethod {
    Kmeans,
    Spectral,
}

impl ClusterMethod {
    pub(crate) fn tag(self) -> u32 {
        match self {
            ClusterMethod::Kmeans => 0,
            ClusterMethod::Spectral => 1,
        }
    }

    pub(crate) fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(ClusterMethod::Kmeans),
            1 => Some(ClusterMethod::Spectral),
            _ => None,
        }
    }
}

/// Trained community model.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel<T = f64> {
    pub method: ClusterMethod,
    pub k: usize,
    /// `k × d` centroids in raw feature space.
    pub centroids: FeatureMatrix<T>,
    /// Community of each training node; empty for a model loaded from disk.
    pub train_assignments: Vec<usize>,
    /// Number of times an empty cluster was reseeded during training.
    pub reseeds: usize,
}

impl<T: Scalar> ClusterModel<T> {
    /// Model holding only centroids (as loaded from disk).
    pub fn from_centroids(method: ClusterMethod, centroids: FeatureMatrix<T>) -> Result<Self> {
        if centroids.n() == 0 {
            return Err(invalid("centroids", "need at least one centroid"));
        }
        Ok(Self {
            method,
            k: centroids.n(),
            centroids,
            train_assignments: Vec::new(),
            reseeds: 0,
        })
    }

    pub fn d(&self) -> usize {
        self.centroids.d()
    }

    /// Nearest centroid; ties go to the smallest id.
    pub fn infer(&self, x: &[T]) -> Result<usize> {
        if x.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                found: x.len(),
            });
        }
        Ok(nearest(&self.centroids, x).0)
    }

    /// [`ClusterModel::infer`] for every row.
    pub fn infer_batch(&self, x: &FeatureMatrix<T>) -> Result<Vec<usize>> {
        if x.n() > 0 && x.d() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                found: x.d(),
            });
        }
        Ok((0..x.n())
            .into_par_iter()
            .map(|i| nearest(&self.centroids, x.row(i)).0)
            .collect())
    }
}

/// Free-function form of [`ClusterModel::infer`].
pub fn infer_community<T: Scalar>(m: &ClusterModel<T>, x: &[T]) -> Result<usize> {
    m.infer(x)
}

fn nearest<T: Scalar>(c: &FeatureMatrix<T>, x: &[T]) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (j, row) in c.rows().enumerate() {
        let d = sq_dist(row, x);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn means<T: Scalar>(x: &FeatureMatrix<T>, labels: &[usize], k: usize) -> FeatureMatrix<T> {
    let mut c = FeatureMatrix::zeros(k, x.d());
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (a, v) in c.row_mut(l).iter_mut().zip(x.row(i)) {
            *a += *v;
        }
    }
    for (l, &m) in counts.iter().enumerate() {
        if m > 0 {
            let m = T::of_usize(m);
            for a in c.row_mut(l) {
                *a /= m;
            }
        }
    }
    c
}

fn kmeans_pp<T: Scalar>(x: &FeatureMatrix<T>, k: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix<T> {
    let n = x.n();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(chosen[0])).as_f64()).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            if d2[pick] == 0.0 {
                // rounding ran past the end; take the last positive weight
                pick = d2.iter().rposition(|&w| w > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            // all remaining points coincide with a centre
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(pick);
        for (i, v) in d2.iter_mut().enumerate() {
            *v = v.min(sq_dist(x.row(i), x.row(pick)).as_f64());
        }
    }
    x.select_rows(&chosen)
}

/// Lloyd's algorithm from k-means++ seeds. Stops after `max_iter` rounds or
/// when the objective changes by less than 1e-7 relative.
pub fn kmeans_fit<T: Scalar>(x: &FeatureMatrix<T>, k: usize, max_iter: usize, seed: u64) -> Result<ClusterModel<T>> {
    let n = x.n();
    if k == 0 || k > n {
        return Err(invalid("k", format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    if max_iter == 0 {
        return Err(invalid("max_iter", "need at least one iteration"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp(x, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut prev = f64::INFINITY;
    let mut reseeds = 0;
    for _ in 0..max_iter {
        let assigned: Vec<(usize, T)> = (0..n).into_par_iter().map(|i| nearest(&centroids, x.row(i))).collect();
        let mut cost: Vec<f64> = Vec::with_capacity(n);
        for (i, (l, d)) in assigned.into_iter().enumerate() {
            labels[i] = l;
            cost.push(d.as_f64());
        }
        let objective: f64 = cost.iter().sum();
        debug_assert!(
            objective <= prev * (1.0 + 1e-9) + 1e-12,
            "k-means objective rose from {prev} to {objective}"
        );
        reseeds += repair_empty(&mut labels, &mut cost, k);
        centroids = means(x, &labels, k);
        if prev.is_finite() && (prev - objective).abs() <= 1e-7 * prev.max(f64::MIN_POSITIVE) {
            break;
        }
        prev = objective;
    }
    if reseeds > 0 {
        log::warn!("k-means reseeded {reseeds} empty cluster(s)");
    }
    Ok(ClusterModel {
        method: ClusterMethod::Kmeans,
        k,
        centroids,
        train_assignments: labels,
        reseeds,
    })
}

// Moves the point farthest from its centre (among clusters with more than one
// member) into each empty cluster.
fn repair_empty(labels: &mut [usize], cost: &mut [f64], k: usize) -> usize {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    let mut fixed = 0;
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let mut far = None;
        for i in 0..labels.len() {
            if counts[labels[i]] > 1 && far.is_none_or(|f: usize| cost[i] > cost[f]) {
                far = Some(i);
            }
        }
        let i = far.expect("k ≤ n leaves a cluster with two members");
        counts[labels[i]] -= 1;
        counts[c] = 1;
        labels[i] = c;
        cost[i] = 0.0;
        fixed += 1;
    }
    fixed
}

/// Row-normalized embedding from the `k` smallest eigenvectors of
/// `I − D^{-1/2} A D^{-1/2}`; isolated nodes get a zero row in the normalized
/// adjacency. Returned as an `n × k` matrix.
pub fn spectral_embedding<T: Scalar>(g: &Graph<T>, k: usize, seed: u64) -> Result<FeatureMatrix<T>> {
    let n = g.n();
    if k == 0 || k > n {
        return Err(invalid("k", format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    let inv_sqrt: Vec<T> = (0..n)
        .map(|i| {
            let s = g.strength(i);
            if s > T::zero() {
                T::one() / s.sqrt()
            } else {
                T::zero()
            }
        })
        .collect();
    // largest eigenpairs of I + D^{-1/2} A D^{-1/2} are the smallest of L_sym
    let mut emb = FeatureMatrix::zeros(n, k);
    if n <= DENSE_EIGEN_MAX {
        let mut a = vec![T::zero(); n * n];
        for i in 0..n {
            a[i * n + i] = T::one();
            for (j, w) in g.neighbors(i) {
                a[i * n + j] += w * inv_sqrt[i] * inv_sqrt[j];
            }
        }
        let eig = sym_eigen(&a, n)?;
        for t in 0..k {
            let col = n - 1 - t;
            for i in 0..n {
                emb.row_mut(i)[t] = eig.vectors[i * n + col];
            }
        }
    } else {
        let apply = |v: &[T], out: &mut [T]| {
            for i in 0..n {
                let mut acc = v[i];
                for (j, w) in g.neighbors(i) {
                    acc += w * inv_sqrt[i] * inv_sqrt[j] * v[j];
                }
                out[i] = acc;
            }
        };
        let opts = LanczosOptions {
            seed,
            ..LanczosOptions::default()
        };
        let (_, vecs) = block_lanczos_largest(n, k, apply, opts)?;
        for (t, v) in vecs.iter().enumerate() {
            for i in 0..n {
                emb.row_mut(i)[t] = v[i];
            }
        }
    }
    for i in 0..n {
        let row = emb.row_mut(i);
        let norm = row.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if norm > T::zero() {
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
    }
    Ok(emb)
}

/// Spectral clustering of `g`; centroids are then recomputed from `x`.
pub fn spectral_fit<T: Scalar>(g: &Graph<T>, x: &FeatureMatrix<T>, k: usize, seed: u64) -> Result<ClusterModel<T>> {
    if g.n() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: x.n(),
        });
    }
    let emb = spectral_embedding(g, k, crate::mix_seed(seed, 1))?;
    let km = kmeans_fit(&emb, k, DEFAULT_MAX_ITER, crate::mix_seed(seed, 2))?;
    Ok(ClusterModel {
        method: ClusterMethod::Spectral,
        k,
        centroids: means(x, &km.train_assignments, k),
        train_assignments: km.train_assignments,
        reseeds: km.reseeds,
    })
}

/// Minimum-cost perfect matching on a square cost matrix (row-major),
/// returning the column assigned to each row.
pub fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n);
    // potentials formulation, 1-based with a virtual column 0
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

fn best_permutation_brute(agree: &[f64], m: usize) -> f64 {
    fn rec(agree: &[f64], m: usize, row: usize, used: &mut Vec<bool>) -> f64 {
        if row == m {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for c in 0..m {
            if !used[c] {
                used[c] = true;
                best = best.max(agree[row * m + c] + rec(agree, m, row + 1, used));
                used[c] = false;
            }
        }
        best
    }
    rec(agree, m, 0, &mut vec![false; m])
}

/// Fraction of nodes whose predicted label disagrees with the truth under the
/// best relabeling of the predictions: exhaustive over permutations when at
/// most 8 labels occur, Hungarian matching otherwise.
pub fn misclassified_fraction(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let m = pred.iter().chain(truth).max().unwrap() + 1;
    let mut agree = vec![0.0; m * m];
    for (&p, &t) in pred.iter().zip(truth) {
        agree[p * m + t] += 1.0;
    }
    let matched = if m <= 8 {
        best_permutation_brute(&agree, m)
    } else {
        let cost: Vec<f64> = agree.iter().map(|a| -a).collect();
        hungarian(&cost, m).iter().enumerate().map(|(r, &c)| agree[r * m + c]).sum()
    };
    Ok(1.0 - matched / pred.len() as f64)
}

/// One point of a consistency curve, averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub n: usize,
    /// Realized mean degree.
    pub lambda: f64,
    pub misclassified_fraction: f64,
    pub seeds: usize,
}

/// Spectral clustering of DC-SBM samples at each grid point, averaged over
/// `seeds` replicates (seed `p.seed + s`).
pub fn consistency_experiment(grid: &[DcsbmParams], seeds: usize) -> Result<Vec<ConsistencyReport>> {
    if seeds == 0 {
        return Err(invalid("seeds", "need at least one replicate"));
    }
    grid.iter()
        .map(|p| {
            let runs: Vec<(f64, f64)> = (0..seeds as u64)
                .into_par_iter()
                .map(|s| {
                    let mut q = p.clone();
                    q.seed = p.seed.wrapping_add(s);
                    let sample = gen_dcsbm::<f64>(&q)?;
                    let ds = sample.dataset;
                    let g = ds.graph.expect("DC-SBM samples carry a graph");
                    let lambda = 2.0 * g.total_weight() / g.n() as f64;
                    let model = spectral_fit(&g, &ds.features, p.k, q.seed)?;
                    Ok((lambda, misclassified_fraction(&model.train_assignments, &ds.labels)?))
                })
                .collect::<Result<_>>()?;
            let m = runs.len() as f64;
            Ok(ConsistencyReport {
                n: p.n,
                lambda: runs.iter().map(|r| r.0).sum::<f64>() / m,
                misclassified_fraction: runs.iter().map(|r| r.1).sum::<f64>() / m,
                seeds,
            })
        })
        .collect()
}

/// NMI between a model's training assignment and reference labels.
pub fn assignment_nmi<T: Scalar>(m: &ClusterModel<T>, labels: &[usize]) -> Result<f64> {
    metrics::nmi(&m.train_assignments, labels)
}
