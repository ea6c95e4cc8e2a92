//! Clustering and structure quality metrics, plus the collision-probability
//! table used to check the neighbourhood-preservation bound.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coarsening::{collision_bound, collision_exact};
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

fn check_labels<T: Scalar>(g: &Graph<T>, labels: &[usize]) -> Result<()> {
    if labels.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: labels.len(),
        });
    }
    Ok(())
}

// Per-community (internal CSR weight, volume, cut).
fn community_sums<T: Scalar>(g: &Graph<T>, labels: &[usize]) -> BTreeMap<usize, (T, T, T)> {
    let mut out: BTreeMap<usize, (T, T, T)> = BTreeMap::new();
    for u in 0..g.n() {
        let entry = out.entry(labels[u]).or_insert((T::zero(), T::zero(), T::zero()));
        for (v, w) in g.neighbors(u) {
            entry.1 += w;
            if labels[v] == labels[u] {
                entry.0 += w;
            } else {
                entry.2 += w;
            }
        }
    }
    out
}

/// Newman modularity `Q = Σ_c [ in_c / 2m − (vol_c / 2m)² ]` on the weighted
/// adjacency.
pub fn modularity<T: Scalar>(g: &Graph<T>, labels: &[usize]) -> Result<T> {
    check_labels(g, labels)?;
    let two_m = g.csr_weight_sum();
    if two_m <= T::zero() {
        return Err(Error::EmptyGraph);
    }
    let q = community_sums(g, labels)
        .values()
        .map(|&(inner, vol, _)| inner / two_m - (vol / two_m).powi(2))
        .sum();
    Ok(q)
}

/// Volume-weighted mean over communities of `cut(c) / min(vol(c), vol(V∖c))`.
pub fn conductance<T: Scalar>(g: &Graph<T>, labels: &[usize]) -> Result<T> {
    check_labels(g, labels)?;
    let sums = community_sums(g, labels);
    if sums.len() < 2 {
        return Err(invalid("labels", "conductance needs at least two communities"));
    }
    let total = g.csr_weight_sum();
    let mut acc = T::zero();
    for (&c, &(_, vol, cut)) in &sums {
        let denom = vol.min(total - vol);
        if denom <= T::zero() {
            return Err(Error::Degenerate(format!("community {c} has zero volume")));
        }
        acc += vol * (cut / denom);
    }
    Ok(acc / total)
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn dense_relabel(a: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let out = a
        .iter()
        .map(|x| {
            let next = map.len();
            *map.entry(*x).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Normalized mutual information `I(a;b) / sqrt(H(a) H(b))`, natural logs.
///
/// When either side has zero entropy the result is 1 if the two partitions
/// coincide and 0 otherwise.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(invalid("labels", "must be nonempty"));
    }
    let n = a.len() as f64;
    let (a, ka) = dense_relabel(a);
    let (b, kb) = dense_relabel(b);
    let mut joint = vec![0usize; ka * kb];
    let mut ca = vec![0usize; ka];
    let mut cb = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(&b) {
        joint[x * kb + y] += 1;
        ca[x] += 1;
        cb[y] += 1;
    }
    let ha = entropy(ca.iter().copied(), n);
    let hb = entropy(cb.iter().copied(), n);
    if ha == 0.0 || hb == 0.0 {
        // a single-block partition only matches another single block
        return Ok(if ha == 0.0 && hb == 0.0 { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c > 0 {
                let pxy = c as f64 / n;
                mi += pxy * (pxy * n * n / (ca[x] as f64 * cb[y] as f64)).ln();
            }
        }
    }
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// Precision/recall/F1 of a learned edge set against a reference edge set.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EdgeMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_edges: usize,
    pub learned_edges: usize,
    pub common: usize,
}

/// Compares unweighted undirected edge sets.
pub fn edge_prf<T: Scalar>(learned: &Graph<T>, truth: &Graph<T>) -> Result<EdgeMetrics> {
    if learned.n() != truth.n() {
        return Err(Error::DimensionMismatch {
            expected: truth.n(),
            found: learned.n(),
        });
    }
    let truth_set: HashSet<(usize, usize)> = truth.edges().iter().map(|e| (e.u, e.v)).collect();
    let learned_edges = learned.num_edges();
    let common = learned
        .edges()
        .iter()
        .filter(|e| truth_set.contains(&(e.u, e.v)))
        .count();
    let precision = if learned_edges > 0 {
        common as f64 / learned_edges as f64
    } else {
        0.0
    };
    let recall = if truth_set.is_empty() {
        0.0
    } else {
        common as f64 / truth_set.len() as f64
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(EdgeMetrics {
        precision,
        recall,
        f1,
        true_edges: truth_set.len(),
        learned_edges,
        common,
    })
}

/// One row of the collision-probability table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoundRow {
    /// Distance between the two points.
    pub c: f64,
    pub ratio: f64,
    pub exact: f64,
    pub bound: f64,
    pub empirical: f64,
    /// Monte-Carlo standard error of `empirical` around `exact`.
    pub sigma: f64,
}

/// Empirical single-hash collision frequency of two points at distance `c`
/// in `dim` dimensions, over `trials` independent draws of `(w, b)`.
pub fn empirical_collision(c: f64, r_bin: f64, dim: usize, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let mut x = vec![0.0; dim];
    let mut dir = vec![0.0; dim];
    for _ in 0..trials {
        // random pair at distance c with a random direction
        let mut norm = 0.0;
        for j in 0..dim {
            x[j] = rng.random_range(-1.0..1.0);
            let z: f64 = StandardNormal.sample(&mut rng);
            dir[j] = z;
            norm += z * z;
        }
        let norm = norm.sqrt();
        let b = rng.random::<f64>() * r_bin;
        let mut px = b;
        let mut py = b;
        for j in 0..dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            px += z * x[j];
            py += z * (x[j] + c * dir[j] / norm);
        }
        if (px / r_bin).floor() == (py / r_bin).floor() {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

/// Exact (quadrature), closed-form bound and Monte-Carlo collision
/// probabilities for each `c / r_bin` ratio in `ratios`.
pub fn bound_table(r_bin: f64, ratios: &[f64], trials: usize, seed: u64) -> Result<Vec<BoundRow>> {
    if ratios.iter().any(|&x| !(x > 0.0)) {
        return Err(invalid("c_grid", "distances must be positive"));
    }
    ratios
        .iter()
        .enumerate()
        .map(|(i, &ratio)| {
            let c = ratio * r_bin;
            let exact = collision_exact(c, r_bin)?;
            let bound = collision_bound(c, r_bin)?;
            let empirical = empirical_collision(c, r_bin, 8, trials, crate::mix_seed(seed, i as u64));
            Ok(BoundRow {
                c,
                ratio,
                exact,
                bound,
                empirical,
                sigma: (exact * (1.0 - exact) / trials as f64).sqrt(),
            })
        })
        .collect()
}

/// Renders rows as CSV with header `c_over_r,exact,bound,empirical`.
pub fn bound_table_csv(rows: &[BoundRow]) -> String {
    let mut s = String::from("c_over_r,exact,bound,empirical\n");
    for r in rows {
        s.push_str(&format!("{},{:.9},{:.9},{:.6}\n", r.ratio, r.exact, r.bound, r.empirical));
    }
    s
}
