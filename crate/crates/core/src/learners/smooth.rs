use serde::{Deserialize, Serialize};

use crate::coarsening::LshFamily;
use crate::error::{invalid, Error, Result};
use crate::graph::{EdgeList, FeatureMatrix};
use crate::scalar::{sq_dist, Scalar};

use super::distance::DistanceMatrix;
use super::knn::{learn_ann, Kernel};
use super::MIN_EDGE_WEIGHT;

/// Parameters shared by the smoothness-based learners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothnessConfig {
    /// Degree term weight α.
    pub alpha: f64,
    /// Frobenius term weight β (log and large models).
    pub beta: f64,
    pub max_iter: usize,
    /// Stopping tolerance on the solver residual.
    pub tol: f64,
    /// Step size; 0 picks one from the operator norm.
    pub step: f64,
}

impl Default for SmoothnessConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            max_iter: 20_000,
            tol: 1e-5,
            step: 0.0,
        }
    }
}

impl SmoothnessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(invalid("alpha", "must be positive"));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta", "must be nonnegative"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "must be positive"));
        }
        if !(self.step >= 0.0) {
            return Err(invalid("step", "must be nonnegative"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "need at least one iteration"));
        }
        Ok(())
    }
}

/// Iteration count, final residual and objective value per iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverReport {
    pub iterations: usize,
    pub residual: f64,
    pub objective_trace: Vec<f64>,
}

/// Weights over a fixed set of node pairs, in f64.
#[derive(Debug, Clone, PartialEq)]
pub struct PairWeights {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
    pub w: Vec<f64>,
}

impl PairWeights {
    /// Node degrees `S w`.
    pub fn degrees(&self) -> Vec<f64> {
        degrees(self.n, &self.pairs, &self.w)
    }

    /// Entries above the sparsity cutoff as an edge list.
    pub fn to_edges<T: Scalar>(&self) -> Result<EdgeList<T>> {
        EdgeList::new(
            self.pairs
                .iter()
                .zip(&self.w)
                .filter(|(_, &w)| w > MIN_EDGE_WEIGHT)
                .map(|(&(u, v), &w)| (u, v, T::of(w))),
        )
    }
}

fn degrees(n: usize, pairs: &[(usize, usize)], w: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for (&(u, v), &x) in pairs.iter().zip(w) {
        d[u] += x;
        d[v] += x;
    }
    d
}

// Sᵀ y: per pair y_u + y_v.
fn incidence_t(pairs: &[(usize, usize)], y: &[f64]) -> Vec<f64> {
    pairs.iter().map(|&(u, v)| y[u] + y[v]).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut p = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            p.push((i, j));
        }
    }
    p
}

/// `2 zᵀw + α‖Sw‖² + 2α‖w‖²` on upper-triangle weights.
pub fn l2_objective(n: usize, pairs: &[(usize, usize)], z: &[f64], w: &[f64], alpha: f64) -> f64 {
    let deg = degrees(n, pairs, w);
    2.0 * z.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
        + alpha * deg.iter().map(|d| d * d).sum::<f64>()
        + 2.0 * alpha * w.iter().map(|x| x * x).sum::<f64>()
}

/// `2 zᵀw − α Σ log(Sw) + β‖w‖²` on upper-triangle weights; +∞ when some
/// degree is zero.
pub fn log_objective(n: usize, pairs: &[(usize, usize)], z: &[f64], w: &[f64], alpha: f64, beta: f64) -> f64 {
    let deg = degrees(n, pairs, w);
    if deg.iter().any(|&d| d <= 0.0) {
        return f64::INFINITY;
    }
    2.0 * z.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() - alpha * deg.iter().map(|d| d.ln()).sum::<f64>()
        + beta * w.iter().map(|x| x * x).sum::<f64>()
}

/// Euclidean projection onto `{w ≥ 0, Σw = total}`.
pub fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - total) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

// Largest eigenvalue of SᵀS by power iteration.
fn incidence_norm_sq(n: usize, pairs: &[(usize, usize)]) -> f64 {
    let m = pairs.len();
    if m == 0 {
        return 0.0;
    }
    // deterministic start with distinct entries so it is not orthogonal to the top vector
    let mut x: Vec<f64> = (0..m).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
    let mut lambda = 0.0;
    for _ in 0..100 {
        let nx = norm(&x);
        for v in x.iter_mut() {
            *v /= nx;
        }
        let y = incidence_t(pairs, &degrees(n, pairs, &x));
        let next = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        x = y;
        if (next - lambda).abs() <= 1e-9 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

/// l2 model on all pairs: minimizes `2 zᵀw + α‖Sw‖² + 2α‖w‖²` over
/// `w ≥ 0, Σw = n/2` by projected gradient.
pub fn learn_l2_report(z: &DistanceMatrix<impl Scalar>, cfg: &SmoothnessConfig) -> Result<(PairWeights, SolverReport)> {
    cfg.validate()?;
    let n = z.n();
    let pairs = all_pairs(n);
    let zu: Vec<f64> = z.upper().iter().map(|v| v.as_f64()).collect();
    let total = n as f64 / 2.0;
    let alpha = cfg.alpha;
    // power iteration underestimates; pad so the step stays below 1/L
    let lip = 2.0 * alpha * incidence_norm_sq(n, &pairs) * 1.05 + 4.0 * alpha;
    let step = if cfg.step > 0.0 { cfg.step } else { 1.0 / lip };
    let m = pairs.len();
    let mut w = vec![total / m as f64; m];
    let mut trace = vec![l2_objective(n, &pairs, &zu, &w, alpha)];
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let deg = degrees(n, &pairs, &w);
        let sd = incidence_t(&pairs, &deg);
        let trial: Vec<f64> = (0..m)
            .map(|e| w[e] - step * (2.0 * zu[e] + 2.0 * alpha * sd[e] + 4.0 * alpha * w[e]))
            .collect();
        let next = project_simplex(&trial, total);
        residual = next.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / step;
        w = next;
        trace.push(l2_objective(n, &pairs, &zu, &w, alpha));
        if residual < cfg.tol {
            return Ok((
                PairWeights { n, pairs, w },
                SolverReport {
                    iterations: it,
                    residual,
                    objective_trace: trace,
                },
            ));
        }
    }
    Err(Error::NotConverged {
        what: "l2 model",
        iterations: cfg.max_iter,
        residual,
    })
}

/// [`learn_l2_report`] returning only the edges above the sparsity cutoff.
pub fn learn_l2<T: Scalar>(z: &DistanceMatrix<T>, cfg: &SmoothnessConfig) -> Result<EdgeList<T>> {
    learn_l2_report(z, cfg)?.0.to_edges()
}

/// Log model on an explicit support: minimizes
/// `2 zᵀw − α Σ log(Sw) + β‖w‖²` over `w ≥ 0` by forward–backward–forward
/// primal–dual splitting. Every node must touch at least one support pair.
pub fn learn_log_support(
    n: usize,
    pairs: Vec<(usize, usize)>,
    z: Vec<f64>,
    cfg: &SmoothnessConfig,
) -> Result<(PairWeights, SolverReport)> {
    cfg.validate()?;
    if z.len() != pairs.len() {
        return Err(Error::DimensionMismatch {
            expected: pairs.len(),
            found: z.len(),
        });
    }
    let mut touch = vec![0usize; n];
    for &(u, v) in &pairs {
        if u >= n || v >= n || u == v {
            return Err(invalid("pairs", format!("bad pair ({u}, {v}) for n = {n}")));
        }
        touch[u] += 1;
        touch[v] += 1;
    }
    if let Some(i) = touch.iter().position(|&c| c == 0) {
        return Err(Error::Infeasible(format!("node {i} has no candidate pair; log-degree barrier is unbounded")));
    }
    let (alpha, beta) = (cfg.alpha, cfg.beta);
    let max_deg = *touch.iter().max().unwrap() as f64;
    let mu = 2.0 * beta + (2.0 * max_deg).sqrt();
    let gamma = if cfg.step > 0.0 { cfg.step } else { 0.5 / mu };
    let m = pairs.len();
    let mut w = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut trace = Vec::new();
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let stv = incidence_t(&pairs, &v);
        let y_p: Vec<f64> = (0..m).map(|e| w[e] - gamma * (2.0 * beta * w[e] + stv[e])).collect();
        let sw = degrees(n, &pairs, &w);
        let y_d: Vec<f64> = (0..n).map(|i| v[i] + gamma * sw[i]).collect();
        let p_p: Vec<f64> = (0..m).map(|e| (y_p[e] - 2.0 * gamma * z[e]).max(0.0)).collect();
        let p_d: Vec<f64> = y_d.iter().map(|&y| (y - (y * y + 4.0 * alpha * gamma).sqrt()) / 2.0).collect();
        let stp = incidence_t(&pairs, &p_d);
        let sp = degrees(n, &pairs, &p_p);
        let mut dw = 0.0;
        let mut dv = 0.0;
        for e in 0..m {
            let q = p_p[e] - gamma * (2.0 * beta * p_p[e] + stp[e]);
            let next = w[e] - y_p[e] + q;
            dw += (next - w[e]) * (next - w[e]);
            w[e] = next;
        }
        for i in 0..n {
            let q = p_d[i] + gamma * sp[i];
            let next = v[i] - y_d[i] + q;
            dv += (next - v[i]) * (next - v[i]);
            v[i] = next;
        }
        // objective at the nonnegative prox point; the forward iterate may dip below zero
        trace.push(log_objective(n, &pairs, &z, &p_p, alpha, beta));
        let nw = norm(&w);
        let nv = norm(&v);
        residual = if nw > 0.0 && nv > 0.0 {
            (dw.sqrt() / nw).max(dv.sqrt() / nv)
        } else {
            f64::INFINITY
        };
        if residual < cfg.tol {
            // the last forward step can leave tiny negative entries
            for x in w.iter_mut() {
                *x = x.max(0.0);
            }
            return Ok((
                PairWeights { n, pairs, w },
                SolverReport {
                    iterations: it,
                    residual,
                    objective_trace: trace,
                },
            ));
        }
    }
    Err(Error::NotConverged {
        what: "log model",
        iterations: cfg.max_iter,
        residual,
    })
}

/// Log model on all pairs.
pub fn learn_log_report(z: &DistanceMatrix<impl Scalar>, cfg: &SmoothnessConfig) -> Result<(PairWeights, SolverReport)> {
    let n = z.n();
    let zu = z.upper().iter().map(|v| v.as_f64()).collect();
    learn_log_support(n, all_pairs(n), zu, cfg)
}

/// [`learn_log_report`] returning only the edges above the sparsity cutoff.
pub fn learn_log<T: Scalar>(z: &DistanceMatrix<T>, cfg: &SmoothnessConfig) -> Result<EdgeList<T>> {
    learn_log_report(z, cfg)?.0.to_edges()
}

/// Log model restricted to the pairs of an approximate `k_cand`-nearest-
/// neighbour graph.
pub fn learn_large_report<T: Scalar>(
    x: &FeatureMatrix<T>,
    k_cand: usize,
    cfg: &SmoothnessConfig,
    fam: &LshFamily<T>,
) -> Result<(PairWeights, SolverReport)> {
    let support = learn_ann(x, k_cand, Kernel::Unit, fam)?;
    let pairs: Vec<(usize, usize)> = support.iter().map(|e| (e.u, e.v)).collect();
    let z = pairs.iter().map(|&(u, v)| sq_dist(x.row(u), x.row(v)).as_f64()).collect();
    learn_log_support(x.n(), pairs, z, cfg)
}

/// [`learn_large_report`] returning only the edges above the sparsity cutoff.
pub fn learn_large<T: Scalar>(x: &FeatureMatrix<T>, k_cand: usize, cfg: &SmoothnessConfig, fam: &LshFamily<T>) -> Result<EdgeList<T>> {
    learn_large_report(x, k_cand, cfg, fam)?.0.to_edges()
}

/// Natural residual `max_e |w_e − max(0, w_e − g_e)|` of the log model's
/// optimality conditions, `g` the objective gradient.
pub fn log_kkt_residual(pw: &PairWeights, z: &[f64], alpha: f64, beta: f64) -> f64 {
    let deg = pw.degrees();
    let inv: Vec<f64> = deg.iter().map(|d| 1.0 / d).collect();
    let sinv = incidence_t(&pw.pairs, &inv);
    pw.w.iter()
        .enumerate()
        .map(|(e, &w)| {
            let g = 2.0 * z[e] - alpha * sinv[e] + 2.0 * beta * w;
            (w - (w - g).max(0.0)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::pairwise_distances;
    use crate::synth::{gen_blobs, FeatureModel};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_z(n: usize, seed: u64) -> DistanceMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        pairwise_distances(&FeatureMatrix::from_rows(&rows).unwrap()).unwrap()
    }

    fn tight() -> SmoothnessConfig {
        SmoothnessConfig {
            tol: 1e-11,
            max_iter: 2_000_000,
            ..SmoothnessConfig::default()
        }
    }

    // Independent dense oracle: full symmetric W, gradient of
    // ‖W∘Z‖ + α‖W1‖² + α‖W‖²_F taken entrywise, projection by bisection on
    // the shift.
    fn l2_dense_oracle(z: &DistanceMatrix<f64>, alpha: f64, iters: usize) -> f64 {
        let n = z.n();
        let mut w = vec![vec![0.0; n]; n];
        let init = 1.0 / (n - 1) as f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    w[i][j] = init;
                }
            }
        }
        let step = 1.0 / (8.0 * alpha * n as f64);
        for _ in 0..iters {
            let deg: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
            let mut upd = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    // d/dw_ij of the objective written on the full matrix, both (i,j) and (j,i)
                    let g = 2.0 * z.get(i, j) + 2.0 * alpha * (deg[i] + deg[j]) + 4.0 * alpha * w[i][j];
                    upd.push(w[i][j] - step * g);
                }
            }
            // bisection for θ with Σ max(u − θ, 0) = n/2
            let (mut lo, mut hi) = (-1e6, 1e6);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let s: f64 = upd.iter().map(|u| (u - mid).max(0.0)).sum();
                if s > n as f64 / 2.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let theta = 0.5 * (lo + hi);
            let mut e = 0;
            for i in 0..n {
                for j in i + 1..n {
                    let v = (upd[e] - theta).max(0.0);
                    w[i][j] = v;
                    w[j][i] = v;
                    e += 1;
                }
            }
        }
        let mut obj = 0.0;
        let deg: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
        for i in 0..n {
            obj += alpha * deg[i] * deg[i];
            for j in 0..n {
                obj += w[i][j] * z.get(i, j) + alpha * w[i][j] * w[i][j];
            }
        }
        obj
    }

    #[test]
    fn l2_matches_dense_oracle() {
        for seed in 0..5 {
            let z = random_z(4, seed);
            let (pw, _) = learn_l2_report(&z, &tight()).unwrap();
            let got = l2_objective(4, &pw.pairs, &z.upper(), &pw.w, 1.0);
            let want = l2_dense_oracle(&z, 1.0, 1_000_000);
            assert!((got - want).abs() < 1e-6, "seed {seed}: {got} vs {want}");
        }
    }

    #[test]
    fn l2_equal_distances_split_evenly() {
        let z = DistanceMatrix::new(3, vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let (pw, rep) = learn_l2_report(&z, &tight()).unwrap();
        for &w in &pw.w {
            assert!((w - 0.5).abs() < 1e-9);
        }
        assert!((pw.w.iter().sum::<f64>() - 1.5).abs() < 1e-9);
        for t in rep.objective_trace.windows(2) {
            assert!(t[1] <= t[0] + 1e-12);
        }
    }

    #[test]
    fn l2_mass_on_zero_distance_pair() {
        let big = 100.0;
        let z = DistanceMatrix::new(3, vec![0.0, 0.0, big, 0.0, 0.0, big, big, big, 0.0]).unwrap();
        let cfg = SmoothnessConfig {
            alpha: 0.01,
            ..tight()
        };
        let (pw, _) = learn_l2_report(&z, &cfg).unwrap();
        let zu = z.upper();
        // grid search over {w ≥ 0, Σw = 1.5} at resolution 1e-3
        let steps = 1500;
        let h = 1.5 / steps as f64;
        let mut best = (f64::INFINITY, [0.0; 3]);
        for a in 0..=steps {
            for b in 0..=steps - a {
                let w = [a as f64 * h, b as f64 * h, 1.5 - (a + b) as f64 * h];
                let obj = l2_objective(3, &pw.pairs, &zu, &w, 0.01);
                if obj < best.0 {
                    best = (obj, w);
                }
            }
        }
        let got = l2_objective(3, &pw.pairs, &zu, &pw.w, 0.01);
        assert!(got <= best.0 + 1e-9);
        for e in 0..3 {
            assert!((pw.w[e] - best.1[e]).abs() <= 2e-3, "{:?} vs {:?}", pw.w, best.1);
        }
        assert!(pw.w[0] > 1.49);
    }

    fn bisect_log_n2(z: f64, alpha: f64, beta: f64) -> f64 {
        // derivative of 2zw − 2α log w + βw² is increasing in w
        let g = |w: f64| 2.0 * z - 2.0 * alpha / w + 2.0 * beta * w;
        let (mut lo, mut hi) = (1e-12, 1e6);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn log_n2_matches_root() {
        for (z12, alpha, beta) in [(1.0, 1.0, 1.0), (4.0, 0.5, 2.0), (0.1, 2.0, 0.3), (2.5, 1.0, 0.0)] {
            let z = DistanceMatrix::new(2, vec![0.0, z12, z12, 0.0]).unwrap();
            let cfg = SmoothnessConfig {
                alpha,
                beta,
                ..tight()
            };
            let (pw, _) = learn_log_report(&z, &cfg).unwrap();
            let want = bisect_log_n2(z12, alpha, beta);
            assert!((pw.w[0] - want).abs() < 1e-8, "{} vs {want}", pw.w[0]);
            // closed form as a golden value: positive root of βw² + zw − α = 0
            let closed = if beta > 0.0 {
                (-z12 + (z12 * z12 + 4.0 * alpha * beta).sqrt()) / (2.0 * beta)
            } else {
                alpha / z12
            };
            assert!((closed - want).abs() < 1e-9);
        }
    }

    #[test]
    fn log_scale_invariance_without_beta() {
        let z = random_z(6, 3);
        let cfg = SmoothnessConfig {
            beta: 0.0,
            ..tight()
        };
        let (a, _) = learn_log_report(&z, &cfg).unwrap();
        let gamma = 3.0;
        let zs = DistanceMatrix::new(6, z.as_slice().iter().map(|v| v * gamma).collect()).unwrap();
        let (b, _) = learn_log_report(
            &zs,
            &SmoothnessConfig {
                alpha: gamma,
                ..cfg
            },
        )
        .unwrap();
        for (x, y) in a.w.iter().zip(&b.w) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn log_kkt_and_comparison_with_l2_support() {
        for seed in 0..5 {
            let z = random_z(5, 10 + seed);
            let zu = z.upper();
            let cfg = tight();
            let (pw, rep) = learn_log_report(&z, &cfg).unwrap();
            assert!(log_kkt_residual(&pw, &zu, cfg.alpha, cfg.beta) < 1e-6);
            assert!(pw.degrees().iter().all(|&d| d > 0.0));
            let (l2, _) = learn_l2_report(&z, &cfg).unwrap();
            let f_log = log_objective(5, &pw.pairs, &zu, &pw.w, cfg.alpha, cfg.beta);
            let f_l2 = log_objective(5, &l2.pairs, &zu, &l2.w, cfg.alpha, cfg.beta);
            assert!(f_log <= f_l2);
            // windowed descent once the barrier is finite
            let t: Vec<f64> = rep.objective_trace.iter().copied().skip_while(|v| !v.is_finite()).collect();
            for i in 50..t.len().saturating_sub(50) {
                assert!(t[i + 50] <= t[i] + 1e-9 * t[i].abs().max(1.0), "window at {i}");
            }
        }
    }

    #[test]
    fn large_with_full_support_equals_log() {
        let z = random_z(6, 8);
        let cfg = tight();
        let (full, _) = learn_log_report(&z, &cfg).unwrap();
        let zu = z.upper();
        let (sup, _) = learn_log_support(6, full.pairs.clone(), zu, &cfg).unwrap();
        assert_eq!(full, sup);
        assert!(matches!(
            learn_log_support(3, vec![(0, 1)], vec![1.0], &cfg),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn large_on_blobs_is_faster_and_close() {
        let ds = gen_blobs::<f64>(200, 2, &FeatureModel::new(8, 3.0), 2).unwrap();
        let cfg = SmoothnessConfig {
            tol: 1e-6,
            ..SmoothnessConfig::default()
        };
        let z = pairwise_distances(&ds.features).unwrap();
        let t0 = std::time::Instant::now();
        let (full, _) = learn_log_report(&z, &cfg).unwrap();
        let t_log = t0.elapsed();
        let fam = super::super::knn::ann_family(&ds.features, 8, 0.5, 1).unwrap();
        let t0 = std::time::Instant::now();
        let (sparse, _) = learn_large_report(&ds.features, 20, &cfg, &fam).unwrap();
        let t_large = t0.elapsed();
        assert!(t_large < t_log, "{t_large:?} vs {t_log:?}");
        let zu = z.upper();
        let f_full = log_objective(200, &full.pairs, &zu, &full.w, cfg.alpha, cfg.beta);
        let zs: Vec<f64> = sparse.pairs.iter().map(|&(u, v)| z.get(u, v)).collect();
        let f_sparse = log_objective(200, &sparse.pairs, &zs, &sparse.w, cfg.alpha, cfg.beta);
        assert!((f_sparse - f_full).abs() <= 0.05 * f_full.abs(), "{f_sparse} vs {f_full}");
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5], 1.5);
        assert_eq!(p, vec![0.5, 0.5, 0.5]);
        let p = project_simplex(&[3.0, 0.0, -1.0], 1.0);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.2, 0.2], 1.0);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn l2_total_weight_and_monotone(n in 2usize..8, seed in 0u64..1000) {
            let z = random_z(n, seed);
            let (pw, rep) = learn_l2_report(&z, &SmoothnessConfig { tol: 1e-8, ..SmoothnessConfig::default() }).unwrap();
            prop_assert!((pw.w.iter().sum::<f64>() - n as f64 / 2.0).abs() < 1e-6);
            prop_assert!(pw.w.iter().all(|&w| w >= 0.0));
            for t in rep.objective_trace.windows(2) {
                prop_assert!(t[1] <= t[0] + 1e-10 * t[0].abs().max(1.0));
            }
        }

        #[test]
        fn log_degrees_positive(n in 2usize..8, seed in 0u64..1000) {
            let z = random_z(n, seed);
            let cfg = SmoothnessConfig { tol: 1e-8, ..SmoothnessConfig::default() };
            let (pw, _) = learn_log_report(&z, &cfg).unwrap();
            prop_assert!(pw.degrees().iter().all(|&d| d > 0.0));
        }
    }
}
