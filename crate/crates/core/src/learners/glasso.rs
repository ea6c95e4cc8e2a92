use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{EdgeList, FeatureMatrix};
use crate::scalar::Scalar;

use super::cov::node_covariance;

/// Largest node count accepted by [`learn_glasso`].
pub const GLASSO_MAX_N: usize = 2000;
/// Ridge added to the covariance diagonal before estimation.
pub const GLASSO_RIDGE: f64 = 1e-3;
/// Off-diagonal precision entries at or below this magnitude are not edges.
pub const GLASSO_EDGE_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlassoConfig {
    /// ℓ1 penalty ρ.
    pub rho: f64,
    /// Outer sweep cap.
    pub max_iter: usize,
    /// Duality-gap tolerance.
    pub tol: f64,
}

impl Default for GlassoConfig {
    fn default() -> Self {
        Self {
            rho: 0.1,
            max_iter: 200,
            tol: 1e-4,
        }
    }
}

impl GlassoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(invalid("rho", "must be nonnegative"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "need at least one sweep"));
        }
        Ok(())
    }
}

/// Precision estimate and convergence data.
#[derive(Debug, Clone, PartialEq)]
pub struct GlassoFit {
    pub n: usize,
    /// Row-major precision matrix Θ.
    pub theta: Vec<f64>,
    /// Row-major covariance estimate W = Θ⁻¹.
    pub w: Vec<f64>,
    pub sweeps: usize,
    /// `tr(SΘ) − n + ρ‖Θ‖₁` at exit.
    pub gap: f64,
}

fn soft(x: f64, t: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}

/// Graphical lasso by block coordinate descent on a row-major `n × n`
/// covariance `s`, penalizing the diagonal as well (W starts at S + ρI).
pub fn glasso_from_cov(s: &[f64], n: usize, cfg: &GlassoConfig) -> Result<GlassoFit> {
    cfg.validate()?;
    if s.len() != n * n || n == 0 {
        return Err(invalid("S", "covariance must be a nonempty square matrix"));
    }
    if (0..n).any(|i| !(s[i * n + i] > 0.0)) {
        return Err(Error::Degenerate("covariance has a nonpositive diagonal entry".into()));
    }
    let rho = cfg.rho;
    let mut w = s.to_vec();
    for i in 0..n {
        w[i * n + i] += rho;
    }
    // column j of `beta` holds the lasso coefficients for node j (entry j unused)
    let mut beta = vec![0.0; n * n];
    let mut theta = vec![0.0; n * n];
    let mut gap = f64::INFINITY;
    let mut wb = vec![0.0; n];
    for sweep in 1..=cfg.max_iter {
        for j in 0..n {
            // wb = W11 β over the indices ≠ j
            for a in 0..n {
                wb[a] = 0.0;
            }
            for b in (0..n).filter(|&b| b != j) {
                let bj = beta[b * n + j];
                if bj != 0.0 {
                    for a in 0..n {
                        wb[a] += w[a * n + b] * bj;
                    }
                }
            }
            for _ in 0..1000 {
                let mut max_delta = 0.0f64;
                for a in (0..n).filter(|&a| a != j) {
                    let waa = w[a * n + a];
                    let old = beta[a * n + j];
                    let r = s[a * n + j] - (wb[a] - waa * old);
                    let new = soft(r, rho) / waa;
                    if new != old {
                        let delta = new - old;
                        for c in 0..n {
                            wb[c] += w[c * n + a] * delta;
                        }
                        beta[a * n + j] = new;
                        max_delta = max_delta.max(delta.abs() * waa);
                    }
                }
                if max_delta < 1e-12 {
                    break;
                }
            }
            for a in (0..n).filter(|&a| a != j) {
                w[a * n + j] = wb[a];
                w[j * n + a] = wb[a];
            }
        }
        for j in 0..n {
            let mut dot = 0.0;
            for a in (0..n).filter(|&a| a != j) {
                dot += w[a * n + j] * beta[a * n + j];
            }
            let tjj = 1.0 / (w[j * n + j] - dot);
            theta[j * n + j] = tjj;
            for a in (0..n).filter(|&a| a != j) {
                theta[a * n + j] = -beta[a * n + j] * tjj;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (theta[i * n + j] + theta[j * n + i]);
                theta[i * n + j] = v;
                theta[j * n + i] = v;
            }
        }
        let tr: f64 = (0..n * n).map(|e| s[e] * theta[e]).sum();
        let l1: f64 = theta.iter().map(|t| t.abs()).sum();
        gap = tr - n as f64 + rho * l1;
        if gap.abs() < cfg.tol {
            return Ok(GlassoFit {
                n,
                theta,
                w,
                sweeps: sweep,
                gap,
            });
        }
    }
    Err(Error::NotConverged {
        what: "graphical lasso",
        iterations: cfg.max_iter,
        residual: gap,
    })
}

/// Sparse precision of the node covariance (plus ridge); edges are the
/// off-diagonal entries with `|Θ_ij| > 1e-6`, weighted by `|Θ_ij|`.
pub fn learn_glasso<T: Scalar>(x: &FeatureMatrix<T>, cfg: &GlassoConfig) -> Result<EdgeList<T>> {
    let n = x.n();
    if n > GLASSO_MAX_N {
        return Err(invalid("X", format!("graphical lasso limited to {GLASSO_MAX_N} nodes, got {n}")));
    }
    let mut s = node_covariance(x)?;
    for i in 0..n {
        s[i * n + i] += GLASSO_RIDGE;
    }
    let fit = glasso_from_cov(&s, n, cfg)?;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let t = fit.theta[i * n + j].abs();
            if t > GLASSO_EDGE_CUTOFF {
                edges.push((i, j, T::of(t)));
            }
        }
    }
    EdgeList::new(edges)
}
