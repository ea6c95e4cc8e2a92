//! Runtime scaling harness: times the pipeline or a one-shot learner over a
//! grid of node counts and fits the log-log slope of total time against n.
//!
//! Runs are single-threaded so that the fitted exponent reflects work, not
//! core count. Each grid point gets one discarded warm-up run followed by
//! `repeats` timed runs; the run with the median total is reported.

use std::time::Instant;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph::FeatureMatrix;
use crate::learners::{learn, LearnerKind, LearnerParams};
use crate::pipeline::{run, PipelineConfig};
use crate::scalar::Scalar;

/// What gets timed.
#[derive(Debug, Clone)]
pub enum BenchTarget {
    /// The full expanding pipeline.
    Pipeline(PipelineConfig),
    /// One learner call on all rows at once.
    Vanilla {
        learner: LearnerKind,
        params: LearnerParams,
        seed: u64,
    },
}

/// Timings at one grid point, in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub config: String,
    pub n: usize,
    pub clust_ms: f64,
    pub coar_ms: f64,
    pub learn_ms: f64,
    pub total_ms: f64,
    /// Largest node set handed to the final learner.
    pub peak_final: usize,
}

/// Records over the grid plus the fitted slope (absent with fewer than two points).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingResult {
    pub records: Vec<BenchRecord>,
    pub slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(1e-9).ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

fn time_once<T: Scalar>(name: &str, target: &BenchTarget, x: &FeatureMatrix<T>) -> Result<BenchRecord> {
    let t = Instant::now();
    let mut rec = BenchRecord {
        config: name.to_string(),
        n: x.n(),
        clust_ms: 0.0,
        coar_ms: 0.0,
        learn_ms: 0.0,
        total_ms: 0.0,
        peak_final: 0,
    };
    match target {
        BenchTarget::Pipeline(cfg) => {
            let (_, report) = run(x, None, cfg)?;
            rec.clust_ms = report.clust_ms();
            rec.coar_ms = report.coar_ms();
            rec.learn_ms = report.learn_ms();
            rec.peak_final = report.steps.iter().map(|s| s.final_max).max().unwrap_or(0).max(report.static_nodes);
        }
        BenchTarget::Vanilla { learner, params, seed } => {
            learn(*learner, params, x, *seed)?;
            rec.learn_ms = t.elapsed().as_secs_f64() * 1e3;
            rec.peak_final = x.n();
        }
    }
    rec.total_ms = t.elapsed().as_secs_f64() * 1e3;
    Ok(rec)
}

/// Times `target` on `generator(n)` for each `n` in `n_grid` on a single
/// worker thread.
pub fn scaling_run<T: Scalar>(
    name: &str,
    generator: impl Fn(usize) -> Result<FeatureMatrix<T>> + Sync,
    n_grid: &[usize],
    target: &BenchTarget,
    repeats: usize,
) -> Result<ScalingResult> {
    if repeats < 3 {
        return Err(invalid("repeats", "need at least 3 timed runs"));
    }
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("n_grid", "must be nonempty and strictly increasing"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| invalid("threads", e.to_string()))?;
    pool.install(|| {
        let mut records = Vec::with_capacity(n_grid.len());
        for &n in n_grid {
            let x = generator(n)?;
            time_once(name, target, &x)?;
            let mut runs = (0..repeats)
                .map(|_| time_once(name, target, &x))
                .collect::<Result<Vec<_>>>()?;
            runs.sort_by(|a, b| a.total_ms.total_cmp(&b.total_ms));
            records.push(runs.swap_remove(repeats / 2));
        }
        let ns: Vec<f64> = records.iter().map(|r| r.n as f64).collect();
        let ts: Vec<f64> = records.iter().map(|r| r.total_ms).collect();
        Ok(ScalingResult {
            slope: loglog_slope(&ns, &ts),
            records,
        })
    })
}

/// CSV with header `config,n,clust_ms,coar_ms,learn_ms,total_ms,slope`; the
/// slope column repeats the fit on every row and is empty when absent.
pub fn to_csv(results: &[ScalingResult]) -> String {
    let mut s = String::from("config,n,clust_ms,coar_ms,learn_ms,total_ms,slope\n");
    for res in results {
        let slope = res.slope.map(|v| format!("{v:.4}")).unwrap_or_default();
        for r in &res.records {
            s.push_str(&format!(
                "{},{},{:.3},{:.3},{:.3},{:.3},{}\n",
                r.config, r.n, r.clust_ms, r.coar_ms, r.learn_ms, r.total_ms, slope
            ));
        }
    }
    s
}
