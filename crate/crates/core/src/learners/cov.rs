use crate::error::{invalid, Result};
use crate::graph::{EdgeList, FeatureMatrix};
use crate::scalar::Scalar;

use super::MIN_EDGE_WEIGHT;

/// Node-by-node sample covariance `(1/(d−1)) X_c X_cᵀ` with each row centred
/// on its own mean; row-major `n × n`, computed in f64.
pub fn node_covariance<T: Scalar>(x: &FeatureMatrix<T>) -> Result<Vec<f64>> {
    let (n, d) = (x.n(), x.d());
    if d < 2 {
        return Err(invalid("X", "covariance needs at least two feature columns"));
    }
    let centred: Vec<Vec<f64>> = x
        .rows()
        .map(|r| {
            let mean = r.iter().map(|v| v.as_f64()).sum::<f64>() / d as f64;
            r.iter().map(|v| v.as_f64() - mean).collect()
        })
        .collect();
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum::<f64>() / (d - 1) as f64;
            s[i * n + j] = v;
            s[j * n + i] = v;
        }
    }
    Ok(s)
}

/// Keeps the `⌈density · n(n−1)/2⌉` node pairs of largest absolute covariance,
/// weighted by that absolute value (floored at the minimum edge weight).
pub fn learn_cov<T: Scalar>(x: &FeatureMatrix<T>, density: f64) -> Result<EdgeList<T>> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(invalid("density", "must lie in (0, 1]"));
    }
    let n = x.n();
    let s = node_covariance(x)?;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((s[i * n + j].abs(), i, j));
        }
    }
    let keep = ((density * pairs.len() as f64).ceil() as usize).min(pairs.len());
    // stable sort keeps (i, j) order among equal magnitudes
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    pairs.truncate(keep);
    EdgeList::new(pairs.into_iter().map(|(w, i, j)| (i, j, T::of(w.max(MIN_EDGE_WEIGHT)))))
}
