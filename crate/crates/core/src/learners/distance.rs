use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::graph::FeatureMatrix;
use crate::scalar::{sq_dist, Scalar};

/// Dense symmetric matrix of squared Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T = f64> {
    n: usize,
    z: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Wraps a row-major `n × n` matrix after checking symmetry, sign and
    /// diagonal.
    pub fn new(n: usize, z: Vec<T>) -> Result<Self> {
        if z.len() != n * n {
            return Err(invalid("z", format!("expected {} entries, got {}", n * n, z.len())));
        }
        for i in 0..n {
            if z[i * n + i] != T::zero() {
                return Err(invalid("z", format!("nonzero diagonal at {i}")));
            }
            for j in i + 1..n {
                let v = z[i * n + j];
                if !(v >= T::zero()) || !v.is_finite() || v != z[j * n + i] {
                    return Err(invalid("z", format!("entry ({i}, {j}) not symmetric, finite and nonnegative")));
                }
            }
        }
        Ok(Self { n, z })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.z[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.z
    }

    /// Upper-triangle entries in `(0,1), (0,2), …, (n−2,n−1)` order.
    pub fn upper(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            out.extend_from_slice(&self.z[i * self.n + i + 1..(i + 1) * self.n]);
        }
        out
    }

    /// Largest entry.
    pub fn max(&self) -> T {
        self.z.iter().copied().fold(T::zero(), T::max)
    }
}

/// All pairwise squared distances, each unordered pair computed once.
pub fn pairwise_distances<T: Scalar>(x: &FeatureMatrix<T>) -> Result<DistanceMatrix<T>> {
    let n = x.n();
    if n < 2 {
        return Err(invalid("X", "need at least two rows"));
    }
    let upper: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| sq_dist(x.row(i), x.row(j))).collect())
        .collect();
    let mut z = vec![T::zero(); n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            z[i * n + j] = v;
            z[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix { n, z })
}
