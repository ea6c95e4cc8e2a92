use rayon::prelude::*;

use crate::coarsening::LshFamily;
use crate::error::{invalid, Error, Result};
use crate::graph::{EdgeList, FeatureMatrix};
use crate::scalar::{sq_dist, Scalar};

use super::MIN_EDGE_WEIGHT;

/// Edge weighting for the nearest-neighbour learners.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Kernel {
    /// Gaussian kernel with σ = mean distance to the k-th neighbour.
    #[default]
    Auto,
    /// Gaussian kernel `exp(−d²/σ²)` with the given σ.
    Sigma(f64),
    /// Every edge has weight 1.
    Unit,
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(invalid("k", format!("need 1 ≤ k < n, got k = {k}, n = {n}")));
    }
    Ok(())
}

// k nearest of `i` among `cands` as (squared distance, index), ties by index.
fn top_k<T: Scalar>(x: &FeatureMatrix<T>, i: usize, cands: impl Iterator<Item = usize>, k: usize) -> Vec<(T, usize)> {
    let mut d: Vec<(T, usize)> = cands.filter(|&j| j != i).map(|j| (sq_dist(x.row(i), x.row(j)), j)).collect();
    let cmp = |a: &(T, usize), b: &(T, usize)| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1));
    if d.len() > k {
        d.select_nth_unstable_by(k - 1, cmp);
        d.truncate(k);
    }
    d.sort_unstable_by(cmp);
    d
}

fn weight_and_symmetrize<T: Scalar>(neigh: &[Vec<(T, usize)>], k: usize, kernel: Kernel) -> EdgeList<T> {
    let sigma2 = match kernel {
        Kernel::Unit => None,
        Kernel::Sigma(s) => Some(T::of(s * s)),
        Kernel::Auto => {
            let kth: Vec<T> = neigh.iter().filter_map(|row| row.get(k - 1).map(|p| p.0.sqrt())).collect();
            let mean = kth.iter().copied().sum::<T>() / T::of_usize(kth.len().max(1));
            Some(mean * mean)
        }
    };
    let min_w = T::of(MIN_EDGE_WEIGHT);
    let weight = |d2: T| match sigma2 {
        None => T::one(),
        Some(s2) if s2 > T::zero() => (-d2 / s2).exp().max(min_w),
        // all neighbours coincide: the kernel is flat
        Some(_) => T::one(),
    };
    EdgeList::max_union(
        neigh
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(d2, j)| (i, j, weight(d2)))),
    )
}

/// Exact k-nearest-neighbour graph, union-symmetrized with the larger weight.
pub fn learn_knn<T: Scalar>(x: &FeatureMatrix<T>, k: usize, kernel: Kernel) -> Result<EdgeList<T>> {
    let n = x.n();
    check_k(k, n)?;
    let neigh: Vec<Vec<(T, usize)>> = (0..n).into_par_iter().map(|i| top_k(x, i, 0..n, k)).collect();
    Ok(weight_and_symmetrize(&neigh, k, kernel))
}

// Per hash: rows sorted by (bucket, row) and each row's bucket range in that order.
struct BucketIndex {
    order: Vec<usize>,
    range: Vec<(usize, usize)>,
}

fn bucket_index<T: Scalar>(x: &FeatureMatrix<T>, fam: &LshFamily<T>) -> Result<Vec<BucketIndex>> {
    if x.n() > 0 && x.d() != fam.d() {
        return Err(Error::DimensionMismatch {
            expected: fam.d(),
            found: x.d(),
        });
    }
    let n = x.n();
    Ok((0..fam.h())
        .map(|j| {
            let keys: Vec<i64> = (0..n).into_par_iter().map(|i| fam.bucket(j, x.row(i))).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_unstable_by_key(|&i| (keys[i], i));
            let mut range = vec![(0, 0); n];
            let mut lo = 0;
            while lo < n {
                let mut hi = lo + 1;
                while hi < n && keys[order[hi]] == keys[order[lo]] {
                    hi += 1;
                }
                for &i in &order[lo..hi] {
                    range[i] = (lo, hi);
                }
                lo = hi;
            }
            BucketIndex { order, range }
        })
        .collect())
}

// Distinct bucket-mates of `i` over all hashes; `seen` is scratch of length n.
fn for_each_candidate(index: &[BucketIndex], i: usize, seen: &mut [usize], mut f: impl FnMut(usize)) {
    for b in index {
        let (lo, hi) = b.range[i];
        for &j in &b.order[lo..hi] {
            if j != i && seen[j] != i {
                seen[j] = i;
                f(j);
            }
        }
    }
}

/// Candidate lists: nodes sharing a bucket with `i` under at least one hash.
pub fn ann_candidates<T: Scalar>(x: &FeatureMatrix<T>, fam: &LshFamily<T>) -> Result<Vec<Vec<usize>>> {
    let n = x.n();
    let index = bucket_index(x, fam)?;
    Ok((0..n)
        .into_par_iter()
        .map_init(
            || vec![usize::MAX; n],
            |seen, i| {
                let mut c = Vec::new();
                for_each_candidate(&index, i, seen, |j| c.push(j));
                c.sort_unstable();
                c
            },
        )
        .collect())
}

/// k-nearest neighbours searched only among LSH bucket-mates; nodes with
/// fewer than `k` candidates fall back to an exact search.
pub fn learn_ann<T: Scalar>(x: &FeatureMatrix<T>, k: usize, kernel: Kernel, fam: &LshFamily<T>) -> Result<EdgeList<T>> {
    let n = x.n();
    check_k(k, n)?;
    let index = bucket_index(x, fam)?;
    let neigh: Vec<Vec<(T, usize)>> = (0..n)
        .into_par_iter()
        .map_init(
            || vec![usize::MAX; n],
            |seen, i| {
                let mut cands = Vec::new();
                for_each_candidate(&index, i, seen, |j| cands.push(j));
                if cands.len() < k {
                    top_k(x, i, 0..n, k)
                } else {
                    top_k(x, i, cands.into_iter(), k)
                }
            },
        )
        .collect();
    Ok(weight_and_symmetrize(&neigh, k, kernel))
}

/// Median distance over (at most) 256 sampled rows; 1 when undefined.
pub fn median_distance<T: Scalar>(x: &FeatureMatrix<T>, seed: u64) -> T {
    crate::coarsening::default_bin_width(x, seed) * T::of(4.0)
}

/// Hash family with `h` projections and bin width `width_frac` times the
/// median pairwise distance.
pub fn ann_family<T: Scalar>(x: &FeatureMatrix<T>, h: usize, width_frac: f64, seed: u64) -> Result<LshFamily<T>> {
    if !(width_frac > 0.0) || !width_frac.is_finite() {
        return Err(invalid("width_frac", "must be positive"));
    }
    LshFamily::new(x.d(), h, median_distance(x, seed) * T::of(width_frac), seed)
}
