//! Random-projection coarsening of a community subgraph into supernodes, and
//! expansion of supernode links back into candidate node sets.
//!
//! Each node is hashed by `h` projections `⌊(w_j · x + b_j) / r⌋`; its
//! supernode is the most frequent of those `h` bucket values (smallest value
//! on ties). Supernode features are member means and coarse edge weights are
//! summed over member pairs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::graph::{build_graph, EdgeList, FeatureMatrix, Graph};
use crate::scalar::{dot, sq_dist, Scalar};

/// Default number of hash functions.
pub const DEFAULT_HASHES: usize = 5;

/// A family of `h` random projections with shared bin width.
#[derive(Debug, Clone, PartialEq)]
pub struct LshFamily<T = f64> {
    d: usize,
    h: usize,
    r_bin: T,
    /// `h × d` projection rows, i.i.d. standard normal.
    w: Vec<T>,
    /// Offsets in `[0, r_bin)`.
    b: Vec<T>,
    seed: u64,
}

impl<T: Scalar> LshFamily<T> {
    /// Samples `W ~ N(0, 1)` and `b ~ U[0, r_bin)` from `seed`.
    pub fn new(d: usize, h: usize, r_bin: T, seed: u64) -> Result<Self> {
        if !(r_bin > T::zero()) || !r_bin.is_finite() {
            return Err(invalid("r_bin", "bin width must be positive"));
        }
        if h == 0 {
            return Err(invalid("h", "need at least one hash function"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = (0..h * d)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                T::of(z)
            })
            .collect();
        let b = (0..h).map(|_| T::of(rng.random::<f64>()) * r_bin).collect();
        Ok(Self {
            d,
            h,
            r_bin,
            w,
            b,
            seed,
        })
    }

    /// Builds a family from explicit projections (`h × d`, row-major) and offsets.
    pub fn from_parts(d: usize, r_bin: T, w: Vec<T>, b: Vec<T>) -> Result<Self> {
        if !(r_bin > T::zero()) {
            return Err(invalid("r_bin", "bin width must be positive"));
        }
        if b.is_empty() || w.len() != b.len() * d {
            return Err(invalid("w", "projection matrix must be h × d with h = len(b)"));
        }
        Ok(Self {
            d,
            h: b.len(),
            r_bin,
            w,
            b,
            seed: 0,
        })
    }

    /// Same projections with a new bin width; offsets are rescaled so they stay
    /// uniform on `[0, r_bin)`.
    pub fn with_bin_width(mut self, r_bin: T) -> Result<Self> {
        if !(r_bin > T::zero()) || !r_bin.is_finite() {
            return Err(invalid("r_bin", "bin width must be positive"));
        }
        let scale = r_bin / self.r_bin;
        for b in &mut self.b {
            *b *= scale;
        }
        self.r_bin = r_bin;
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn r_bin(&self) -> T {
        self.r_bin
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `w_j · x + b_j`.
    #[inline]
    pub fn project(&self, j: usize, x: &[T]) -> T {
        dot(&self.w[j * self.d..(j + 1) * self.d], x) + self.b[j]
    }

    /// Integer bucket of `x` under hash `j`.
    #[inline]
    pub fn bucket(&self, j: usize, x: &[T]) -> i64 {
        (self.project(j, x) / self.r_bin).floor().to_i64().unwrap_or(i64::MAX)
    }

    fn check_dim(&self, x: &FeatureMatrix<T>) -> Result<()> {
        if x.n() > 0 && x.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: x.d(),
            });
        }
        Ok(())
    }
}

/// Median pairwise distance of (at most) 256 sampled rows, divided by 4.
/// Returns 1 when fewer than two rows exist or all sampled rows coincide.
pub fn default_bin_width<T: Scalar>(x: &FeatureMatrix<T>, seed: u64) -> T {
    let n = x.n();
    if n < 2 {
        return T::one();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if n > 256 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        idx.partial_shuffle(&mut rng, 256);
        idx.truncate(256);
    }
    let mut dists = Vec::with_capacity(idx.len() * (idx.len() - 1) / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            dists.push(sq_dist(x.row(i), x.row(j)).sqrt());
        }
    }
    let mid = dists.len() / 2;
    let (_, median, _) = dists.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    let r = *median / T::of(4.0);
    if r > T::zero() {
        r
    } else {
        T::one()
    }
}

// Most frequent value, smallest on ties. `vals` is clobbered.
fn max_occurrence(vals: &mut [i64]) -> i64 {
    vals.sort_unstable();
    let mut best = vals[0];
    let mut best_count = 0;
    let mut i = 0;
    while i < vals.len() {
        let mut j = i;
        while j < vals.len() && vals[j] == vals[i] {
            j += 1;
        }
        if j - i > best_count {
            best_count = j - i;
            best = vals[i];
        }
        i = j;
    }
    best
}

/// Supernode id per row, densified to `0..s` in first-occurrence order.
/// Returns `(ids, s)`.
pub fn lsh_bins<T: Scalar>(fam: &LshFamily<T>, x: &FeatureMatrix<T>) -> Result<(Vec<usize>, usize)> {
    fam.check_dim(x)?;
    let mut dense: BTreeMap<i64, usize> = BTreeMap::new();
    let mut ids = Vec::with_capacity(x.n());
    let mut vals = vec![0i64; fam.h];
    for row in x.rows() {
        for (j, v) in vals.iter_mut().enumerate() {
            *v = fam.bucket(j, row);
        }
        let key = max_occurrence(&mut vals);
        let next = dense.len();
        ids.push(*dense.entry(key).or_insert(next));
    }
    Ok((ids, dense.len()))
}

/// Partition of a community into supernodes with aggregated features and
/// adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Coarsening<T = f64> {
    pub node_to_super: Vec<usize>,
    pub super_count: usize,
    /// Mean member feature per supernode.
    pub super_features: FeatureMatrix<T>,
    /// Summed inter-supernode weights; intra-supernode edges are dropped.
    pub coarse_graph: Graph<T>,
    /// Sorted member ids per supernode.
    pub member_lists: Vec<Vec<usize>>,
    /// Total weight of the edges that fell inside a single supernode.
    pub dropped_self_loop_mass: T,
}

impl<T: Scalar> Coarsening<T> {
    /// Aggregates `g`/`x` under an explicit node → supernode assignment.
    pub fn from_assignment(g: &Graph<T>, x: &FeatureMatrix<T>, node_to_super: Vec<usize>, super_count: usize) -> Result<Self> {
        if g.n() != x.n() || node_to_super.len() != g.n() {
            return Err(Error::DimensionMismatch {
                expected: g.n(),
                found: x.n().min(node_to_super.len()),
            });
        }
        let mut member_lists = vec![Vec::new(); super_count];
        for (i, &s) in node_to_super.iter().enumerate() {
            if s >= super_count {
                return Err(invalid("node_to_super", format!("supernode {s} ≥ count {super_count}")));
            }
            member_lists[s].push(i);
        }
        let d = x.d();
        let mut feats = FeatureMatrix::zeros(super_count, d);
        for (s, members) in member_lists.iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            let row = feats.row_mut(s);
            for &i in members {
                for (acc, v) in row.iter_mut().zip(x.row(i)) {
                    *acc += *v;
                }
            }
            let m = T::of_usize(members.len());
            for acc in row.iter_mut() {
                *acc /= m;
            }
        }
        let mut dropped = T::zero();
        let mut pairs: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for u in 0..g.n() {
            for (v, w) in g.neighbors(u) {
                if u >= v {
                    continue;
                }
                let (a, b) = (node_to_super[u], node_to_super[v]);
                if a == b {
                    dropped += w;
                } else {
                    *pairs.entry((a.min(b), a.max(b))).or_insert(T::zero()) += w;
                }
            }
        }
        let coarse_graph = build_graph(super_count, &EdgeList::new(pairs.into_iter().map(|((a, b), w)| (a, b, w)))?)?;
        Ok(Self {
            node_to_super,
            super_count,
            super_features: feats,
            coarse_graph,
            member_lists,
            dropped_self_loop_mass: dropped,
        })
    }

    /// Every node its own supernode.
    pub fn identity(g: &Graph<T>, x: &FeatureMatrix<T>) -> Result<Self> {
        Self::from_assignment(g, x, (0..g.n()).collect(), g.n())
    }
}

/// Coarsens a community subgraph by LSH bins of its features.
pub fn coarsen<T: Scalar>(g: &Graph<T>, x: &FeatureMatrix<T>, fam: &LshFamily<T>) -> Result<Coarsening<T>> {
    if g.n() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: x.n(),
        });
    }
    let (ids, count) = lsh_bins(fam, x)?;
    Coarsening::from_assignment(g, x, ids, count)
}

/// For each incoming node, the sorted union of the member lists of the
/// supernodes it is linked to. An empty result signals that the caller needs
/// a fallback.
pub fn candidate_set<T: Scalar>(c: &Coarsening<T>, links: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    links
        .iter()
        .map(|supers| {
            let mut out = Vec::new();
            for &s in supers {
                let members = c.member_lists.get(s).ok_or_else(|| {
                    invalid("supernode", format!("unknown supernode {s} (count {})", c.super_count))
                })?;
                out.extend_from_slice(members);
            }
            out.sort_unstable();
            out.dedup();
            Ok(out)
        })
        .collect()
}

const FRAC_2_SQRT_2PI: f64 = 0.797_884_560_802_865_4;

/// Closed-form upper bound on the single-hash collision probability of two
/// points at distance `c`: `1 − (2/√(2π)) (c/r) (1 − e^{−r²/(2c²)})`, clamped
/// to `[0, 1]`.
pub fn collision_bound(c: f64, r_bin: f64) -> Result<f64> {
    if !(r_bin > 0.0) {
        return Err(invalid("r_bin", "bin width must be positive"));
    }
    if !(c >= 0.0) {
        return Err(invalid("c", "distance must be nonnegative"));
    }
    if c == 0.0 {
        return Ok(1.0);
    }
    let ratio = c / r_bin;
    let tail = -(-(r_bin * r_bin) / (2.0 * c * c)).exp_m1();
    Ok((1.0 - FRAC_2_SQRT_2PI * ratio * tail).clamp(0.0, 1.0))
}

/// Single-hash collision probability `∫₀^r (1/c) f₂(t/c) (1 − t/r) dt` with
/// `f₂(x) = (2/√(2π)) e^{−x²/2}`, by adaptive Simpson quadrature.
pub fn collision_exact(c: f64, r_bin: f64) -> Result<f64> {
    if !(r_bin > 0.0) {
        return Err(invalid("r_bin", "bin width must be positive"));
    }
    if !(c >= 0.0) {
        return Err(invalid("c", "distance must be nonnegative"));
    }
    if c == 0.0 {
        return Ok(1.0);
    }
    // substitute u = t / c: ∫₀^{r/c} f₂(u) (1 − u c / r) du
    let upper = r_bin / c;
    let scale = c / r_bin;
    let f = |u: f64| FRAC_2_SQRT_2PI * (-0.5 * u * u).exp() * (1.0 - u * scale);
    // the integrand is below 1e-300 past u = 40
    let hi = upper.min(40.0);
    let mut total = 0.0;
    let pieces = 64;
    let step = hi / pieces as f64;
    for i in 0..pieces {
        let a = i as f64 * step;
        let b = a + step;
        total += adaptive_simpson(&f, a, b, 1e-13 / pieces as f64, 40);
    }
    Ok(total.clamp(0.0, 1.0))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
