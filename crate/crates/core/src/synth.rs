//! Synthetic datasets: degree-corrected SBM, Watts–Strogatz small world,
//! controlled-heterophily graphs, random geometric and grid graphs, and
//! feature-only Gaussian blobs.
//!
//! Every generator is a pure function of its parameters and seed.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::graph::{build_graph, EdgeList, FeatureMatrix, Graph};
use crate::scalar::Scalar;

/// Class-conditional isotropic Gaussian features: class `c` has mean
/// `separation · e_(c mod d)` and covariance `noise² · I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureModel {
    pub d: usize,
    pub separation: f64,
    pub noise: f64,
}

impl Default for FeatureModel {
    fn default() -> Self {
        Self {
            d: 32,
            separation: 1.0,
            noise: 1.0,
        }
    }
}

impl FeatureModel {
    pub fn new(d: usize, separation: f64) -> Self {
        Self {
            d,
            separation,
            ..Self::default()
        }
    }

    pub fn sample<T: Scalar>(&self, labels: &[usize], rng: &mut impl Rng) -> FeatureMatrix<T> {
        let mut x = FeatureMatrix::zeros(labels.len(), self.d);
        for (i, &c) in labels.iter().enumerate() {
            let row = x.row_mut(i);
            for (j, v) in row.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(rng);
                let mean = if j == c % self.d { self.separation } else { 0.0 };
                *v = T::of(mean + self.noise * z);
            }
        }
        x
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("d", "feature dimension must be positive"));
        }
        if !(self.noise >= 0.0) || !self.separation.is_finite() {
            return Err(invalid("noise", "must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Features, labels and (optionally) a ground-truth graph.
#[derive(Debug, Clone)]
pub struct LabeledDataset<T = f64> {
    pub graph: Option<Graph<T>>,
    pub features: FeatureMatrix<T>,
    pub labels: Vec<usize>,
}

/// Degree-corrected stochastic block model parameters.
///
/// The edge probability between `i` and `j` is
/// `min(1, rho · θ_i · θ_j · P[c_i][c_j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DcsbmParams {
    pub n: usize,
    pub k: usize,
    /// Symmetric `k × k` base probabilities.
    pub p: Vec<Vec<f64>>,
    pub rho: f64,
    /// Discrete support of the degree parameter θ.
    pub theta_values: Vec<f64>,
    /// Joint distribution over (label, θ index), `k × theta_values.len()`.
    pub pi: Vec<Vec<f64>>,
    pub features: FeatureModel,
    pub seed: u64,
}

impl DcsbmParams {
    /// Balanced `k`-block model with `p_in` on the diagonal and `p_out` off it,
    /// `rho = 1` and θ uniform on `{0.75, 1.25}` independent of the label.
    pub fn planted(n: usize, k: usize, p_in: f64, p_out: f64, seed: u64) -> Self {
        let p = (0..k)
            .map(|a| (0..k).map(|b| if a == b { p_in } else { p_out }).collect())
            .collect();
        Self {
            n,
            k,
            p,
            rho: 1.0,
            theta_values: vec![0.75, 1.25],
            pi: vec![vec![0.5 / k as f64; 2]; k],
            features: FeatureModel::default(),
            seed,
        }
    }

    /// Same as [`planted`](Self::planted) but with θ ≡ 1.
    pub fn planted_uniform_degree(n: usize, k: usize, p_in: f64, p_out: f64, seed: u64) -> Self {
        Self {
            theta_values: vec![1.0],
            pi: vec![vec![1.0 / k as f64]; k],
            ..Self::planted(n, k, p_in, p_out, seed)
        }
    }

    /// Expected average degree λ of the generated graph.
    pub fn expected_degree(&self) -> f64 {
        let class_mass: Vec<f64> = self.pi.iter().map(|r| r.iter().sum()).collect();
        let mean_theta: Vec<f64> = self
            .pi
            .iter()
            .zip(&class_mass)
            .map(|(r, &m)| {
                if m == 0.0 {
                    0.0
                } else {
                    r.iter().zip(&self.theta_values).map(|(p, t)| p * t).sum::<f64>() / m
                }
            })
            .collect();
        let mut s = 0.0;
        for a in 0..self.k {
            for b in 0..self.k {
                s += class_mass[a] * class_mass[b] * mean_theta[a] * mean_theta[b] * self.p[a][b];
            }
        }
        (self.n as f64 - 1.0) * self.rho * s
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.p.len() != self.k || self.p.iter().any(|r| r.len() != self.k) {
            return Err(invalid("p", "must be a k × k matrix"));
        }
        for a in 0..self.k {
            for b in 0..self.k {
                let x = self.p[a][b];
                if !(0.0..=1.0).contains(&x) {
                    return Err(invalid("p", format!("entry ({a},{b}) = {x} outside [0,1]")));
                }
                if (x - self.p[b][a]).abs() > 1e-12 {
                    return Err(invalid("p", "must be symmetric"));
                }
            }
        }
        if !(self.rho >= 0.0) {
            return Err(invalid("rho", "must be nonnegative"));
        }
        if self.theta_values.is_empty() || self.theta_values.iter().any(|t| !(*t >= 0.0)) {
            return Err(invalid("theta_values", "must be a nonempty set of nonnegative values"));
        }
        if self.pi.len() != self.k
            || self.pi.iter().any(|r| r.len() != self.theta_values.len() || r.iter().any(|x| !(*x >= 0.0)))
        {
            return Err(invalid("pi", "must be k × |theta_values| and nonnegative"));
        }
        let total: f64 = self.pi.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("pi", format!("sums to {total}, expected 1")));
        }
        self.features.validate()
    }
}

/// Output of [`gen_dcsbm`].
#[derive(Debug, Clone)]
pub struct DcsbmSample<T = f64> {
    pub dataset: LabeledDataset<T>,
    pub theta: Vec<f64>,
    /// Pairs whose scaled probability exceeded 1 and was clipped.
    pub clipped_pairs: usize,
}

// Splits `n` into counts proportional to `weights` by largest remainder.
fn proportional_counts(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut rest = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

fn contiguous_labels(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(c, &m)| std::iter::repeat_n(c, m))
        .collect()
}

/// Samples a degree-corrected SBM graph with class-conditional features.
///
/// Labels occupy contiguous blocks sized by the class marginals of `pi`; θ is
/// drawn per node from `pi` conditioned on the label.
pub fn gen_dcsbm<T: Scalar>(p: &DcsbmParams) -> Result<DcsbmSample<T>> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let class_mass: Vec<f64> = p.pi.iter().map(|r| r.iter().sum()).collect();
    let labels = contiguous_labels(&proportional_counts(p.n, &class_mass));

    let theta: Vec<f64> = labels
        .iter()
        .map(|&c| {
            let row = &p.pi[c];
            let total: f64 = row.iter().sum();
            let mut u = rng.random::<f64>() * total;
            for (t, &w) in row.iter().enumerate() {
                if u < w {
                    return p.theta_values[t];
                }
                u -= w;
            }
            *p.theta_values.last().unwrap()
        })
        .collect();

    let mut clipped = 0usize;
    let mut edges = Vec::new();
    for i in 0..p.n {
        for j in (i + 1)..p.n {
            let raw = p.rho * theta[i] * theta[j] * p.p[labels[i]][labels[j]];
            let prob = if raw > 1.0 {
                clipped += 1;
                1.0
            } else {
                raw
            };
            if rng.random::<f64>() < prob {
                edges.push((i, j, T::one()));
            }
        }
    }
    if clipped > 0 {
        log::warn!("dc-sbm: {clipped} pair probabilities exceeded 1 and were clipped");
    }
    let graph = build_graph(p.n, &EdgeList::new(edges)?)?;
    let features = p.features.sample(&labels, &mut rng);
    Ok(DcsbmSample {
        dataset: LabeledDataset {
            graph: Some(graph),
            features,
            labels,
        },
        theta,
        clipped_pairs: clipped,
    })
}

/// Watts–Strogatz small world: a ring lattice where each node links to its
/// `k_ring / 2` neighbours on either side, then each lattice edge is rewired
/// with probability `p_rewire`. Labels are `classes` contiguous arcs of the ring.
pub fn gen_small_world<T: Scalar>(
    n: usize,
    k_ring: usize,
    p_rewire: f64,
    classes: usize,
    features: &FeatureModel,
    seed: u64,
) -> Result<LabeledDataset<T>> {
    if k_ring >= n {
        return Err(invalid("k_ring", format!("{k_ring} must be smaller than n = {n}")));
    }
    if !k_ring.is_multiple_of(2) {
        return Err(invalid("k_ring", "must be even"));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(invalid("p_rewire", "must lie in [0, 1]"));
    }
    if classes == 0 || classes > n {
        return Err(invalid("classes", "must lie in [1, n]"));
    }
    features.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k_ring / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k_ring / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.random::<f64>() < p_rewire && adj[u].len() < n - 1 && adj[u].contains(&v) {
                let mut w = rng.random_range(0..n);
                while w == u || adj[u].contains(&w) {
                    w = rng.random_range(0..n);
                }
                adj[u].remove(&v);
                adj[v].remove(&u);
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(u, s)| s.iter().filter(move |&&v| u < v).map(move |&v| (u, v, T::one())));
    let graph = build_graph(n, &EdgeList::new(edges)?)?;
    let labels = contiguous_labels(&proportional_counts(n, &vec![1.0; classes]));
    let x = features.sample(&labels, &mut rng);
    Ok(LabeledDataset {
        graph: Some(graph),
        features: x,
        labels,
    })
}

/// Graph whose fraction of inter-class edges equals `alpha` (up to rounding
/// of the edge counts). Intra- and inter-class edges are drawn uniformly at
/// random from the respective pair sets.
pub fn gen_heterophily<T: Scalar>(
    n: usize,
    classes: usize,
    alpha: f64,
    mean_degree: f64,
    features: &FeatureModel,
    seed: u64,
) -> Result<LabeledDataset<T>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid("alpha", "must lie in [0, 1]"));
    }
    if classes == 0 || classes > n {
        return Err(invalid("classes", "must lie in [1, n]"));
    }
    if !(mean_degree >= 0.0) {
        return Err(invalid("mean_degree", "must be nonnegative"));
    }
    features.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let members: Vec<Vec<usize>> = (0..classes)
        .map(|c| (0..n).filter(|&i| labels[i] == c).collect())
        .collect();

    let m = (n as f64 * mean_degree / 2.0).round() as usize;
    let m_cross = (alpha * m as f64).round() as usize;
    let m_intra = m - m_cross;
    let intra_cap: usize = members.iter().map(|s| s.len() * s.len().saturating_sub(1) / 2).sum();
    let cross_cap = n * (n - 1) / 2 - intra_cap;
    if m_intra > intra_cap || m_cross > cross_cap {
        return Err(invalid("mean_degree", "too dense for the requested class mix"));
    }

    let mut seen: HashSet<(usize, usize)> = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m_intra {
        let c = labels[rng.random_range(0..n)];
        let s = &members[c];
        if s.len() < 2 {
            continue;
        }
        let a = s[rng.random_range(0..s.len())];
        let b = s[rng.random_range(0..s.len())];
        if a != b && seen.insert((a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b), T::one()));
        }
    }
    let mut crossed = 0;
    while crossed < m_cross {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if labels[a] != labels[b] && seen.insert((a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b), T::one()));
            crossed += 1;
        }
    }
    let graph = build_graph(n, &EdgeList::new(edges)?)?;
    let x = features.sample(&labels, &mut rng);
    Ok(LabeledDataset {
        graph: Some(graph),
        features: x,
        labels,
    })
}

/// Random geometric ("sensor") graph in the unit square: edge iff distance
/// ≤ `radius`, unit weights. Features are the 2-D positions; labels are the
/// quadrant.
pub fn gen_geometric<T: Scalar>(n: usize, radius: f64, seed: u64) -> Result<LabeledDataset<T>> {
    if !(radius > 0.0) {
        return Err(invalid("radius", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let r2 = radius * radius;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pos[i][0] - pos[j][0];
            let dy = pos[i][1] - pos[j][1];
            if dx * dx + dy * dy <= r2 {
                edges.push((i, j, T::one()));
            }
        }
    }
    let graph = build_graph(n, &EdgeList::new(edges)?)?;
    let labels = pos
        .iter()
        .map(|p| usize::from(p[0] >= 0.5) + 2 * usize::from(p[1] >= 0.5))
        .collect();
    let features = FeatureMatrix::new(n, 2, pos.iter().flat_map(|p| [T::of(p[0]), T::of(p[1])]).collect())?;
    Ok(LabeledDataset {
        graph: Some(graph),
        features,
        labels,
    })
}

/// 4-neighbour `rows × cols` lattice. Features are `(row, col)`; labels split
/// the columns into a left and right half.
pub fn gen_grid<T: Scalar>(rows: usize, cols: usize) -> Result<LabeledDataset<T>> {
    let n = rows * cols;
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::with_capacity(2 * n);
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1), T::one()));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c), T::one()));
            }
        }
    }
    let graph = build_graph(n, &EdgeList::new(edges)?)?;
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for r in 0..rows {
        for c in 0..cols {
            data.push(T::of_usize(r));
            data.push(T::of_usize(c));
            labels.push(usize::from(2 * c >= cols));
        }
    }
    Ok(LabeledDataset {
        graph: Some(graph),
        features: FeatureMatrix::new(n, 2, data)?,
        labels,
    })
}

/// Feature-only Gaussian blobs: `centers` contiguous, near-equal classes.
pub fn gen_blobs<T: Scalar>(n: usize, centers: usize, features: &FeatureModel, seed: u64) -> Result<LabeledDataset<T>> {
    if centers == 0 {
        return Err(invalid("centers", "must be positive"));
    }
    features.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = contiguous_labels(&proportional_counts(n, &vec![1.0; centers]));
    let x = features.sample(&labels, &mut rng);
    Ok(LabeledDataset {
        graph: None,
        features: x,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intra_edges(g: &Graph<f64>, labels: &[usize]) -> (usize, usize) {
        let mut intra = 0;
        let mut total = 0;
        for e in &g.edges() {
            total += 1;
            if labels[e.u] == labels[e.v] {
                intra += 1;
            }
        }
        (intra, total)
    }

    #[test]
    fn dcsbm_expected_block_edges() {
        // 50/50 blocks, rho·P = [[0.5,0.05],[0.05,0.5]]; each block expects C(50,2)·0.5 = 612.5
        let seeds = 200;
        let mut per_block = Vec::new();
        for s in 0..seeds {
            let p = DcsbmParams::planted_uniform_degree(100, 2, 0.5, 0.05, s);
            let out = gen_dcsbm::<f64>(&p).unwrap();
            let g = out.dataset.graph.unwrap();
            let block0 = g
                .edges()
                .iter()
                .filter(|e| out.dataset.labels[e.u] == 0 && out.dataset.labels[e.v] == 0)
                .count();
            per_block.push(block0 as f64);
        }
        let mean = per_block.iter().sum::<f64>() / seeds as f64;
        let var_one = 1225.0 * 0.5 * 0.5;
        let sigma_mean = (var_one / seeds as f64).sqrt();
        assert!((mean - 612.5).abs() < 3.0 * sigma_mean, "mean {mean}");
    }

    #[test]
    fn dcsbm_zero_rho_and_erdos_renyi() {
        let mut p = DcsbmParams::planted(50, 2, 0.5, 0.1, 1);
        p.rho = 0.0;
        assert_eq!(gen_dcsbm::<f64>(&p).unwrap().dataset.graph.unwrap().num_edges(), 0);

        // k = 1, θ ≡ 1: G(n, p), mean degree ≈ (n − 1) p
        let (n, prob) = (300, 0.05);
        let mut degs = 0.0;
        let reps = 20;
        for s in 0..reps {
            let p = DcsbmParams::planted_uniform_degree(n, 1, prob, prob, s);
            let g = gen_dcsbm::<f64>(&p).unwrap().dataset.graph.unwrap();
            degs += 2.0 * g.num_edges() as f64 / n as f64;
        }
        let mean = degs / reps as f64;
        let expect = (n - 1) as f64 * prob;
        // sd of one sample's mean degree ≈ sqrt(2 p (1-p) / n·(n-1)) · (n-1) ... use 3σ of edge count
        let sd_edges = (n as f64 * (n - 1) as f64 / 2.0 * prob * (1.0 - prob)).sqrt();
        let sd_mean = 2.0 * sd_edges / n as f64 / (reps as f64).sqrt();
        assert!((mean - expect).abs() < 3.0 * sd_mean, "{mean} vs {expect}");
    }

    #[test]
    fn dcsbm_clipping_counted() {
        let mut p = DcsbmParams::planted(20, 1, 1.0, 1.0, 0);
        p.theta_values = vec![2.0];
        p.pi = vec![vec![1.0]];
        let out = gen_dcsbm::<f64>(&p).unwrap();
        assert_eq!(out.clipped_pairs, 190);
        assert_eq!(out.dataset.graph.unwrap().num_edges(), 190);
    }

    #[test]
    fn dcsbm_rejects_bad_params() {
        let mut p = DcsbmParams::planted(20, 2, 0.5, 0.1, 0);
        p.p[0][1] = 0.2;
        assert!(gen_dcsbm::<f64>(&p).is_err());
        let mut p = DcsbmParams::planted(20, 2, 0.5, 0.1, 0);
        p.pi[0][0] = 0.4;
        assert!(gen_dcsbm::<f64>(&p).is_err());
    }

    #[test]
    fn small_world_lattice_and_rewired() {
        let fm = FeatureModel::new(4, 1.0);
        let d = gen_small_world::<f64>(30, 4, 0.0, 3, &fm, 1).unwrap();
        let g = d.graph.unwrap();
        assert!(g.degrees().iter().all(|&x| x == 4));
        assert_eq!(g.num_edges(), 60);

        let d = gen_small_world::<f64>(200, 6, 1.0, 2, &fm, 2).unwrap();
        let g = d.graph.unwrap();
        assert_eq!(g.num_edges(), 600);
        let degs = g.degrees();
        assert!(degs.iter().any(|&x| x != 6));
        g.validate().unwrap();

        assert!(gen_small_world::<f64>(4, 4, 0.0, 1, &fm, 0).is_err());
    }

    #[test]
    fn small_world_syn1_scale() {
        let d = gen_small_world::<f64>(2000, 8, 0.1, 4, &FeatureModel::default(), 7).unwrap();
        assert_eq!(d.graph.unwrap().num_edges(), 8000);
        assert_eq!(d.features.n(), 2000);
    }

    #[test]
    fn heterophily_extremes_and_mid() {
        let fm = FeatureModel::new(4, 1.0);
        let d = gen_heterophily::<f64>(400, 4, 0.0, 6.0, &fm, 1).unwrap();
        let (intra, total) = intra_edges(d.graph.as_ref().unwrap(), &d.labels);
        assert_eq!(intra, total);

        let d = gen_heterophily::<f64>(400, 4, 1.0, 6.0, &fm, 1).unwrap();
        let (intra, _) = intra_edges(d.graph.as_ref().unwrap(), &d.labels);
        assert_eq!(intra, 0);

        for n in [1000, 2000, 4000] {
            let d = gen_heterophily::<f64>(n, 4, 0.5, 8.0, &fm, 3).unwrap();
            let (intra, total) = intra_edges(d.graph.as_ref().unwrap(), &d.labels);
            let frac = 1.0 - intra as f64 / total as f64;
            assert!((0.48..=0.52).contains(&frac), "n={n}: {frac}");
        }
        assert!(gen_heterophily::<f64>(10, 2, 1.5, 2.0, &fm, 0).is_err());
    }

    #[test]
    fn grid_counts() {
        let g = gen_grid::<f64>(2, 2).unwrap().graph.unwrap();
        assert_eq!((g.n(), g.num_edges()), (4, 4));
        for (r, c) in [(3, 5), (7, 2), (1, 9)] {
            let g = gen_grid::<f64>(r, c).unwrap().graph.unwrap();
            assert_eq!(g.num_edges(), r * (c - 1) + c * (r - 1));
        }
    }

    #[test]
    fn geometric_syn5_scale() {
        // 400 nodes; radius 0.08 lands near the 1,520-edge scale of the sensor benchmark
        let mut total = 0usize;
        for s in 0..5 {
            let d = gen_geometric::<f64>(400, 0.08, s).unwrap();
            let g = d.graph.unwrap();
            g.validate().unwrap();
            total += g.num_edges();
        }
        let mean = total as f64 / 5.0;
        assert!((mean - 1520.0).abs() / 1520.0 < 0.1, "mean edges {mean}");
        assert!(gen_geometric::<f64>(10, 0.0, 0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let fm = FeatureModel::default();
        let a = gen_small_world::<f64>(100, 4, 0.3, 2, &fm, 9).unwrap();
        let b = gen_small_world::<f64>(100, 4, 0.3, 2, &fm, 9).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.features, b.features);
        let a = gen_dcsbm::<f64>(&DcsbmParams::planted(80, 2, 0.3, 0.05, 4)).unwrap();
        let b = gen_dcsbm::<f64>(&DcsbmParams::planted(80, 2, 0.3, 0.05, 4)).unwrap();
        assert_eq!(a.dataset.graph, b.dataset.graph);
        assert_eq!(a.theta, b.theta);
    }

    #[test]
    fn expected_degree_helper() {
        let p = DcsbmParams::planted_uniform_degree(101, 2, 0.2, 0.0, 0);
        assert!((p.expected_degree() - 100.0 * 0.5 * 0.2).abs() < 1e-12);
    }
}
