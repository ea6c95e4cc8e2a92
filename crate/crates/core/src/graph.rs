//! Sparse undirected weighted graphs in CSR layout, dense feature matrices and
//! the edge-list interchange form produced by the learners.
//!
//! A [`Graph`] is immutable. Growth happens by [`merge_edges`], which builds a
//! new graph containing the old edges plus the new ones.

use std::collections::HashMap;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Weights below this are treated as numerical noise and dropped at construction.
pub const WEIGHT_EPS: f64 = 1e-12;

/// Dense row-major `n × d` matrix of node features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T = f64> {
    n: usize,
    d: usize,
    data: Vec<T>,
}

impl<T: Scalar> FeatureMatrix<T> {
    /// Validates shape and finiteness.
    pub fn new(n: usize, d: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d.max(1),
                col: pos % d.max(1),
            });
        }
        Ok(Self { n, d, data })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            data: vec![T::zero(); n * d],
        }
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), d, data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            n: idx.len(),
            d: self.d,
            data,
        }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.n > 0 && other.n > 0 && self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        let d = if self.n > 0 { self.d } else { other.d };
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(Self {
            n: self.n + other.n,
            d,
            data,
        })
    }

    pub fn cast<U: Scalar>(&self) -> FeatureMatrix<U> {
        FeatureMatrix {
            n: self.n,
            d: self.d,
            data: self.data.iter().map(|x| U::of(x.as_f64())).collect(),
        }
    }
}

/// One undirected edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T = f64> {
    pub u: usize,
    pub v: usize,
    pub w: T,
}

/// Undirected edges with `u < v`, no duplicates, sorted by `(u, v)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeList<T = f64> {
    edges: Vec<Edge<T>>,
}

impl<T: Scalar> EdgeList<T> {
    pub fn empty() -> Self {
        Self { edges: Vec::new() }
    }

    /// Validates and canonicalizes: endpoints are swapped into `u < v` and the
    /// list is sorted. Self-loops and repeated pairs are rejected.
    pub fn new(edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut out: Vec<Edge<T>> = edges
            .into_iter()
            .map(|(a, b, w)| {
                if a == b {
                    return Err(Error::SelfLoop { node: a });
                }
                if !w.is_finite() {
                    return Err(Error::NonPositiveWeight {
                        u: a.min(b),
                        v: a.max(b),
                        w: w.as_f64(),
                    });
                }
                Ok(Edge {
                    u: a.min(b),
                    v: a.max(b),
                    w,
                })
            })
            .collect::<Result<_>>()?;
        out.sort_by_key(|a| (a.u, a.v));
        if let Some(p) = out.windows(2).find(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(Error::DuplicateEdge { u: p[0].u, v: p[0].v });
        }
        Ok(Self { edges: out })
    }

    /// Collects possibly-repeated, possibly-directed pairs into an edge list,
    /// keeping the maximum weight per unordered pair. Self-pairs are ignored.
    pub fn max_union(pairs: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut out: Vec<Edge<T>> = pairs
            .into_iter()
            .filter(|&(a, b, _)| a != b)
            .map(|(a, b, w)| Edge {
                u: a.min(b),
                v: a.max(b),
                w,
            })
            .collect();
        out.sort_by_key(|a| (a.u, a.v));
        out.dedup_by(|next, kept| {
            if (next.u, next.v) == (kept.u, kept.v) {
                if next.w > kept.w {
                    kept.w = next.w;
                }
                true
            } else {
                false
            }
        });
        Self { edges: out }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Edge<T>> {
        self.edges.iter()
    }

    pub fn as_slice(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// Largest node id referenced, if any.
    pub fn max_node(&self) -> Option<usize> {
        self.edges.iter().map(|e| e.v).max()
    }

    /// Renames endpoints through `map` (local → global ids) and re-sorts.
    pub fn relabel(&self, map: &[usize]) -> Self {
        Self::max_union(self.edges.iter().map(|e| (map[e.u], map[e.v], e.w)))
    }

    /// Keeps the edges for which `keep` returns true.
    pub fn filter(&self, mut keep: impl FnMut(&Edge<T>) -> bool) -> Self {
        Self {
            edges: self.edges.iter().copied().filter(|e| keep(e)).collect(),
        }
    }

    pub fn into_vec(self) -> Vec<Edge<T>> {
        self.edges
    }
}

impl<'a, T> IntoIterator for &'a EdgeList<T> {
    type Item = &'a Edge<T>;
    type IntoIter = std::slice::Iter<'a, Edge<T>>;
    fn into_iter(self) -> Self::IntoIter {
        self.edges.iter()
    }
}

/// Immutable undirected weighted graph in compressed sparse row form.
///
/// Both directions of each edge are stored with identical weights; rows are
/// sorted by column and contain no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T = f64> {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    weights: Vec<T>,
}

impl<T: Scalar> Graph<T> {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            row_offsets: vec![0; n + 1],
            col_indices: Vec::new(),
            weights: Vec::new(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    /// Unweighted degree.
    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    /// Sum of incident edge weights.
    pub fn strength(&self, i: usize) -> T {
        self.weights[self.row_offsets[i]..self.row_offsets[i + 1]]
            .iter()
            .copied()
            .sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    /// Neighbors of `i` with weights, sorted by neighbor id.
    pub fn neighbors(&self, i: usize) -> impl ExactSizeIterator<Item = (usize, T)> + '_ {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[r.clone()]
            .iter()
            .copied()
            .zip(self.weights[r].iter().copied())
    }

    /// Weight of edge `(u, v)`, if present.
    pub fn weight(&self, u: usize, v: usize) -> Option<T> {
        if u >= self.n || v >= self.n {
            return None;
        }
        let r = self.row_offsets[u]..self.row_offsets[u + 1];
        self.col_indices[r.clone()]
            .binary_search(&v)
            .ok()
            .map(|k| self.weights[r.start + k])
    }

    /// Sum of all stored weights (each undirected edge counted twice).
    pub fn csr_weight_sum(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Total undirected edge weight `m`.
    pub fn total_weight(&self) -> T {
        self.csr_weight_sum() / T::of(2.0)
    }

    /// Edges with `u < v` in row order.
    pub fn edges(&self) -> EdgeList<T> {
        let mut out = Vec::with_capacity(self.num_edges());
        for u in 0..self.n {
            for (v, w) in self.neighbors(u) {
                if u < v {
                    out.push(Edge { u, v, w });
                }
            }
        }
        EdgeList { edges: out }
    }

    /// Builds from directed entries already known to be symmetric, loop-free,
    /// deduplicated and sorted by `(row, col)`.
    fn from_sorted_entries(n: usize, entries: &[(usize, usize, T)]) -> Self {
        let mut row_offsets = vec![0usize; n + 1];
        for &(u, _, _) in entries {
            row_offsets[u + 1] += 1;
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self {
            n,
            row_offsets,
            col_indices: entries.iter().map(|e| e.1).collect(),
            weights: entries.iter().map(|e| e.2).collect(),
        }
    }

    /// Checks every structural invariant. Used by tests and debug assertions.
    pub fn validate(&self) -> Result<()> {
        if self.row_offsets.len() != self.n + 1
            || self.row_offsets[0] != 0
            || self.row_offsets[self.n] != self.col_indices.len()
            || self.col_indices.len() != self.weights.len()
        {
            return Err(Error::Format("inconsistent CSR offsets".into()));
        }
        for u in 0..self.n {
            if self.row_offsets[u] > self.row_offsets[u + 1] {
                return Err(Error::Format(format!("row {u} offsets decrease")));
            }
            let mut prev: Option<usize> = None;
            for (v, w) in self.neighbors(u) {
                if v >= self.n {
                    return Err(Error::NodeOutOfRange { node: v, n: self.n });
                }
                if v == u {
                    return Err(Error::SelfLoop { node: u });
                }
                if prev.is_some_and(|p| p >= v) {
                    return Err(Error::Format(format!("row {u} not strictly increasing")));
                }
                if !(w > T::zero()) {
                    return Err(Error::NonPositiveWeight { u, v, w: w.as_f64() });
                }
                if self.weight(v, u) != Some(w) {
                    return Err(Error::Format(format!("edge ({u}, {v}) not symmetric")));
                }
                prev = Some(v);
            }
        }
        Ok(())
    }
}

fn check_weight<T: Scalar>(e: &Edge<T>) -> Result<bool> {
    if !(e.w > T::zero()) || !e.w.is_finite() {
        return Err(Error::NonPositiveWeight {
            u: e.u,
            v: e.v,
            w: e.w.as_f64(),
        });
    }
    Ok(e.w >= T::of(WEIGHT_EPS))
}

/// Builds a graph on `n` nodes from an edge list. Weights in `(0, 1e-12)` are
/// dropped; nonpositive weights are rejected.
pub fn build_graph<T: Scalar>(n: usize, edges: &EdgeList<T>) -> Result<Graph<T>> {
    let mut entries = Vec::with_capacity(2 * edges.len());
    let mut last: Option<(usize, usize)> = None;
    for e in edges {
        if e.v >= n {
            return Err(Error::NodeOutOfRange { node: e.v, n });
        }
        if e.u == e.v {
            return Err(Error::SelfLoop { node: e.u });
        }
        if last == Some((e.u, e.v)) {
            return Err(Error::DuplicateEdge { u: e.u, v: e.v });
        }
        last = Some((e.u, e.v));
        if check_weight(e)? {
            entries.push((e.u, e.v, e.w));
            entries.push((e.v, e.u, e.w));
        }
    }
    entries.sort_by_key(|a| (a.0, a.1));
    Ok(Graph::from_sorted_entries(n, &entries))
}

/// Maps between the node ids of a graph and of one of its induced subgraphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphMap {
    nodes: Vec<usize>,
}

impl SubgraphMap {
    /// Sorted original ids; position is the new id.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn to_new(&self, old: usize) -> Option<usize> {
        self.nodes.binary_search(&old).ok()
    }

    pub fn to_old(&self, new: usize) -> usize {
        self.nodes[new]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Subgraph induced by `nodes`, relabelled by sorted position.
pub fn induced_subgraph<T: Scalar>(g: &Graph<T>, nodes: &[usize]) -> Result<(Graph<T>, SubgraphMap)> {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    if let Some(&bad) = sorted.iter().find(|&&x| x >= g.n) {
        return Err(Error::NodeOutOfRange { node: bad, n: g.n });
    }
    if let Some(p) = sorted.windows(2).find(|p| p[0] == p[1]) {
        return Err(invalid("nodes", format!("node {} listed twice", p[0])));
    }
    let mut position = HashMap::with_capacity(sorted.len());
    for (new, &old) in sorted.iter().enumerate() {
        position.insert(old, new);
    }
    let mut row_offsets = Vec::with_capacity(sorted.len() + 1);
    row_offsets.push(0);
    let mut col_indices = Vec::new();
    let mut weights = Vec::new();
    for &old in &sorted {
        // rows of g are sorted and the relabelling is monotone, so rows stay sorted
        for (v, w) in g.neighbors(old) {
            if let Some(&nv) = position.get(&v) {
                col_indices.push(nv);
                weights.push(w);
            }
        }
        row_offsets.push(col_indices.len());
    }
    let sub = Graph {
        n: sorted.len(),
        row_offsets,
        col_indices,
        weights,
    };
    Ok((sub, SubgraphMap { nodes: sorted }))
}

/// Returns `g` on `new_n` nodes with `additional` merged in. When a pair is
/// present in both, the larger weight is kept.
pub fn merge_edges<T: Scalar>(g: &Graph<T>, additional: &EdgeList<T>, new_n: usize) -> Result<Graph<T>> {
    if new_n < g.n {
        return Err(invalid(
            "new_n",
            format!("cannot shrink graph from {} to {new_n} nodes", g.n),
        ));
    }
    let mut extra: Vec<(usize, usize, T)> = Vec::with_capacity(2 * additional.len());
    for e in additional {
        if e.v >= new_n {
            return Err(Error::NodeOutOfRange { node: e.v, n: new_n });
        }
        if e.u == e.v {
            return Err(Error::SelfLoop { node: e.u });
        }
        if check_weight(e)? {
            extra.push((e.u, e.v, e.w));
            extra.push((e.v, e.u, e.w));
        }
    }
    let mut entries = Vec::with_capacity(g.col_indices.len() + extra.len());
    for u in 0..g.n {
        entries.extend(g.neighbors(u).map(|(v, w)| (u, v, w)));
    }
    entries.extend(extra);
    entries.sort_by_key(|a| (a.0, a.1));
    entries.dedup_by(|next, kept| {
        if (next.0, next.1) == (kept.0, kept.1) {
            if next.2 > kept.2 {
                kept.2 = next.2;
            }
            true
        } else {
            false
        }
    });
    let out = Graph::from_sorted_entries(new_n, &entries);
    debug_assert!(out.validate().is_ok());
    Ok(out)
}
