//! Immutable undirected graph in compressed sparse row form, plus the
//! per-node feature matrix.
//!
//! Node ids are dense integers in `[0, N)`. Every adjacency list is sorted
//! and free of duplicates and self-loops, so neighborhood intersections are
//! linear merges and every traversal order is deterministic.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Sparse undirected simple graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Duplicates, reversed
    /// duplicates and self-loops are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange { u, v, n });
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self::from_adjacency(adj))
    }

    /// Builds from per-node neighbor lists which must already be symmetric.
    pub(crate) fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Graph { offsets, targets }
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn check_node(&self, u: usize) -> Result<()> {
        if u < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                node: u,
                n: self.node_count(),
            })
        }
    }

    /// Undirected edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Sorted `Γ(u) ∩ Γ(v)`.
    pub fn common_neighbors(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::InvalidParameter(format!(
                "common_neighbors needs two distinct nodes, got {u} twice"
            )));
        }
        Ok(intersect_sorted(self.neighbors(u), self.neighbors(v)))
    }

    /// Number of triangles incident on `u`.
    pub fn triangle_count(&self, u: usize) -> usize {
        let nu = self.neighbors(u);
        let twice: usize = nu
            .iter()
            .map(|&a| intersection_size(nu, self.neighbors(a)))
            .sum();
        twice / 2
    }

    /// A copy of the graph with the given undirected edges removed. Pairs that
    /// are not edges are ignored; each edge is removed at most once.
    pub fn without_edges(&self, removed: &HashSet<(usize, usize)>) -> Graph {
        let n = self.node_count();
        let adj = (0..n)
            .map(|u| {
                self.neighbors(u)
                    .iter()
                    .copied()
                    .filter(|&v| !removed.contains(&(u.min(v), u.max(v))))
                    .collect()
            })
            .collect();
        Graph::from_adjacency(adj)
    }

    /// SHA-256 over the canonical edge-list serialization.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_edge_list_string().as_bytes()))
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut s = String::with_capacity(self.targets.len() * 6);
        let _ = writeln!(s, "# nodes {}", self.node_count());
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_edge_list_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    /// Parses the edge-list text format: one `u v` pair per line, `#`
    /// comments. A `# nodes N` header fixes the node count; without it the
    /// count is one past the largest id.
    pub fn parse_edge_list(text: &str, origin: &Path) -> Result<Graph> {
        Self::read_edge_list_from(text.as_bytes(), origin)
    }

    pub fn read_edge_list(path: &Path) -> Result<Graph> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_edge_list_from(BufReader::new(f), path)
    }

    fn read_edge_list_from<R: BufRead>(reader: R, origin: &Path) -> Result<Graph> {
        let mut declared: Option<usize> = None;
        let mut edges = Vec::new();
        let mut max_id: Option<usize> = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(comment) = t.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                if words.next() == Some("nodes") {
                    let n = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| Error::parse(origin, i + 1, "bad '# nodes' header"))?;
                    declared = Some(n);
                }
                continue;
            }
            let mut it = t.split_whitespace();
            let (a, b) = match (it.next(), it.next()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::parse(origin, i + 1, "expected 'u v'")),
            };
            let u: usize = a
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad node id '{a}'")))?;
            let v: usize = b
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad node id '{b}'")))?;
            max_id = Some(max_id.unwrap_or(0).max(u).max(v));
            edges.push((u, v));
        }
        let n = declared.unwrap_or(max_id.map_or(0, |m| m + 1));
        Graph::from_edges(n, &edges)
    }
}

/// Merge-intersection of two sorted slices.
pub fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Sorted `a ∖ b`, additionally skipping `skip`.
pub fn difference_sorted(a: &[usize], b: &[usize], skip: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if x != skip && !(j < b.len() && b[j] == x) {
            out.push(x);
        }
    }
    out
}

/// Per-node real feature vectors, stored as sparse rows.
///
/// Bag-of-words corpora have thousands of columns with a few dozen nonzeros
/// per row, so rows keep only their nonzero entries (sorted by column).
#[derive(Clone, Debug, PartialEq)]
pub struct NodeFeatureMatrix {
    dim: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Borrowed sparse row.
#[derive(Clone, Copy, Debug)]
pub struct FeatureRow<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl FeatureRow<'_> {
    pub fn get(&self, col: usize) -> f64 {
        match self.indices.binary_search(&col) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }
}

impl NodeFeatureMatrix {
    /// Builds from `(column, value)` lists per node. Zero values are dropped,
    /// duplicate columns are rejected.
    pub fn from_sparse_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (node, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::InvalidParameter(format!(
                        "node {node} repeats feature column {}",
                        w[0].0
                    )));
                }
            }
            for (c, x) in row {
                if c >= dim {
                    return Err(Error::InvalidParameter(format!(
                        "node {node} has feature column {c} >= dim {dim}"
                    )));
                }
                if !x.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "node {node} has non-finite feature {x} at column {c}"
                    )));
                }
                if x != 0.0 {
                    indices.push(c);
                    values.push(x);
                }
            }
            offsets.push(indices.len());
        }
        Ok(NodeFeatureMatrix {
            dim,
            offsets,
            indices,
            values,
        })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        if let Some((node, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::InvalidParameter(format!(
                "feature row {node} has length {} but expected {dim}",
                r.len()
            )));
        }
        let sparse = rows
            .iter()
            .map(|r| r.iter().copied().enumerate().collect())
            .collect();
        Self::from_sparse_rows(dim, sparse)
    }

    /// All-zero features, used when a graph has no node attributes.
    pub fn zeros(n: usize, dim: usize) -> Self {
        NodeFeatureMatrix {
            dim,
            offsets: vec![0; n + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn row(&self, u: usize) -> FeatureRow<'_> {
        let (a, b) = (self.offsets[u], self.offsets[u + 1]);
        FeatureRow {
            indices: &self.indices[a..b],
            values: &self.values[a..b],
        }
    }

    pub fn dense_row(&self, u: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let r = self.row(u);
        for (&c, &x) in r.indices.iter().zip(r.values) {
            out[c] = x;
        }
        out
    }

    /// `Σ_i |θ_u[i] − θ_v[i]|`.
    pub fn l1_distance(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (self.row(u), self.row(v));
        let (mut i, mut j, mut s) = (0, 0, 0.0);
        while i < a.indices.len() || j < b.indices.len() {
            let ci = a.indices.get(i).copied().unwrap_or(usize::MAX);
            let cj = b.indices.get(j).copied().unwrap_or(usize::MAX);
            if ci == cj {
                s += (a.values[i] - b.values[j]).abs();
                i += 1;
                j += 1;
            } else if ci < cj {
                s += a.values[i].abs();
                i += 1;
            } else {
                s += b.values[j].abs();
                j += 1;
            }
        }
        s
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}
