//! Co-clustering of a binary matrix into homogeneous blocks.
//!
//! Rows and columns are grouped independently to minimize the total
//! Bernoulli coding cost `Σ_b n_b · H(e_b / n_b)` (bits), where `n_b` is the
//! number of cells and `e_b` the number of ones in block `b`. The search
//! alternates single-row and single-column greedy reassignments; every
//! accepted move strictly lowers the cost, so the cost never increases
//! across sweeps.
//!
//! Block densities are Laplace-smoothed, `(e + 1) / (n + 2)`, which keeps
//! them strictly inside `(0, 1)` and the surprise features finite.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Sparse 0/1 matrix with row and column access.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl BinaryMatrix {
    pub fn from_rows(n_cols: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); n_cols];
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            for &c in row.iter() {
                if c >= n_cols {
                    return Err(Error::InvalidParameter(format!(
                        "matrix row {r} has column {c} >= {n_cols}"
                    )));
                }
                cols[c].push(r);
            }
        }
        Ok(BinaryMatrix { rows, cols })
    }

    /// The adjacency matrix of `g` (zero diagonal).
    pub fn from_graph(g: &Graph) -> Self {
        let rows: Vec<Vec<usize>> = (0..g.node_count()).map(|u| g.neighbors(u).to_vec()).collect();
        BinaryMatrix {
            cols: rows.clone(),
            rows,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Cells times binary entropy of the block density, in bits.
#[inline]
pub fn block_cost(ones: u64, cells: u64) -> f64 {
    if ones == 0 || ones >= cells {
        return 0.0;
    }
    let (e, n) = (ones as f64, cells as f64);
    let z = n - e;
    (e * (n / e).ln() + z * (n / z).ln()) / std::f64::consts::LN_2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoclusterParams {
    pub k_rows: usize,
    pub k_cols: usize,
    pub seed: u64,
    pub max_sweeps: usize,
}

impl CoclusterParams {
    /// `k = round(√N)` clamped to `[2, 64]` (and to `N`), 50 sweeps.
    pub fn with_default_k(n: usize, seed: u64) -> Self {
        let k = default_k(n);
        CoclusterParams {
            k_rows: k,
            k_cols: k,
            seed,
            max_sweeps: 50,
        }
    }
}

pub fn default_k(n: usize) -> usize {
    ((n as f64).sqrt().round() as usize).clamp(2, 64).min(n.max(1))
}

/// Identifies a fitted model for cache reuse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoclusterKey {
    pub graph_hash: String,
    pub params: CoclusterParams,
}

/// Fitted co-clustering with per-block counts.
#[derive(Clone, Debug, PartialEq)]
pub struct CoclusterModel {
    pub k_rows: usize,
    pub k_cols: usize,
    pub row_group: Vec<usize>,
    pub col_group: Vec<usize>,
    /// Row-major `k_rows × k_cols`.
    pub block_edges: Vec<u64>,
    pub block_cells: Vec<u64>,
    /// Coding cost after initialization and after every sweep.
    pub cost_trace: Vec<f64>,
    pub key: Option<CoclusterKey>,
}

/// Surprise of asserting an edge and of asserting a non-edge, in bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Surprise {
    pub exist: f64,
    pub absent: f64,
}

impl Surprise {
    pub fn from_density(d: f64) -> Self {
        Surprise {
            exist: -d.log2(),
            absent: -(1.0 - d).log2(),
        }
    }
}

/// Laplace-smoothed density `(e + 1) / (n + 2)`.
#[inline]
pub fn smoothed_density(ones: u64, cells: u64) -> f64 {
    (ones as f64 + 1.0) / (cells as f64 + 2.0)
}

impl CoclusterModel {
    #[inline]
    fn block(&self, a: usize, b: usize) -> usize {
        a * self.k_cols + b
    }

    pub fn raw_density(&self, a: usize, b: usize) -> f64 {
        let i = self.block(a, b);
        if self.block_cells[i] == 0 {
            0.0
        } else {
            self.block_edges[i] as f64 / self.block_cells[i] as f64
        }
    }

    pub fn density(&self, a: usize, b: usize) -> f64 {
        let i = self.block(a, b);
        smoothed_density(self.block_edges[i], self.block_cells[i])
    }

    /// Smoothed density of the block holding cell `(u, v)`.
    pub fn block_density(&self, u: usize, v: usize) -> f64 {
        self.density(self.row_group[u], self.col_group[v])
    }

    pub fn surprise(&self, u: usize, v: usize) -> Surprise {
        Surprise::from_density(self.block_density(u, v))
    }

    pub fn coding_cost(&self) -> f64 {
        self.block_edges
            .iter()
            .zip(&self.block_cells)
            .map(|(&e, &n)| block_cost(e, n))
            .sum()
    }

    pub fn to_text(&self) -> String {
        let join = |xs: &mut dyn Iterator<Item = String>| xs.collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        let _ = writeln!(s, "# linkpred cocluster v1");
        if let Some(k) = &self.key {
            let _ = writeln!(
                s,
                "key {} {} {} {} {}",
                k.graph_hash, k.params.k_rows, k.params.k_cols, k.params.seed, k.params.max_sweeps
            );
        }
        let _ = writeln!(s, "groups {} {}", self.k_rows, self.k_cols);
        let _ = writeln!(s, "row_group {}", join(&mut self.row_group.iter().map(|x| x.to_string())));
        let _ = writeln!(s, "col_group {}", join(&mut self.col_group.iter().map(|x| x.to_string())));
        let _ = writeln!(s, "block_edges {}", join(&mut self.block_edges.iter().map(|x| x.to_string())));
        let _ = writeln!(s, "block_cells {}", join(&mut self.block_cells.iter().map(|x| x.to_string())));
        // {:?} prints the shortest string that round-trips an f64
        let _ = writeln!(s, "cost_trace {}", join(&mut self.cost_trace.iter().map(|x| format!("{x:?}"))));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        fn nums<T: std::str::FromStr>(rest: &str, what: &str) -> Result<Vec<T>> {
            rest.split_whitespace()
                .map(|w| w.parse().map_err(|_| Error::Artifact(format!("bad {what} entry '{w}'"))))
                .collect()
        }
        let mut key = None;
        let mut groups: Option<(usize, usize)> = None;
        let (mut rg, mut cg, mut be, mut bc, mut trace) = (None, None, None, None, Vec::new());
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
            match tag {
                "key" => {
                    let w: Vec<&str> = rest.split_whitespace().collect();
                    if w.len() != 5 {
                        return Err(Error::Artifact("key line needs 5 fields".into()));
                    }
                    let p = |i: usize| -> Result<u64> {
                        w[i].parse().map_err(|_| Error::Artifact(format!("bad key field '{}'", w[i])))
                    };
                    key = Some(CoclusterKey {
                        graph_hash: w[0].to_string(),
                        params: CoclusterParams {
                            k_rows: p(1)? as usize,
                            k_cols: p(2)? as usize,
                            seed: p(3)?,
                            max_sweeps: p(4)? as usize,
                        },
                    });
                }
                "groups" => {
                    let v: Vec<usize> = nums(rest, "groups")?;
                    if v.len() != 2 {
                        return Err(Error::Artifact("groups line needs 2 fields".into()));
                    }
                    groups = Some((v[0], v[1]));
                }
                "row_group" => rg = Some(nums::<usize>(rest, "row_group")?),
                "col_group" => cg = Some(nums::<usize>(rest, "col_group")?),
                "block_edges" => be = Some(nums::<u64>(rest, "block_edges")?),
                "block_cells" => bc = Some(nums::<u64>(rest, "block_cells")?),
                "cost_trace" => trace = nums::<f64>(rest, "cost_trace")?,
                other => return Err(Error::Artifact(format!("unknown line tag '{other}'"))),
            }
        }
        let missing = |w: &str| Error::Artifact(format!("missing {w}"));
        let (k_rows, k_cols) = groups.ok_or_else(|| missing("groups"))?;
        let model = CoclusterModel {
            k_rows,
            k_cols,
            row_group: rg.ok_or_else(|| missing("row_group"))?,
            col_group: cg.ok_or_else(|| missing("col_group"))?,
            block_edges: be.ok_or_else(|| missing("block_edges"))?,
            block_cells: bc.ok_or_else(|| missing("block_cells"))?,
            cost_trace: trace,
            key,
        };
        if model.block_edges.len() != k_rows * k_cols
            || model.block_cells.len() != k_rows * k_cols
            || model.row_group.iter().any(|&g| g >= k_rows)
            || model.col_group.iter().any(|&g| g >= k_cols)
        {
            return Err(Error::Artifact("inconsistent co-cluster table sizes".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Mutable search state for one side of the alternating search.
struct Search<'m> {
    m: &'m BinaryMatrix,
    k_rows: usize,
    k_cols: usize,
    row_group: Vec<usize>,
    col_group: Vec<usize>,
    row_size: Vec<u64>,
    col_size: Vec<u64>,
    edges: Vec<u64>,
}

const MOVE_EPS: f64 = 1e-9;

impl<'m> Search<'m> {
    fn new(m: &'m BinaryMatrix, p: &CoclusterParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let row_group: Vec<usize> = (0..m.n_rows()).map(|_| rng.gen_range(0..p.k_rows)).collect();
        let col_group: Vec<usize> = (0..m.n_cols()).map(|_| rng.gen_range(0..p.k_cols)).collect();
        let mut s = Search {
            m,
            k_rows: p.k_rows,
            k_cols: p.k_cols,
            row_group,
            col_group,
            row_size: vec![0; p.k_rows],
            col_size: vec![0; p.k_cols],
            edges: vec![0; p.k_rows * p.k_cols],
        };
        for &g in &s.row_group {
            s.row_size[g] += 1;
        }
        for &g in &s.col_group {
            s.col_size[g] += 1;
        }
        for (r, row) in m.rows.iter().enumerate() {
            for &c in row {
                s.edges[s.row_group[r] * s.k_cols + s.col_group[c]] += 1;
            }
        }
        s
    }

    fn cost(&self) -> f64 {
        let mut total = 0.0;
        for a in 0..self.k_rows {
            for b in 0..self.k_cols {
                total += block_cost(self.edges[a * self.k_cols + b], self.row_size[a] * self.col_size[b]);
            }
        }
        total
    }

    /// One pass over rows; returns the number of moves.
    fn sweep_rows(&mut self) -> usize {
        let kc = self.k_cols;
        let mut counts = vec![0u64; kc];
        let mut moves = 0;
        for r in 0..self.m.n_rows() {
            counts.iter_mut().for_each(|x| *x = 0);
            for &c in &self.m.rows[r] {
                counts[self.col_group[c]] += 1;
            }
            let a = self.row_group[r];
            let sa = self.row_size[a];
            let mut leave_gain = 0.0;
            for j in 0..kc {
                let e = self.edges[a * kc + j];
                let cs = self.col_size[j];
                leave_gain += block_cost(e - counts[j], (sa - 1) * cs) - block_cost(e, sa * cs);
            }
            let mut best = (a, 0.0);
            for b in 0..self.k_rows {
                if b == a {
                    continue;
                }
                let sb = self.row_size[b];
                let mut d = leave_gain;
                for j in 0..kc {
                    let e = self.edges[b * kc + j];
                    let cs = self.col_size[j];
                    d += block_cost(e + counts[j], (sb + 1) * cs) - block_cost(e, sb * cs);
                }
                if d < best.1 {
                    best = (b, d);
                }
            }
            if best.0 != a && best.1 < -MOVE_EPS {
                let b = best.0;
                for j in 0..kc {
                    self.edges[a * kc + j] -= counts[j];
                    self.edges[b * kc + j] += counts[j];
                }
                self.row_size[a] -= 1;
                self.row_size[b] += 1;
                self.row_group[r] = b;
                moves += 1;
            }
        }
        moves
    }

    fn sweep_cols(&mut self) -> usize {
        let (kr, kc) = (self.k_rows, self.k_cols);
        let mut counts = vec![0u64; kr];
        let mut moves = 0;
        for c in 0..self.m.n_cols() {
            counts.iter_mut().for_each(|x| *x = 0);
            for &r in &self.m.cols[c] {
                counts[self.row_group[r]] += 1;
            }
            let a = self.col_group[c];
            let sa = self.col_size[a];
            let mut leave_gain = 0.0;
            for i in 0..kr {
                let e = self.edges[i * kc + a];
                let rs = self.row_size[i];
                leave_gain += block_cost(e - counts[i], rs * (sa - 1)) - block_cost(e, rs * sa);
            }
            let mut best = (a, 0.0);
            for b in 0..kc {
                if b == a {
                    continue;
                }
                let sb = self.col_size[b];
                let mut d = leave_gain;
                for i in 0..kr {
                    let e = self.edges[i * kc + b];
                    let rs = self.row_size[i];
                    d += block_cost(e + counts[i], rs * (sb + 1)) - block_cost(e, rs * sb);
                }
                if d < best.1 {
                    best = (b, d);
                }
            }
            if best.0 != a && best.1 < -MOVE_EPS {
                let b = best.0;
                for i in 0..kr {
                    self.edges[i * kc + a] -= counts[i];
                    self.edges[i * kc + b] += counts[i];
                }
                self.col_size[a] -= 1;
                self.col_size[b] += 1;
                self.col_group[c] = b;
                moves += 1;
            }
        }
        moves
    }
}

/// Fits a co-clustering of an arbitrary binary matrix.
pub fn fit_matrix(m: &BinaryMatrix, p: &CoclusterParams) -> Result<CoclusterModel> {
    if p.k_rows == 0 || p.k_cols == 0 || p.k_rows > m.n_rows().max(1) || p.k_cols > m.n_cols().max(1)
    {
        return Err(Error::InvalidParameter(format!(
            "co-cluster group counts ({}, {}) must lie in [1, N] for a {}x{} matrix",
            p.k_rows,
            p.k_cols,
            m.n_rows(),
            m.n_cols()
        )));
    }
    if p.max_sweeps == 0 {
        return Err(Error::InvalidParameter("max_sweeps must be >= 1".into()));
    }
    let mut s = Search::new(m, p);
    let mut trace = vec![s.cost()];
    for _ in 0..p.max_sweeps {
        let moves = s.sweep_rows() + s.sweep_cols();
        let cost = s.cost();
        let prev = *trace.last().expect("trace starts non-empty");
        assert!(
            cost <= prev + 1e-9 * prev.abs().max(1.0),
            "co-clustering cost rose from {prev} to {cost}"
        );
        trace.push(cost);
        if moves == 0 {
            break;
        }
    }
    let (kr, kc) = (s.k_rows, s.k_cols);
    let mut cells = vec![0u64; kr * kc];
    for a in 0..kr {
        for b in 0..kc {
            cells[a * kc + b] = s.row_size[a] * s.col_size[b];
        }
    }
    Ok(CoclusterModel {
        k_rows: kr,
        k_cols: kc,
        row_group: s.row_group,
        col_group: s.col_group,
        block_edges: s.edges,
        block_cells: cells,
        cost_trace: trace,
        key: None,
    })
}

/// Fits the adjacency matrix of `g` and tags the model with its cache key.
pub fn fit_cocluster(g: &Graph, p: &CoclusterParams) -> Result<CoclusterModel> {
    let mut model = fit_matrix(&BinaryMatrix::from_graph(g), p)?;
    model.key = Some(CoclusterKey {
        graph_hash: g.content_hash(),
        params: *p,
    });
    Ok(model)
}

/// Fits one model per seed in parallel and keeps the cheapest, breaking
/// cost ties by the smaller seed.
pub fn fit_restarts(g: &Graph, base: &CoclusterParams, seeds: &[u64]) -> Result<CoclusterModel> {
    let models: Vec<(u64, CoclusterModel)> = seeds
        .par_iter()
        .map(|&seed| fit_cocluster(g, &CoclusterParams { seed, ..*base }).map(|m| (seed, m)))
        .collect::<Result<_>>()?;
    models
        .into_iter()
        .min_by(|(sa, a), (sb, b)| {
            a.coding_cost()
                .total_cmp(&b.coding_cost())
                .then(sa.cmp(sb))
        })
        .map(|(_, m)| m)
        .ok_or_else(|| Error::InvalidParameter("fit_restarts needs at least one seed".into()))
}
