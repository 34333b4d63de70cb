//! Unsupervised link scores: Adamic-Adar and resource allocation, Katz,
//! local and cumulative random walks, and PropFlow.
//!
//! Every scorer is a pure function of an immutable [`Graph`]. The
//! `*_from` variants score all nodes against one source at once, which is
//! what the ranking loop needs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Weighting of common neighbors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CommonNeighborWeight {
    /// `1 / ln d(k)`
    AdamicAdar,
    /// `1 / d(k)`
    ResourceAllocation,
}

/// Sum of weighted common neighbors of `u` and `v`. Terms are added in
/// descending degree order, so pairs whose common neighbors have the same
/// degree multiset get bit-identical scores. A common neighbor always has
/// degree at least 2.
pub fn adamic_adar(g: &Graph, u: usize, v: usize, weight: CommonNeighborWeight) -> f64 {
    let (a, b) = (g.neighbors(u), g.neighbors(v));
    let mut degs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                degs.push(g.degree(a[i]));
                i += 1;
                j += 1;
            }
        }
    }
    degs.sort_unstable_by(|x, y| y.cmp(x));
    degs.iter()
        .map(|&d| match weight {
            CommonNeighborWeight::AdamicAdar => 1.0 / (d as f64).ln(),
            CommonNeighborWeight::ResourceAllocation => 1.0 / d as f64,
        })
        .sum()
}

/// Parameters shared by the walk-based scorers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkParams {
    /// LRW/CRW horizon.
    pub t: usize,
    /// Katz damping.
    pub beta: f64,
    /// PropFlow depth.
    pub l: usize,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            t: 3,
            beta: 0.005,
            l: 5,
        }
    }
}

impl WalkParams {
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.t == 0 {
            return Err(Error::InvalidParameter("walk horizon t must be >= 1".into()));
        }
        if self.l == 0 {
            return Err(Error::InvalidParameter("propflow depth l must be >= 1".into()));
        }
        check_katz_beta(self.beta, spectral_radius(g))
    }
}

const POWER_ITERATIONS: usize = 100;
const POWER_TOLERANCE: f64 = 1e-6;

/// Largest adjacency eigenvalue, by power iteration on `A + I`.
///
/// The shift makes the Perron root strictly dominant in magnitude, so
/// bipartite graphs (whose spectrum is symmetric about zero) converge too.
pub fn spectral_radius(g: &Graph) -> f64 {
    let n = g.node_count();
    if n == 0 || g.edge_count() == 0 {
        return 0.0;
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        for u in 0..n {
            y[u] = x[u] + g.neighbors(u).iter().map(|&v| x[v]).sum::<f64>();
        }
        // Rayleigh quotient of the shifted operator
        let rq: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        for u in 0..n {
            x[u] = y[u] / norm;
        }
        let next = rq - 1.0;
        let done = (next - estimate).abs() <= POWER_TOLERANCE * next.abs().max(1.0);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

fn check_katz_beta(beta: f64, lambda: f64) -> Result<()> {
    let bound = if lambda > 0.0 { 1.0 / lambda } else { f64::INFINITY };
    if !(beta > 0.0) || beta >= bound {
        return Err(Error::KatzDivergent {
            beta,
            bound,
            lambda,
        });
    }
    Ok(())
}

/// Truncated Katz scorer with a validated damping factor.
#[derive(Clone, Debug)]
pub struct Katz<'g> {
    graph: &'g Graph,
    beta: f64,
    max_len: usize,
    lambda: f64,
}

impl<'g> Katz<'g> {
    pub fn new(graph: &'g Graph, beta: f64, max_len: usize) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::InvalidParameter("katz max_len must be >= 1".into()));
        }
        let lambda = spectral_radius(graph);
        check_katz_beta(beta, lambda)?;
        Ok(Katz {
            graph,
            beta,
            max_len,
            lambda,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `Σ_{p=1..max_len} β^p (A^p)[u, ·]`, by repeated sparse products
    /// starting from the impulse at `u`.
    pub fn scores_from(&self, u: usize) -> Vec<f64> {
        let g = self.graph;
        let n = g.node_count();
        let mut cur = vec![0.0; n];
        cur[u] = 1.0;
        let mut next = vec![0.0; n];
        let mut acc = vec![0.0; n];
        let mut damp = 1.0;
        for _ in 0..self.max_len {
            for x in 0..n {
                next[x] = g.neighbors(x).iter().map(|&y| cur[y]).sum();
            }
            damp *= self.beta;
            for x in 0..n {
                acc[x] += damp * next[x];
            }
            std::mem::swap(&mut cur, &mut next);
        }
        acc
    }
}

pub fn katz_score(g: &Graph, u: usize, v: usize, beta: f64, max_len: usize) -> Result<f64> {
    Ok(Katz::new(g, beta, max_len)?.scores_from(u)[v])
}

/// One step of the uniform random walk: `π ← Cᵀ π`. Mass on isolated
/// nodes stays put.
fn walk_step(g: &Graph, pi: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for x in 0..g.node_count() {
        let m = pi[x];
        if m == 0.0 {
            continue;
        }
        let nb = g.neighbors(x);
        if nb.is_empty() {
            out[x] += m;
            continue;
        }
        let share = m / nb.len() as f64;
        for &y in nb {
            out[y] += share;
        }
    }
}

/// `π_u(τ)` for `τ = 1..=t`.
pub fn walk_distributions(g: &Graph, u: usize, t: usize) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut pi = vec![0.0; n];
    pi[u] = 1.0;
    let mut out = Vec::with_capacity(t);
    for _ in 0..t {
        let mut next = vec![0.0; n];
        walk_step(g, &pi, &mut next);
        out.push(next.clone());
        pi = next;
    }
    out
}

fn stationary(g: &Graph, u: usize) -> f64 {
    let m = g.edge_count();
    if m == 0 {
        0.0
    } else {
        g.degree(u) as f64 / (2 * m) as f64
    }
}

/// `q_u π_u(t)[v] + q_v π_v(t)[u]`, with `q = d / 2M`.
pub fn lrw_score(g: &Graph, u: usize, v: usize, t: usize) -> f64 {
    if t == 0 {
        return 0.0;
    }
    let pu = walk_distributions(g, u, t);
    let pv = walk_distributions(g, v, t);
    stationary(g, u) * pu[t - 1][v] + stationary(g, v) * pv[t - 1][u]
}

/// `Σ_{τ=1..t} lrw_score(τ)`.
pub fn crw_score(g: &Graph, u: usize, v: usize, t: usize) -> f64 {
    if t == 0 {
        return 0.0;
    }
    let pu = walk_distributions(g, u, t);
    let pv = walk_distributions(g, v, t);
    let (qu, qv) = (stationary(g, u), stationary(g, v));
    (0..t).map(|s| qu * pu[s][v] + qv * pv[s][u]).sum()
}

/// LRW scores of every node against `u`.
///
/// The uniform walk on an undirected graph is reversible
/// (`d_v P^t(v,u) = d_u P^t(u,v)`), so the second term equals the first and
/// only the walk from `u` is needed.
pub fn lrw_scores_from(g: &Graph, u: usize, t: usize) -> Vec<f64> {
    let qu = stationary(g, u);
    match walk_distributions(g, u, t).pop() {
        Some(pi) => pi.into_iter().map(|p| 2.0 * qu * p).collect(),
        None => vec![0.0; g.node_count()],
    }
}

/// CRW scores of every node against `u`; see [`lrw_scores_from`].
pub fn crw_scores_from(g: &Graph, u: usize, t: usize) -> Vec<f64> {
    let qu = stationary(g, u);
    let mut acc = vec![0.0; g.node_count()];
    for pi in walk_distributions(g, u, t) {
        for (a, p) in acc.iter_mut().zip(pi) {
            *a += 2.0 * qu * p;
        }
    }
    acc
}

/// PropFlow from `source` up to depth `l`.
///
/// Shells are processed breadth-first. A node at depth `d` splits its
/// inflow uniformly over its neighbors at depth `d + 1`; mass never moves
/// back to shallower or same-depth nodes, and a node without deeper
/// neighbors absorbs its mass. The returned score of a node is its total
/// inflow when first reached. The source itself is not scored.
pub fn propflow(g: &Graph, source: usize, l: usize) -> BTreeMap<usize, f64> {
    let n = g.node_count();
    let mut depth = vec![usize::MAX; n];
    let mut mass = vec![0.0; n];
    depth[source] = 0;
    mass[source] = 1.0;
    let mut shell = vec![source];
    let mut scores = BTreeMap::new();
    for d in 0..l {
        let mut next = Vec::new();
        for &x in &shell {
            for &y in g.neighbors(x) {
                if depth[y] == usize::MAX {
                    depth[y] = d + 1;
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        for &x in &shell {
            let m = mass[x];
            let deeper = g.neighbors(x).iter().filter(|&&y| depth[y] == d + 1).count();
            if m == 0.0 || deeper == 0 {
                continue;
            }
            let share = m / deeper as f64;
            for &y in g.neighbors(x) {
                if depth[y] == d + 1 {
                    mass[y] += share;
                }
            }
        }
        next.sort_unstable();
        for &y in &next {
            scores.insert(y, mass[y]);
        }
        shell = next;
    }
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g(n: usize, e: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, e).unwrap()
    }

    fn k3() -> Graph {
        g(3, &[(0, 1), (1, 2), (0, 2)])
    }

    #[test]
    fn aa_examples() {
        let path = g(3, &[(0, 1), (1, 2)]);
        assert_eq!(adamic_adar(&path, 0, 1, CommonNeighborWeight::AdamicAdar), 0.0);
        let aa = adamic_adar(&path, 0, 2, CommonNeighborWeight::AdamicAdar);
        assert_abs_diff_eq!(aa, 1.0 / 2f64.ln(), epsilon = 1e-15);
        let ra = adamic_adar(&path, 0, 2, CommonNeighborWeight::ResourceAllocation);
        assert_eq!(ra, 0.5);
    }

    #[test]
    fn aa_grows_with_new_common_neighbor() {
        let before = g(4, &[(0, 1), (1, 2)]);
        let after = g(4, &[(0, 1), (1, 2), (0, 3), (2, 3)]);
        let w = CommonNeighborWeight::AdamicAdar;
        assert!(adamic_adar(&after, 0, 2, w) > adamic_adar(&before, 0, 2, w));
    }

    #[test]
    fn katz_examples() {
        let e = g(2, &[(0, 1)]);
        assert_abs_diff_eq!(katz_score(&e, 0, 1, 0.1, 1).unwrap(), 0.1, epsilon = 1e-15);
        let lim = katz_score(&e, 0, 1, 0.1, 200).unwrap();
        assert_abs_diff_eq!(lim, 0.1 / (1.0 - 0.01), epsilon = 1e-12);
        assert_abs_diff_eq!(lim, 0.101010, epsilon = 1e-6);
        let path = g(3, &[(0, 1), (1, 2)]);
        assert_abs_diff_eq!(katz_score(&path, 0, 2, 0.1, 2).unwrap(), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn katz_rejects_divergent_beta() {
        // λ₁(K3) = 2
        assert!(matches!(
            Katz::new(&k3(), 0.6, 3),
            Err(Error::KatzDivergent { .. })
        ));
        assert!(Katz::new(&k3(), 0.4, 3).is_ok());
        assert!(Katz::new(&k3(), 0.4, 0).is_err());
    }

    #[test]
    fn spectral_radius_of_bipartite_star() {
        let star = g(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_abs_diff_eq!(spectral_radius(&star), 2.0, epsilon = 1e-5);
        assert_abs_diff_eq!(spectral_radius(&k3()), 2.0, epsilon = 1e-6);
    }

    #[test]
    fn lrw_examples() {
        let e = g(2, &[(0, 1)]);
        assert_abs_diff_eq!(lrw_score(&e, 0, 1, 1), 1.0, epsilon = 1e-15);
        let path = g(3, &[(0, 1), (1, 2)]);
        assert_eq!(lrw_score(&path, 0, 2, 1), 0.0);
        assert_abs_diff_eq!(lrw_score(&k3(), 0, 1, 1), 1.0 / 3.0, epsilon = 1e-15);
        let iso = g(3, &[(0, 1)]);
        assert_eq!(lrw_score(&iso, 2, 0, 4), 0.0);
    }

    #[test]
    fn crw_examples() {
        let e = g(2, &[(0, 1)]);
        assert_eq!(crw_score(&e, 0, 1, 1), lrw_score(&e, 0, 1, 1));
        assert_abs_diff_eq!(crw_score(&e, 0, 1, 2), 1.0, epsilon = 1e-15);
        // K3 two-step distribution from 0 is (1/2, 1/4, 1/4)
        assert_abs_diff_eq!(crw_score(&k3(), 0, 1, 2), 1.0 / 3.0 + 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn from_source_matches_pairwise() {
        let h = g(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (2, 4), (4, 5), (1, 4)]);
        for t in 1..5 {
            let lrw = lrw_scores_from(&h, 0, t);
            let crw = crw_scores_from(&h, 0, t);
            for v in 1..6 {
                assert_abs_diff_eq!(lrw[v], lrw_score(&h, 0, v, t), epsilon = 1e-14);
                assert_abs_diff_eq!(crw[v], crw_score(&h, 0, v, t), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn walk_normalized() {
        let h = g(5, &[(0, 1), (1, 2), (2, 0), (3, 4)]);
        for pi in walk_distributions(&h, 0, 6) {
            assert_abs_diff_eq!(pi.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn propflow_examples() {
        let star = g(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let s = propflow(&star, 0, 1);
        assert_eq!(s.len(), 4);
        assert!(s.values().all(|&x| x == 0.25));

        let path = g(3, &[(0, 1), (1, 2)]);
        let s = propflow(&path, 0, 2);
        assert_eq!(s.get(&1), Some(&1.0));
        assert_eq!(s.get(&2), Some(&1.0));

        let iso = g(2, &[]);
        assert!(propflow(&iso, 0, 1).is_empty());
    }

    #[test]
    fn propflow_no_same_shell_flow() {
        // 0 - {1, 2}, 1 - 2, 2 - 3: node 1 has no deeper neighbors
        let h = g(4, &[(0, 1), (0, 2), (1, 2), (2, 3)]);
        let s = propflow(&h, 0, 3);
        assert_eq!(s[&1], 0.5);
        assert_eq!(s[&2], 0.5);
        assert_eq!(s[&3], 0.5);
    }

    #[test]
    fn walk_params_validation() {
        let h = k3();
        assert!(WalkParams::default().validate(&h).is_ok());
        assert!(WalkParams { t: 0, ..Default::default() }.validate(&h).is_err());
        assert!(WalkParams { l: 0, ..Default::default() }.validate(&h).is_err());
        assert!(WalkParams { beta: 0.5, ..Default::default() }.validate(&h).is_err());
    }
}
