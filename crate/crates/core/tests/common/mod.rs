//! Independent reference implementations used by the integration tests.
//! Everything here works from a dense adjacency matrix and plain loops so
//! that it shares no code path with the library.

#![allow(dead_code)]

use linkpred::Graph;
use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::Ratio;
use rand::Rng;

pub type Q = Ratio<i128>;

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

pub fn dense_adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

pub fn degrees(a: &[Vec<bool>]) -> Vec<usize> {
    a.iter().map(|r| r.iter().filter(|&&x| x).count()).collect()
}

pub fn brute_triangles(a: &[Vec<bool>], u: usize) -> usize {
    let n = a.len();
    let mut t = 0;
    for x in 0..n {
        for y in x + 1..n {
            if a[u][x] && a[u][y] && a[x][y] {
                t += 1;
            }
        }
    }
    t
}

/// Triple loop over `(u, v, k)` collecting `w(d_k)` for every common
/// neighbor `k`; the terms are summed smallest first so the result does
/// not depend on node numbering.
pub fn brute_common_neighbor_scores(a: &[Vec<bool>], weight: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
    let n = a.len();
    let d = degrees(a);
    let mut s = vec![vec![0.0; n]; n];
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let mut terms = Vec::new();
            for k in 0..n {
                if a[u][k] && a[v][k] {
                    terms.push(weight(d[k]));
                }
            }
            terms.sort_by(f64::total_cmp);
            s[u][v] = terms.iter().sum();
        }
    }
    s
}

/// `(I − βA)⁻¹ − I` and the exact largest eigenvalue.
pub fn dense_katz(a: &[Vec<bool>], beta_times_lambda: f64) -> (DMatrix<f64>, f64) {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |i, j| if a[i][j] { 1.0 } else { 0.0 });
    let lambda = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let beta = beta_times_lambda / lambda;
    let id = DMatrix::<f64>::identity(n, n);
    let inv = (&id - m * beta).try_inverse().expect("I - beta A is invertible");
    (inv - id, lambda)
}

/// Probability that a uniform walk of exactly `len` steps from `u` ends at
/// `v`, by enumerating every walk.
pub fn walk_probability(a: &[Vec<bool>], u: usize, v: usize, len: usize) -> Q {
    let d = degrees(a);
    fn rec(a: &[Vec<bool>], d: &[usize], x: usize, v: usize, left: usize, p: Q) -> Q {
        if left == 0 {
            return if x == v { p } else { Q::from_integer(0) };
        }
        if d[x] == 0 {
            // an isolated node keeps its mass
            return rec(a, d, x, v, left - 1, p);
        }
        let step = p / Q::from_integer(d[x] as i128);
        (0..a.len())
            .filter(|&y| a[x][y])
            .map(|y| rec(a, d, y, v, left - 1, step))
            .sum()
    }
    rec(a, &d, u, v, len, Q::from_integer(1))
}

/// Superposed random walk score with exact rationals.
pub fn crw_rational(a: &[Vec<bool>], u: usize, v: usize, t: usize) -> Q {
    let d = degrees(a);
    let two_m: usize = d.iter().sum();
    if two_m == 0 {
        return Q::from_integer(0);
    }
    let qu = Q::new(d[u] as i128, two_m as i128);
    let qv = Q::new(d[v] as i128, two_m as i128);
    (1..=t)
        .map(|s| qu * walk_probability(a, u, v, s) + qv * walk_probability(a, v, u, s))
        .sum()
}

pub fn q_to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Average precision by explicit prefix enumeration: for every relevant
/// position `k`, recount the relevant items among the first `k`.
pub fn avp_by_prefixes(relevance: &[bool]) -> Option<f64> {
    let total = relevance.iter().filter(|&&r| r).count();
    if total == 0 {
        return None;
    }
    let mut sum = 0.0;
    for k in 1..=relevance.len() {
        if relevance[k - 1] {
            let hits = relevance[..k].iter().filter(|&&r| r).count();
            sum += hits as f64 / k as f64;
        }
    }
    Some(sum / total as f64)
}

/// Uniform random point of the probability simplex in `dim` dimensions.
pub fn random_simplex_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// `mean_{s ∈ set} Σ_p w_p |x_p − s_p|` over the listed coordinates.
fn set_dissim(w: &[f64], coords: &[usize], x: &[f64], set: &[Vec<f64>]) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let total: f64 = set
        .iter()
        .map(|s| coords.iter().zip(w).map(|(&p, wp)| wp * (x[p] - s[p]).abs()).sum::<f64>())
        .sum();
    total / set.len() as f64
}

/// Outcome of checking one local program against first principles.
pub struct LpCheck {
    pub optimal: bool,
    pub max_violation: f64,
    pub feasible_points: usize,
    /// Smallest `objective(point) − objective(w*)` over feasible points.
    pub worst_gap: f64,
}

/// Recomputes the four margin inequalities and the objective of the
/// library's solution from raw features, then samples random simplex
/// points over the support coordinates (all other coordinates carry zero
/// cost and zero constraint weight) and compares objectives among the
/// feasible ones.
pub fn check_local_program<R: Rng>(
    g: &Graph,
    feats: &linkpred::NodeFeatureMatrix,
    u: usize,
    v: usize,
    params: linkpred::local::LocalParams,
    points: usize,
    rng: &mut R,
) -> LpCheck {
    use linkpred::local::{build_local_lp, ll_feature, LocalWeights, SolveStatus};
    let (a, b) = (u.min(v), u.max(v));
    let sol = ll_feature(g, feats, u, v, params).unwrap().solution;
    let inst = build_local_lp(g, feats, a, b, params).unwrap();
    let row = |x: usize| feats.dense_row(x);
    let na: Vec<usize> = g.neighbors(a).to_vec();
    let nb: Vec<usize> = g.neighbors(b).to_vec();
    let only_a: Vec<Vec<f64>> = na.iter().filter(|&&x| x != b && !nb.contains(&x)).map(|&x| row(x)).collect();
    let only_b: Vec<Vec<f64>> = nb.iter().filter(|&&x| x != a && !na.contains(&x)).map(|&x| row(x)).collect();
    let (ta, tb) = (row(a), row(b));
    let violation = |coords: &[usize], w: &[f64]| -> f64 {
        let direct: f64 = coords.iter().zip(w).map(|(&p, wp)| wp * (ta[p] - tb[p]).abs()).sum();
        let mut worst: f64 = 0.0;
        if !only_a.is_empty() {
            worst = worst.max(set_dissim(w, coords, &ta, &only_a) - params.alpha * direct);
            worst = worst.max(params.beta * direct - set_dissim(w, coords, &tb, &only_a));
        }
        if !only_b.is_empty() {
            worst = worst.max(set_dissim(w, coords, &tb, &only_b) - params.alpha * direct);
            worst = worst.max(params.beta * direct - set_dissim(w, coords, &ta, &only_b));
        }
        worst
    };
    let objective = |coords: &[usize], w: &[f64]| -> f64 {
        coords.iter().zip(w).map(|(&p, wp)| wp * (ta[p] - tb[p]).abs()).sum()
    };
    let (coords, values): (Vec<usize>, Vec<f64>) = match &sol.weights {
        LocalWeights::Sparse { coords, values, .. } => (coords.clone(), values.clone()),
        LocalWeights::Uniform { dim } => ((0..*dim).collect(), vec![1.0 / *dim as f64; *dim]),
    };
    let best = objective(&coords, &values);
    let max_violation = violation(&coords, &values);
    let mut feasible_points = 0;
    let mut worst_gap = f64::INFINITY;
    if !inst.support.is_empty() {
        for _ in 0..points {
            let p = random_simplex_point(rng, inst.support.len());
            if violation(&inst.support, &p) <= 1e-9 {
                feasible_points += 1;
                worst_gap = worst_gap.min(objective(&inst.support, &p) - best);
            }
        }
    }
    LpCheck {
        optimal: sol.status == SolveStatus::Optimal,
        max_violation,
        feasible_points,
        worst_gap,
    }
}
