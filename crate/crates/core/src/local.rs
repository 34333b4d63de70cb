//! Locally learned dissimilarity between two nodes and the LL feature.
//!
//! For a pair `(u, v)` a weight vector `w ≥ 0, Σw = 1` over feature
//! coordinates is fitted by a small linear program: the weighted
//! dissimilarity `w·|θ_u − θ_v|` is minimized while each endpoint stays
//! closer (by margin `α`) to its own exclusive neighbors and farther (by
//! margin `β`) from the other endpoint's exclusive neighbors. The LL
//! feature compares the dissimilarity routed through common neighbors
//! against the direct one.
//!
//! Neighborhoods are taken in the graph with the edge `(u, v)` removed, so
//! a training edge is featurized exactly as if it had never been observed.

use crate::error::Result;
use crate::graph::{difference_sorted, intersect_sorted, FeatureRow, Graph, NodeFeatureMatrix};
use crate::simplex::{Constraint, DenseLp, LpOutcome, Sense};

/// Multiplicative margins of the local program, `0 < α ≤ 1 ≤ β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LocalParams {
    fn default() -> Self {
        LocalParams {
            alpha: 0.8,
            beta: 1.2,
        }
    }
}

impl LocalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0 && self.beta >= 1.0 && self.beta.is_finite()) {
            return Err(crate::Error::InvalidParameter(format!(
                "local margins need 0 < alpha <= 1 <= beta, got alpha={} beta={}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

/// Which of the four margin inequalities a row encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginKind {
    /// `Δ(u, Γ(u)∖Γ(v)) ≤ α Δ(u,v)`
    UCloseToOwn,
    /// `Δ(v, Γ(v)∖Γ(u)) ≤ α Δ(u,v)`
    VCloseToOwn,
    /// `Δ(u, Γ(v)∖Γ(u)) ≥ β Δ(u,v)`
    UFarFromOther,
    /// `Δ(v, Γ(u)∖Γ(v)) ≥ β Δ(u,v)`
    VFarFromOther,
}

/// One margin inequality rearranged to `coeffs·w (≤|≥) 0`, with
/// coefficients over the instance support.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginRow {
    pub kind: MarginKind,
    pub coeffs: Vec<f64>,
    pub sense: Sense,
}

/// The local program for one pair.
///
/// Only the *support* is materialized: coordinates where the objective or
/// some margin row is nonzero. Every other coordinate has zero cost and
/// zero constraint coefficients, and gets weight zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalLpInstance {
    pub dim: usize,
    pub support: Vec<usize>,
    /// `|θ_u − θ_v|` restricted to the support.
    pub objective: Vec<f64>,
    pub rows: Vec<MarginRow>,
    pub params: LocalParams,
}

impl LocalLpInstance {
    /// The program as a dense LP, including the normalization row.
    pub fn to_dense_lp(&self) -> DenseLp {
        let n = self.support.len();
        let mut constraints: Vec<Constraint> = self
            .rows
            .iter()
            .map(|r| Constraint::new(r.coeffs.clone(), r.sense, 0.0))
            .collect();
        constraints.push(Constraint::new(vec![1.0; n], Sense::Eq, 1.0));
        DenseLp {
            objective: self.objective.clone(),
            constraints,
        }
    }

    /// Largest margin-row violation of support weights `w`.
    pub fn max_violation(&self, w_support: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| Constraint::new(r.coeffs.clone(), r.sense, 0.0).violation(w_support))
            .fold(0.0, f64::max)
    }
}

/// Fitted local weights. Vertex solutions have at most a handful of
/// nonzeros, so only those are kept.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalWeights {
    Sparse {
        dim: usize,
        coords: Vec<usize>,
        values: Vec<f64>,
    },
    /// `w_i = 1/dim` everywhere.
    Uniform { dim: usize },
}

impl LocalWeights {
    pub fn dim(&self) -> usize {
        match self {
            LocalWeights::Sparse { dim, .. } | LocalWeights::Uniform { dim } => *dim,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            LocalWeights::Sparse {
                dim,
                coords,
                values,
            } => {
                let mut out = vec![0.0; *dim];
                for (&c, &x) in coords.iter().zip(values) {
                    out[c] = x;
                }
                out
            }
            LocalWeights::Uniform { dim } => vec![1.0 / *dim as f64; *dim],
        }
    }

    /// `w·|θ_a − θ_b|`
    pub fn dissimilarity(&self, features: &NodeFeatureMatrix, a: usize, b: usize) -> f64 {
        match self {
            LocalWeights::Sparse { coords, values, .. } => {
                let (ra, rb) = (features.row(a), features.row(b));
                coords
                    .iter()
                    .zip(values)
                    .map(|(&c, &w)| w * (ra.get(c) - rb.get(c)).abs())
                    .sum()
            }
            LocalWeights::Uniform { dim } => {
                if *dim == 0 {
                    0.0
                } else {
                    features.l1_distance(a, b) / *dim as f64
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// The program was infeasible (or numerically failed) and uniform
    /// weights were substituted.
    InfeasibleFallback,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalSolution {
    pub weights: LocalWeights,
    /// `w*·|θ_u − θ_v|`
    pub delta: f64,
    pub status: SolveStatus,
}

/// Average weighted dissimilarity between `u` and the members of `set`;
/// zero for the empty set.
pub fn set_dissimilarity(
    w: &LocalWeights,
    u: usize,
    set: &[usize],
    features: &NodeFeatureMatrix,
) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    set.iter().map(|&x| w.dissimilarity(features, u, x)).sum::<f64>() / set.len() as f64
}

/// Scatters a sparse row onto local positions of `support`.
fn scatter(row: FeatureRow<'_>, support: &[usize], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (&c, &x) in row.indices.iter().zip(row.values) {
        if let Ok(p) = support.binary_search(&c) {
            out[p] = x;
        }
    }
}

/// `Σ_{x∈set} |θ_anchor − θ_x|` over the local coordinates.
fn summed_abs_diff(
    anchor: &[f64],
    set: &[usize],
    features: &NodeFeatureMatrix,
    support: &[usize],
) -> Vec<f64> {
    // explicit per-coordinate hit counts keep all-equal coordinates exactly 0
    let mut acc = vec![0.0; anchor.len()];
    let mut hits = vec![0usize; anchor.len()];
    for &x in set {
        let r = features.row(x);
        for (&c, &val) in r.indices.iter().zip(r.values) {
            let p = support.binary_search(&c).expect("support covers all set members");
            acc[p] += (anchor[p] - val).abs();
            hits[p] += 1;
        }
    }
    for p in 0..anchor.len() {
        let misses = set.len() - hits[p];
        if misses > 0 {
            acc[p] += misses as f64 * anchor[p].abs();
        }
    }
    acc
}

/// Builds the local program for `(u, v)`, `u ≠ v`.
pub fn build_local_lp(
    g: &Graph,
    features: &NodeFeatureMatrix,
    u: usize,
    v: usize,
    params: LocalParams,
) -> Result<LocalLpInstance> {
    g.check_node(u)?;
    g.check_node(v)?;
    if u == v {
        return Err(crate::Error::InvalidParameter(format!(
            "local program needs distinct endpoints, got {u} twice"
        )));
    }
    let (gu, gv) = (g.neighbors(u), g.neighbors(v));
    let only_u = difference_sorted(gu, gv, v);
    let only_v = difference_sorted(gv, gu, u);

    let mut union: Vec<usize> = Vec::new();
    for &x in [u, v].iter().chain(&only_u).chain(&only_v) {
        union.extend_from_slice(features.row(x).indices);
    }
    union.sort_unstable();
    union.dedup();

    let s = union.len();
    let mut tu = vec![0.0; s];
    let mut tv = vec![0.0; s];
    scatter(features.row(u), &union, &mut tu);
    scatter(features.row(v), &union, &mut tv);
    let c: Vec<f64> = tu.iter().zip(&tv).map(|(a, b)| (a - b).abs()).collect();

    let mut rows = Vec::with_capacity(4);
    let mut push = |kind, set: &[usize], anchor: &[f64], margin: f64, sense| {
        let k = set.len() as f64;
        let sums = summed_abs_diff(anchor, set, features, &union);
        let coeffs = sums
            .iter()
            .zip(&c)
            .map(|(sm, ci)| sm / k - margin * ci)
            .collect();
        rows.push(MarginRow {
            kind,
            coeffs,
            sense,
        });
    };
    if !only_u.is_empty() {
        push(MarginKind::UCloseToOwn, &only_u, &tu, params.alpha, Sense::Le);
    }
    if !only_v.is_empty() {
        push(MarginKind::VCloseToOwn, &only_v, &tv, params.alpha, Sense::Le);
    }
    if !only_v.is_empty() {
        push(MarginKind::UFarFromOther, &only_v, &tu, params.beta, Sense::Ge);
    }
    if !only_u.is_empty() {
        push(MarginKind::VFarFromOther, &only_u, &tv, params.beta, Sense::Ge);
    }

    let keep: Vec<usize> = (0..s)
        .filter(|&p| c[p] != 0.0 || rows.iter().any(|r| r.coeffs[p] != 0.0))
        .collect();
    let support = keep.iter().map(|&p| union[p]).collect();
    let objective = keep.iter().map(|&p| c[p]).collect();
    for r in rows.iter_mut() {
        r.coeffs = keep.iter().map(|&p| r.coeffs[p]).collect();
    }
    Ok(LocalLpInstance {
        dim: features.dim(),
        support,
        objective,
        rows,
        params,
    })
}

/// Tolerance for accepting a simplex vertex as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

fn uniform_fallback(inst: &LocalLpInstance, status: SolveStatus) -> LocalSolution {
    // objective is zero off the support, so δ only sums support terms
    let delta = if inst.dim == 0 {
        0.0
    } else {
        inst.objective.iter().sum::<f64>() / inst.dim as f64
    };
    LocalSolution {
        weights: LocalWeights::Uniform { dim: inst.dim },
        delta,
        status,
    }
}

/// Solves the local program. Infeasible or numerically failed programs
/// fall back to uniform weights.
pub fn solve_dense_lp(inst: &LocalLpInstance) -> LocalSolution {
    if inst.support.is_empty() {
        // every coefficient vanishes: any simplex point is optimal
        return uniform_fallback(inst, SolveStatus::Optimal);
    }
    let mut w = match inst.to_dense_lp().solve() {
        LpOutcome::Optimal { x, .. } => x,
        _ => return uniform_fallback(inst, SolveStatus::InfeasibleFallback),
    };
    w.iter_mut().for_each(|x| *x = x.max(0.0));
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return uniform_fallback(inst, SolveStatus::InfeasibleFallback);
    }
    w.iter_mut().for_each(|x| *x /= total);
    if inst.max_violation(&w) > FEASIBILITY_TOL {
        return uniform_fallback(inst, SolveStatus::InfeasibleFallback);
    }
    let delta = w.iter().zip(&inst.objective).map(|(a, b)| a * b).sum();
    let (coords, values) = inst
        .support
        .iter()
        .zip(&w)
        .filter(|(_, &x)| x > 0.0)
        .map(|(&c, &x)| (c, x))
        .unzip();
    LocalSolution {
        weights: LocalWeights::Sparse {
            dim: inst.dim,
            coords,
            values,
        },
        delta,
        status: SolveStatus::Optimal,
    }
}

/// LL feature value with the solution that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct LlFeature {
    pub value: f64,
    /// `Δ(u, C) + Δ(v, C)` over common neighbors `C`.
    pub triangulated: f64,
    pub solution: LocalSolution,
}

/// `Δ̄_{w*}(u,v) − δ_uv`. The program is always built with the smaller id
/// first, so the feature is exactly symmetric in its endpoints.
pub fn ll_feature(
    g: &Graph,
    features: &NodeFeatureMatrix,
    u: usize,
    v: usize,
    params: LocalParams,
) -> Result<LlFeature> {
    let (a, b) = (u.min(v), u.max(v));
    let inst = build_local_lp(g, features, a, b, params)?;
    let solution = solve_dense_lp(&inst);
    let common = intersect_sorted(g.neighbors(a), g.neighbors(b));
    let triangulated = set_dissimilarity(&solution.weights, a, &common, features)
        + set_dissimilarity(&solution.weights, b, &common, features);
    Ok(LlFeature {
        value: triangulated - solution.delta,
        triangulated,
        solution,
    })
}
