//! Feature assembly and the global pairwise ranking model.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{adamic_adar, CommonNeighborWeight};
use crate::cocluster::CoclusterModel;
use crate::error::{Error, Result};
use crate::eval::{rank_candidates, Scored};
use crate::graph::{Graph, NodeFeatureMatrix};
use crate::local::{ll_feature, LocalParams};

/// Which feature blocks are enabled and whether pairwise products are added.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureConfig {
    pub aa: bool,
    pub ll: bool,
    pub cc: bool,
    pub quadratic: bool,
    pub local: LocalParams,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            aa: true,
            ll: true,
            cc: true,
            quadratic: false,
            local: LocalParams::default(),
        }
    }
}

impl FeatureConfig {
    pub fn blocks(aa: bool, ll: bool, cc: bool) -> Self {
        FeatureConfig {
            aa,
            ll,
            cc,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.aa || self.ll || self.cc) {
            return Err(Error::Config("at least one feature block must be enabled".into()));
        }
        self.local.validate()
    }

    /// Names of the linear features in layout order.
    pub fn base_names(&self) -> Vec<&'static str> {
        let mut names = Vec::with_capacity(4);
        if self.aa {
            names.push("aa");
        }
        if self.ll {
            names.push("ll");
        }
        if self.cc {
            names.push("cc_exist");
            names.push("cc_absent");
        }
        names
    }

    /// Names of every feature, products written `a*b`.
    pub fn names(&self) -> Vec<String> {
        let base = self.base_names();
        let mut out: Vec<String> = base.iter().map(|s| s.to_string()).collect();
        if self.quadratic {
            for i in 0..base.len() {
                for j in i..base.len() {
                    out.push(format!("{}*{}", base[i], base[j]));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        let d = self.base_names().len();
        if self.quadratic {
            d + d * (d + 1) / 2
        } else {
            d
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Compact layout descriptor such as `aa+ll+cc/linear`.
    pub fn descriptor(&self) -> String {
        let mut blocks = Vec::new();
        if self.aa {
            blocks.push("aa");
        }
        if self.ll {
            blocks.push("ll");
        }
        if self.cc {
            blocks.push("cc");
        }
        let form = if self.quadratic { "quadratic" } else { "linear" };
        format!("{}/{}", blocks.join("+"), form)
    }

    fn from_descriptor(s: &str) -> Result<Self> {
        let (blocks, form) = s
            .split_once('/')
            .ok_or_else(|| Error::Artifact(format!("bad layout descriptor {s:?}")))?;
        let mut cfg = FeatureConfig::blocks(false, false, false);
        for b in blocks.split('+') {
            match b {
                "aa" => cfg.aa = true,
                "ll" => cfg.ll = true,
                "cc" => cfg.cc = true,
                _ => return Err(Error::Artifact(format!("unknown feature block {b:?}"))),
            }
        }
        cfg.quadratic = match form {
            "linear" => false,
            "quadratic" => true,
            _ => return Err(Error::Artifact(format!("unknown layout form {form:?}"))),
        };
        Ok(cfg)
    }

    /// Appends all products `f_i f_j`, `i ≤ j`, when quadratic.
    pub fn expand(&self, mut base: Vec<f64>) -> Vec<f64> {
        if self.quadratic {
            let d = base.len();
            for i in 0..d {
                for j in i..d {
                    base.push(base[i] * base[j]);
                }
            }
        }
        base
    }
}

/// Everything needed to compute `f(u, v)` on a training graph.
#[derive(Clone, Copy)]
pub struct FeatureContext<'a> {
    pub graph: &'a Graph,
    pub features: &'a NodeFeatureMatrix,
    pub cocluster: Option<&'a CoclusterModel>,
    pub config: FeatureConfig,
}

impl<'a> FeatureContext<'a> {
    pub fn new(
        graph: &'a Graph,
        features: &'a NodeFeatureMatrix,
        cocluster: Option<&'a CoclusterModel>,
        config: FeatureConfig,
    ) -> Result<Self> {
        config.validate()?;
        if config.cc && cocluster.is_none() {
            return Err(Error::Config(
                "co-clustering block enabled but no co-cluster model supplied".into(),
            ));
        }
        if config.ll && features.node_count() != graph.node_count() {
            return Err(Error::Config(format!(
                "feature matrix has {} rows for a graph of {} nodes",
                features.node_count(),
                graph.node_count()
            )));
        }
        Ok(FeatureContext {
            graph,
            features,
            cocluster,
            config,
        })
    }

    /// Unstandardized feature vector, expanded if quadratic. An existing edge
    /// `(u, v)` does not influence AA or LL: neither looks at the pair's own
    /// edge.
    pub fn raw(&self, u: usize, v: usize) -> Result<Vec<f64>> {
        self.graph.check_node(u)?;
        self.graph.check_node(v)?;
        let mut f = Vec::with_capacity(4);
        if self.config.aa {
            f.push(adamic_adar(self.graph, u, v, CommonNeighborWeight::AdamicAdar));
        }
        if self.config.ll {
            f.push(ll_feature(self.graph, self.features, u, v, self.config.local)?.value);
        }
        if self.config.cc {
            let s = self.cocluster.expect("checked in constructor").surprise(u, v);
            f.push(s.exist);
            f.push(s.absent);
        }
        Ok(self.config.expand(f))
    }
}

/// Raw feature vectors of one training query.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryFeatures {
    pub good: Vec<Vec<f64>>,
    pub bad: Vec<Vec<f64>>,
}

/// Per-dimension affine map to zero mean and unit variance.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Population statistics; constant dimensions get `std = 1`.
    pub fn fit<'x>(dim: usize, rows: impl Iterator<Item = &'x [f64]> + Clone) -> Self {
        let mut mean = vec![0.0; dim];
        let mut n = 0usize;
        for r in rows.clone() {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
            n += 1;
        }
        let nf = n.max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / nf).sqrt();
                if sd > 1e-12 * m.abs().max(1.0) {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn identity(dim: usize) -> Self {
        Standardizer {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn apply(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

/// Stochastic training hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainParams {
    pub lambda: f64,
    pub epochs: usize,
    pub triples_per_epoch: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            lambda: 1e-4,
            epochs: 30,
            triples_per_epoch: 100_000,
            seed: 0,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) || self.epochs == 0 || self.triples_per_epoch == 0 {
            return Err(Error::InvalidParameter(format!(
                "training needs lambda > 0, epochs >= 1, triples >= 1; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Linear scoring model `ν · standardize(f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankModel {
    pub layout: FeatureConfig,
    pub standardizer: Standardizer,
    pub nu: Vec<f64>,
    pub params: TrainParams,
    /// Mean hinge loss over the triples sampled in each epoch.
    pub loss_trace: Vec<f64>,
}

impl RankModel {
    /// A fixed model; used for oracle comparisons and for reloading.
    pub fn fixed(layout: FeatureConfig, standardizer: Standardizer, nu: Vec<f64>) -> Result<Self> {
        if nu.len() != layout.len() || standardizer.mean.len() != nu.len() {
            return Err(Error::Config(format!(
                "model of length {} does not match layout {}",
                nu.len(),
                layout.descriptor()
            )));
        }
        Ok(RankModel {
            layout,
            standardizer,
            nu,
            params: TrainParams::default(),
            loss_trace: Vec::new(),
        })
    }

    pub fn score(&self, raw: &[f64]) -> f64 {
        self.standardizer
            .apply(raw)
            .iter()
            .zip(&self.nu)
            .map(|(x, w)| x * w)
            .sum()
    }

    /// Scores every candidate and ranks by descending score, ties by
    /// ascending node id.
    pub fn score_and_rank(
        &self,
        ctx: &FeatureContext<'_>,
        q: usize,
        candidates: &[usize],
    ) -> Result<Vec<Scored>> {
        if ctx.config.len() != self.nu.len() || ctx.config.descriptor() != self.layout.descriptor() {
            return Err(Error::Config(format!(
                "model layout {} differs from feature layout {}",
                self.layout.descriptor(),
                ctx.config.descriptor()
            )));
        }
        let mut scored = Vec::with_capacity(candidates.len());
        for &v in candidates {
            if v == q {
                return Err(Error::InvalidParameter(format!("candidate list contains the query {q}")));
            }
            scored.push(Scored {
                node: v,
                score: self.score(&ctx.raw(q, v)?),
            });
        }
        Ok(rank_candidates(scored))
    }

    /// `Σ_q mean_{g,b} hinge(ν·(x_g − x_b))` averaged over queries, plus the
    /// `λ/2 ‖ν‖²` term, on standardized features.
    pub fn pairwise_objective(&self, data: &[QueryFeatures]) -> f64 {
        let mut total = 0.0;
        let mut nq = 0usize;
        for q in data {
            if q.good.is_empty() || q.bad.is_empty() {
                continue;
            }
            let sg: Vec<f64> = q.good.iter().map(|x| self.score(x)).collect();
            let sb: Vec<f64> = q.bad.iter().map(|x| self.score(x)).collect();
            let mut s = 0.0;
            for g in &sg {
                for b in &sb {
                    s += (1.0 - (g - b)).max(0.0);
                }
            }
            total += s / (sg.len() * sb.len()) as f64;
            nq += 1;
        }
        let reg: f64 = self.nu.iter().map(|w| w * w).sum::<f64>() * self.params.lambda / 2.0;
        total / nq.max(1) as f64 + reg
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let mut s = String::from("linkpred-rank-model 1\n");
        let l = &self.layout;
        let _ = writeln!(s, "layout {}", l.descriptor());
        let _ = writeln!(s, "local_alpha {:?}", l.local.alpha);
        let _ = writeln!(s, "local_beta {:?}", l.local.beta);
        let _ = writeln!(s, "names {}", l.names().join(" "));
        let p = &self.params;
        let _ = writeln!(s, "lambda {:?}", p.lambda);
        let _ = writeln!(s, "epochs {}", p.epochs);
        let _ = writeln!(s, "triples_per_epoch {}", p.triples_per_epoch);
        let _ = writeln!(s, "seed {}", p.seed);
        let _ = writeln!(s, "mean {}", join(&self.standardizer.mean));
        let _ = writeln!(s, "std {}", join(&self.standardizer.std));
        let _ = writeln!(s, "nu {}", join(&self.nu));
        let _ = writeln!(s, "loss_trace {}", join(&self.loss_trace));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("linkpred-rank-model 1") {
            return Err(Error::Artifact("missing rank model header".into()));
        }
        let mut fields = std::collections::HashMap::new();
        for line in lines {
            let (k, v) = line.split_once(' ').unwrap_or((line, ""));
            fields.insert(k, v);
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::Artifact(format!("rank model lacks field {k}")))
        };
        let real = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Artifact(format!("bad value for {k}")))
        };
        let int = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Artifact(format!("bad value for {k}")))
        };
        let reals = |k: &str| -> Result<Vec<f64>> {
            get(k)?
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| Error::Artifact(format!("bad value in {k}"))))
                .collect()
        };
        let mut layout = FeatureConfig::from_descriptor(get("layout")?)?;
        layout.local = LocalParams {
            alpha: real("local_alpha")?,
            beta: real("local_beta")?,
        };
        let mut model = RankModel::fixed(
            layout,
            Standardizer {
                mean: reals("mean")?,
                std: reals("std")?,
            },
            reals("nu")?,
        )
        .map_err(|e| Error::Artifact(e.to_string()))?;
        if model.standardizer.std.len() != model.nu.len() {
            return Err(Error::Artifact("standardizer length mismatch".into()));
        }
        model.params = TrainParams {
            lambda: real("lambda")?,
            epochs: int("epochs")? as usize,
            triples_per_epoch: int("triples_per_epoch")? as usize,
            seed: int("seed")?,
        };
        model.loss_trace = reals("loss_trace")?;
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

/// Averaged stochastic subgradient descent with step `1/(λt)` and projection
/// onto the ball of radius `1/√λ`. `draw` produces one difference vector
/// (already standardized) to push above margin 1.
fn pegasos<F>(dim: usize, params: &TrainParams, per_epoch: usize, mut draw: F) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(&mut ChaCha8Rng) -> Vec<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let lambda = params.lambda;
    let radius = 1.0 / lambda.sqrt();
    let mut w = vec![0.0; dim];
    let mut avg = vec![0.0; dim];
    let mut averaged = 0usize;
    let mut trace = Vec::with_capacity(params.epochs);
    let mut t = 0usize;
    for epoch in 0..params.epochs {
        let mut loss = 0.0;
        for _ in 0..per_epoch {
            t += 1;
            let x = draw(&mut rng);
            let margin: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
            loss += (1.0 - margin).max(0.0);
            let eta = 1.0 / (lambda * t as f64);
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|a| *a *= shrink);
            if margin < 1.0 {
                w.iter_mut().zip(&x).for_each(|(a, b)| *a += eta * b);
            }
            let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > radius {
                let c = radius / norm;
                w.iter_mut().for_each(|a| *a *= c);
            }
            // the first epoch is burn-in unless it is the only one
            if epoch > 0 || params.epochs == 1 {
                averaged += 1;
                let r = 1.0 / averaged as f64;
                avg.iter_mut().zip(&w).for_each(|(m, a)| *m += (a - *m) * r);
            }
        }
        trace.push(loss / per_epoch as f64);
    }
    (avg, trace)
}

/// Fits `ν` on pairwise hinge loss over sampled `(q, g, b)` triples; `q`,
/// `g` and `b` are drawn uniformly, which weights each query's pairs by
/// `1/(|G(q)||B(q)|)`.
pub fn train_ranker(
    data: &[QueryFeatures],
    layout: FeatureConfig,
    params: TrainParams,
) -> Result<RankModel> {
    layout.validate()?;
    params.validate()?;
    let dim = layout.len();
    let usable: Vec<&QueryFeatures> = data
        .iter()
        .filter(|q| !q.good.is_empty() && !q.bad.is_empty())
        .collect();
    if usable.is_empty() {
        return Err(Error::Training("no query has both a good and a bad training node".into()));
    }
    for q in &usable {
        if q.good.iter().chain(&q.bad).any(|x| x.len() != dim) {
            return Err(Error::Training(format!(
                "feature vector length differs from layout {}",
                layout.descriptor()
            )));
        }
    }
    let standardizer = Standardizer::fit(
        dim,
        usable
            .iter()
            .flat_map(|q| q.good.iter().chain(&q.bad))
            .map(|x| x.as_slice()),
    );
    let std_q: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = usable
        .iter()
        .map(|q| {
            (
                q.good.iter().map(|x| standardizer.apply(x)).collect(),
                q.bad.iter().map(|x| standardizer.apply(x)).collect(),
            )
        })
        .collect();
    let total: u128 = std_q
        .iter()
        .map(|(g, b)| g.len() as u128 * b.len() as u128)
        .sum();
    let per_epoch = (params.triples_per_epoch as u128).min(total) as usize;
    let (nu, loss_trace) = pegasos(dim, &params, per_epoch, |rng| {
        let (g, b) = &std_q[rng.gen_range(0..std_q.len())];
        let xg = &g[rng.gen_range(0..g.len())];
        let xb = &b[rng.gen_range(0..b.len())];
        xg.iter().zip(xb).map(|(a, c)| a - c).collect()
    });
    if nu.iter().any(|w| !w.is_finite()) {
        return Err(Error::Training("weights diverged".into()));
    }
    Ok(RankModel {
        layout,
        standardizer,
        nu,
        params,
        loss_trace,
    })
}

/// Item-wise alternative: hinge `max(0, 1 − y ν·x)` over labeled pairs, no
/// bias term.
pub fn train_itemwise(
    pairs: &[(Vec<f64>, bool)],
    layout: FeatureConfig,
    params: TrainParams,
) -> Result<RankModel> {
    layout.validate()?;
    params.validate()?;
    let dim = layout.len();
    let positives = pairs.iter().filter(|p| p.1).count();
    if positives == 0 || positives == pairs.len() {
        return Err(Error::Training("item-wise training needs both labels".into()));
    }
    if pairs.iter().any(|p| p.0.len() != dim) {
        return Err(Error::Training("feature vector length differs from layout".into()));
    }
    let standardizer = Standardizer::fit(dim, pairs.iter().map(|p| p.0.as_slice()));
    let signed: Vec<Vec<f64>> = pairs
        .iter()
        .map(|(x, y)| {
            let s = if *y { 1.0 } else { -1.0 };
            standardizer.apply(x).into_iter().map(|a| s * a).collect()
        })
        .collect();
    let per_epoch = params.triples_per_epoch.min(signed.len());
    let (nu, loss_trace) = pegasos(dim, &params, per_epoch, |rng| {
        signed[rng.gen_range(0..signed.len())].clone()
    });
    Ok(RankModel {
        layout,
        standardizer,
        nu,
        params,
        loss_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocluster::{fit_cocluster, CoclusterParams};

    fn aa_only() -> FeatureConfig {
        FeatureConfig::blocks(true, false, false)
    }

    #[test]
    fn layout_lengths() {
        assert_eq!(FeatureConfig::default().len(), 4);
        assert_eq!(FeatureConfig::blocks(false, true, true).len(), 3);
        assert_eq!(FeatureConfig::blocks(true, true, false).len(), 2);
        let q = FeatureConfig {
            quadratic: true,
            ..Default::default()
        };
        assert_eq!(q.len(), 14);
        assert_eq!(q.names().len(), 14);
        assert_eq!(q.expand(vec![1.0, 2.0, 3.0, 4.0]).len(), 14);
        assert!(FeatureConfig::blocks(false, false, false).validate().is_err());
    }

    #[test]
    fn context_requires_cocluster_for_cc() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let f = NodeFeatureMatrix::zeros(3, 2);
        assert!(matches!(
            FeatureContext::new(&g, &f, None, FeatureConfig::default()),
            Err(Error::Config(_))
        ));
        let m = fit_cocluster(&g, &CoclusterParams::with_default_k(3, 0)).unwrap();
        let ctx = FeatureContext::new(&g, &f, Some(&m), FeatureConfig::default()).unwrap();
        assert_eq!(ctx.raw(0, 2).unwrap().len(), 4);
    }

    #[test]
    fn standardizer_constant_dim() {
        let rows = [vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(2, rows.iter().map(|r| r.as_slice()));
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        assert_eq!(s.apply(&[3.0, 5.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn separable_training() {
        let layout = FeatureConfig::blocks(true, true, false);
        let data: Vec<QueryFeatures> = (0..5)
            .map(|_| QueryFeatures {
                good: vec![vec![1.0, 0.0]; 3],
                bad: vec![vec![0.0, 1.0]; 4],
            })
            .collect();
        let m = train_ranker(&data, layout, TrainParams::default()).unwrap();
        assert!(m.score(&[1.0, 0.0]) > m.score(&[0.0, 1.0]));
        assert_eq!(m.loss_trace.len(), 30);
        assert!(m.loss_trace.last().unwrap() <= &m.loss_trace[0]);
    }

    #[test]
    fn identical_features_give_no_separation() {
        let data = vec![QueryFeatures {
            good: vec![vec![0.5]],
            bad: vec![vec![0.5]],
        }];
        let m = train_ranker(&data, aa_only(), TrainParams::default()).unwrap();
        assert_eq!(m.score(&[0.5]), 0.0);
        assert!((m.pairwise_objective(&data) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_triples_is_an_error() {
        let data = vec![QueryFeatures {
            good: vec![vec![1.0]],
            bad: vec![],
        }];
        assert!(matches!(
            train_ranker(&data, aa_only(), TrainParams::default()),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn single_pair_direction() {
        let layout = FeatureConfig::blocks(true, true, false);
        let data = vec![
            QueryFeatures {
                good: vec![vec![2.0, 1.0]],
                bad: vec![vec![0.0, 1.0]],
            },
        ];
        let m = train_ranker(&data, layout, TrainParams::default()).unwrap();
        // second coordinate is constant, so only the first carries weight
        assert!(m.nu[0] > 0.0);
        assert_eq!(m.nu[1], 0.0);
        assert!(m.pairwise_objective(&data) < 0.01);
    }

    #[test]
    fn itemwise_examples() {
        let pairs = vec![(vec![1.0], true), (vec![2.0], true), (vec![-1.0], false)];
        let m = train_itemwise(&pairs, aa_only(), TrainParams::default()).unwrap();
        assert!(m.nu[0] > 0.0);
        let one_class = vec![(vec![1.0], true)];
        assert!(train_itemwise(&one_class, aa_only(), TrainParams::default()).is_err());
        let heavy = TrainParams {
            lambda: 1e6,
            ..Default::default()
        };
        let m = train_itemwise(&pairs, aa_only(), heavy).unwrap();
        assert!(m.nu[0].abs() < 1e-5);
    }

    #[test]
    fn score_and_rank_ties_and_errors() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let f = NodeFeatureMatrix::zeros(4, 1);
        let ctx = FeatureContext::new(&g, &f, None, aa_only()).unwrap();
        let m = RankModel::fixed(aa_only(), Standardizer::identity(1), vec![1.0]).unwrap();
        let r = m.score_and_rank(&ctx, 1, &[2, 0]).unwrap();
        assert_eq!(r.iter().map(|s| s.node).collect::<Vec<_>>(), vec![2, 0]);
        assert_eq!(m.score_and_rank(&ctx, 1, &[2]).unwrap().len(), 1);
        assert!(m.score_and_rank(&ctx, 1, &[]).unwrap().is_empty());
        assert!(m.score_and_rank(&ctx, 1, &[1]).is_err());
    }

    #[test]
    fn model_text_round_trip() {
        let data = vec![QueryFeatures {
            good: vec![vec![2.0, 1.0, 0.3, 0.1]],
            bad: vec![vec![0.0, 1.5, 0.2, 0.4], vec![0.1, 0.0, 3.0, 0.2]],
        }];
        let m = train_ranker(&data, FeatureConfig::default(), TrainParams::default()).unwrap();
        let back = RankModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(RankModel::from_text("nope").is_err());
    }
}
