//! Evaluation protocol: query sampling, per-query train/test splits of good
//! and bad candidates, and ranking metrics (precision/recall at k, average
//! precision, pairwise AUC, workload bins).

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::derive_seed;

/// Nodes with at least one neighbor and at least one non-neighbor two hops
/// away, i.e. with some triangle-closing candidate.
pub fn eligible_queries(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut mark = vec![usize::MAX; n];
    (0..n)
        .filter(|&q| {
            let nb = g.neighbors(q);
            if nb.is_empty() {
                return false;
            }
            mark[q] = q;
            for &x in nb {
                mark[x] = q;
            }
            nb.iter()
                .any(|&x| g.neighbors(x).iter().any(|&y| mark[y] != q))
        })
        .collect()
}

/// Uniform sample without replacement of `budget` eligible nodes, sorted.
pub fn sample_queries(g: &Graph, budget: usize, seed: u64) -> Result<Vec<usize>> {
    if budget == 0 {
        return Err(Error::InvalidParameter("query budget must be >= 1".into()));
    }
    let eligible = eligible_queries(g);
    if eligible.is_empty() {
        return Err(Error::NoEligibleQueries);
    }
    if budget >= eligible.len() {
        return Ok(eligible);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<usize> = sample(&mut rng, eligible.len(), budget)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    q.sort_unstable();
    Ok(q)
}

/// Per-query partition of good (neighbor) and bad (non-neighbor) nodes.
/// All lists are sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct QuerySplit {
    pub query: usize,
    pub train_good: Vec<usize>,
    pub test_good: Vec<usize>,
    pub train_bad: Vec<usize>,
    pub test_bad: Vec<usize>,
    pub sigma: f64,
}

impl QuerySplit {
    /// Test pool `test_good ∪ test_bad`, sorted.
    pub fn test_pool(&self) -> Vec<usize> {
        let mut pool: Vec<usize> = self.test_good.iter().chain(&self.test_bad).copied().collect();
        pool.sort_unstable();
        pool
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SplitOutcome {
    Split(QuerySplit),
    /// Sampling would leave no test good or no test bad node.
    Discard { query: usize },
}

/// `⌈σ n⌉`, robust to representation error in `σ` (e.g. `0.7 × 10`).
pub fn train_count(n: usize, sigma: f64) -> usize {
    let x = sigma * n as f64;
    ((x - 1e-9 * x.max(1.0)).ceil().max(0.0) as usize).min(n)
}

fn sample_sorted(pool: &[usize], k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut chosen = vec![false; pool.len()];
    for i in sample(rng, pool.len(), k) {
        chosen[i] = true;
    }
    let (mut train, mut test) = (Vec::with_capacity(k), Vec::with_capacity(pool.len() - k));
    for (i, &x) in pool.iter().enumerate() {
        if chosen[i] {
            train.push(x);
        } else {
            test.push(x);
        }
    }
    (train, test)
}

/// Samples `⌈σ|G(q)|⌉` good and `⌈σ|B(q)|⌉` bad training nodes for `q`.
/// The RNG is derived from `(seed, q)`, so the result does not depend on
/// which other queries are split.
pub fn split_edges(g: &Graph, q: usize, sigma: f64, seed: u64) -> Result<SplitOutcome> {
    g.check_node(q)?;
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sampling fraction must lie in (0, 1), got {sigma}"
        )));
    }
    let good = g.neighbors(q);
    let mut bad = Vec::with_capacity(g.node_count() - good.len());
    let mut j = 0;
    for v in 0..g.node_count() {
        if j < good.len() && good[j] == v {
            j += 1;
        } else if v != q {
            bad.push(v);
        }
    }
    let (ng, nb) = (train_count(good.len(), sigma), train_count(bad.len(), sigma));
    if ng == good.len() || nb == bad.len() {
        return Ok(SplitOutcome::Discard { query: q });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "split", q as u64));
    let (train_good, test_good) = sample_sorted(good, ng, &mut rng);
    let (train_bad, test_bad) = sample_sorted(&bad, nb, &mut rng);
    Ok(SplitOutcome::Split(QuerySplit {
        query: q,
        train_good,
        test_good,
        train_bad,
        test_bad,
        sigma,
    }))
}

/// `g` minus every test edge `(q, t)`, `t ∈ test_good(q)`.
pub fn build_training_graph(g: &Graph, splits: &[QuerySplit]) -> Graph {
    let removed: HashSet<(usize, usize)> = splits
        .iter()
        .flat_map(|s| s.test_good.iter().map(move |&t| (s.query.min(t), s.query.max(t))))
        .collect();
    g.without_edges(&removed)
}

/// SHA-256 over a canonical listing of the splits.
pub fn splits_hash(splits: &[QuerySplit]) -> String {
    let mut h = Sha256::new();
    for s in splits {
        let line = format!(
            "{}|{:?}|{:?}|{:?}|{:?}|{}\n",
            s.query, s.train_good, s.test_good, s.train_bad, s.test_bad, s.sigma
        );
        h.update(line.as_bytes());
    }
    hex::encode(h.finalize())
}

/// A scored candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scored {
    pub node: usize,
    pub score: f64,
}

/// Sorts by descending score, ties by ascending node id.
pub fn rank_candidates(mut scored: Vec<Scored>) -> Vec<Scored> {
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.node.cmp(&b.node)));
    scored
}

/// `(P_q(k), R_q(k))`; `None` when the relevant set is empty.
pub fn precision_recall_at_k(
    ranked: &[usize],
    relevant: &HashSet<usize>,
    k: usize,
) -> Result<Option<(f64, f64)>> {
    if k == 0 || k > ranked.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} outside 1..={}",
            ranked.len()
        )));
    }
    if relevant.is_empty() {
        return Ok(None);
    }
    let hits = ranked[..k].iter().filter(|x| relevant.contains(x)).count() as f64;
    Ok(Some((hits / k as f64, hits / relevant.len() as f64)))
}

/// `(1/L) Σ_k P_q(k) r_q(k)` with `L` the number of relevant items in the
/// list; `None` when there are none.
pub fn average_precision(ranked: &[usize], relevant: &HashSet<usize>) -> Option<f64> {
    let flags: Vec<bool> = ranked.iter().map(|x| relevant.contains(x)).collect();
    average_precision_flags(&flags)
}

pub fn average_precision_flags(relevance: &[bool]) -> Option<f64> {
    let (mut hits, mut sum) = (0usize, 0.0);
    for (i, &r) in relevance.iter().enumerate() {
        if r {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    (hits > 0).then(|| sum / hits as f64)
}

/// Fraction of good-bad pairs ordered correctly, ties counting one half.
pub fn auc_pairs(good: &[f64], bad: &[f64]) -> Result<f64> {
    if good.is_empty() || bad.is_empty() {
        return Err(Error::InvalidParameter("AUC needs non-empty good and bad sets".into()));
    }
    let mut sorted = bad.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut correct = 0.0;
    for &s in good {
        let below = sorted.partition_point(|&b| b < s);
        let not_above = sorted.partition_point(|&b| b <= s);
        correct += below as f64 + 0.5 * (not_above - below) as f64;
    }
    Ok(correct / (good.len() * bad.len()) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinAxis {
    Degree,
    Triangles,
}

impl BinAxis {
    pub fn name(self) -> &'static str {
        match self {
            BinAxis::Degree => "degree",
            BinAxis::Triangles => "triangles",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkloadBin {
    pub members: Vec<usize>,
    /// Smallest and largest statistic in the bin.
    pub lo: usize,
    pub hi: usize,
}

pub const WORKLOAD_BINS: usize = 6;

/// Splits `(node, statistic)` pairs into six contiguous buckets ordered by
/// `(statistic, node)`; sizes differ by at most one, with the remainder
/// going to the first buckets. Fewer than six items give a single bucket.
pub fn workload_bins(items: &[(usize, usize)]) -> Vec<WorkloadBin> {
    let mut sorted = items.to_vec();
    sorted.sort_by_key(|&(node, stat)| (stat, node));
    let make = |chunk: &[(usize, usize)]| WorkloadBin {
        members: chunk.iter().map(|x| x.0).collect(),
        lo: chunk.first().map_or(0, |x| x.1),
        hi: chunk.last().map_or(0, |x| x.1),
    };
    if sorted.len() < WORKLOAD_BINS {
        log::warn!(
            "only {} queries; reporting a single workload bin",
            sorted.len()
        );
        return vec![make(&sorted)];
    }
    let base = sorted.len() / WORKLOAD_BINS;
    let extra = sorted.len() % WORKLOAD_BINS;
    let mut out = Vec::with_capacity(WORKLOAD_BINS);
    let mut start = 0;
    for b in 0..WORKLOAD_BINS {
        let len = base + usize::from(b < extra);
        out.push(make(&sorted[start..start + len]));
        start += len;
    }
    out
}

pub fn axis_statistic(g: &Graph, q: usize, axis: BinAxis) -> usize {
    match axis {
        BinAxis::Degree => g.degree(q),
        BinAxis::Triangles => g.triangle_count(q),
    }
}

/// Ranked test pool of one query with ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryRanking {
    pub query: usize,
    pub degree: usize,
    pub triangles: usize,
    pub ranked: Vec<Scored>,
    /// Aligned with `ranked`: is the candidate a held-out neighbor.
    pub relevant: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryMetrics {
    pub query: usize,
    pub degree: usize,
    pub triangles: usize,
    pub avp: f64,
    pub auc: f64,
    pub pool: usize,
    pub relevant: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinMetrics {
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
    pub map: f64,
}

/// Aggregated metrics over the evaluated queries.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub queries: Vec<QueryMetrics>,
    pub map: f64,
    pub auc: f64,
    /// `Precision(k)` and `Recall(k)` for `k = 1..=depth`.
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub degree_bins: Vec<BinMetrics>,
    pub triangle_bins: Vec<BinMetrics>,
}

impl MetricsReport {
    /// Aggregates per-query rankings. Queries without a relevant or without
    /// an irrelevant candidate are skipped. For `k` beyond a query's pool the
    /// list is treated as exhausted: `P = hits/k`, `R = hits/L`.
    pub fn compute(rankings: &[QueryRanking], curve_depth: usize) -> Self {
        let mut queries = Vec::new();
        let mut precision = vec![0.0; curve_depth];
        let mut recall = vec![0.0; curve_depth];
        for r in rankings {
            let total = r.relevant.iter().filter(|&&x| x).count();
            if total == 0 || total == r.relevant.len() {
                continue;
            }
            let avp = average_precision_flags(&r.relevant).expect("non-empty relevant set");
            let (good, bad): (Vec<_>, Vec<_>) = r
                .ranked
                .iter()
                .zip(&r.relevant)
                .partition(|(_, &rel)| rel);
            let good: Vec<f64> = good.iter().map(|(s, _)| s.score).collect();
            let bad: Vec<f64> = bad.iter().map(|(s, _)| s.score).collect();
            let auc = auc_pairs(&good, &bad).expect("both sides non-empty");
            let mut hits = 0usize;
            for k in 1..=curve_depth {
                if k <= r.relevant.len() && r.relevant[k - 1] {
                    hits += 1;
                }
                precision[k - 1] += hits as f64 / k as f64;
                recall[k - 1] += hits as f64 / total as f64;
            }
            queries.push(QueryMetrics {
                query: r.query,
                degree: r.degree,
                triangles: r.triangles,
                avp,
                auc,
                pool: r.ranked.len(),
                relevant: total,
            });
        }
        let nq = queries.len().max(1) as f64;
        precision.iter_mut().for_each(|x| *x /= nq);
        recall.iter_mut().for_each(|x| *x /= nq);
        let mean = |f: &dyn Fn(&QueryMetrics) -> f64| {
            if queries.is_empty() {
                0.0
            } else {
                queries.iter().map(f).sum::<f64>() / queries.len() as f64
            }
        };
        let map = mean(&|q| q.avp);
        let auc = mean(&|q| q.auc);
        let degree_bins = bin_metrics(&queries, BinAxis::Degree);
        let triangle_bins = bin_metrics(&queries, BinAxis::Triangles);
        MetricsReport {
            map,
            auc,
            precision,
            recall,
            degree_bins,
            triangle_bins,
            queries,
        }
    }

    pub fn bins(&self, axis: BinAxis) -> &[BinMetrics] {
        match axis {
            BinAxis::Degree => &self.degree_bins,
            BinAxis::Triangles => &self.triangle_bins,
        }
    }

    /// Flat `key = value` summary. Reals print in shortest round-trip form.
    pub fn summary_text(&self, header: &[(String, String)]) -> String {
        let mut s = String::new();
        for (k, v) in header {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "queries_evaluated = {}", self.queries.len());
        let _ = writeln!(s, "map = {}", self.map);
        let _ = writeln!(s, "auc = {}", self.auc);
        for k in [1, 5, 10, 20] {
            if k <= self.precision.len() {
                let _ = writeln!(s, "precision_at_{k} = {}", self.precision[k - 1]);
                let _ = writeln!(s, "recall_at_{k} = {}", self.recall[k - 1]);
            }
        }
        s
    }

    pub fn per_query_tsv(&self) -> String {
        let mut s = String::from("query\tdegree\ttriangles\tavp\tauc\tpool\trelevant\n");
        for q in &self.queries {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                q.query, q.degree, q.triangles, q.avp, q.auc, q.pool, q.relevant
            );
        }
        s
    }

    pub fn pr_curve_tsv(&self) -> String {
        let mut s = String::from("k\tprecision\trecall\n");
        for (i, (p, r)) in self.precision.iter().zip(&self.recall).enumerate() {
            let _ = writeln!(s, "{}\t{p}\t{r}", i + 1);
        }
        s
    }

    pub fn bins_tsv(&self, axis: BinAxis) -> String {
        let mut s = format!("bin\t{0}_lo\t{0}_hi\tqueries\tmap\n", axis.name());
        for (i, b) in self.bins(axis).iter().enumerate() {
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", i + 1, b.lo, b.hi, b.count, b.map);
        }
        s
    }
}

fn bin_metrics(queries: &[QueryMetrics], axis: BinAxis) -> Vec<BinMetrics> {
    if queries.is_empty() {
        return Vec::new();
    }
    let items: Vec<(usize, usize)> = queries
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let stat = match axis {
                BinAxis::Degree => q.degree,
                BinAxis::Triangles => q.triangles,
            };
            (i, stat)
        })
        .collect();
    workload_bins(&items)
        .into_iter()
        .map(|b| BinMetrics {
            lo: b.lo,
            hi: b.hi,
            count: b.members.len(),
            map: b.members.iter().map(|&i| queries[i].avp).sum::<f64>() / b.members.len() as f64,
        })
        .collect()
}

/// Serializes rankings as `query degree triangles rank node score relevant`
/// rows; scores keep full precision so metrics can be recomputed exactly.
pub fn rankings_tsv(rankings: &[QueryRanking]) -> String {
    let mut s = String::from("query\tdegree\ttriangles\trank\tnode\tscore\trelevant\n");
    for r in rankings {
        for (i, (c, rel)) in r.ranked.iter().zip(&r.relevant).enumerate() {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{:?}\t{}",
                r.query,
                r.degree,
                r.triangles,
                i + 1,
                c.node,
                c.score,
                u8::from(*rel)
            );
        }
    }
    s
}

pub fn parse_rankings_tsv(text: &str) -> Result<Vec<QueryRanking>> {
    let mut out: Vec<QueryRanking> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let bad = || Error::Artifact(format!("rankings line {}: malformed row", i + 1));
        if f.len() != 7 {
            return Err(bad());
        }
        let int = |k: usize| f[k].parse::<usize>().map_err(|_| bad());
        let (query, degree, triangles, node) = (int(0)?, int(1)?, int(2)?, int(4)?);
        let score: f64 = f[5].parse().map_err(|_| bad())?;
        let rel = match f[6] {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        };
        match out.last_mut() {
            Some(r) if r.query == query => {
                r.ranked.push(Scored { node, score });
                r.relevant.push(rel);
            }
            _ => out.push(QueryRanking {
                query,
                degree,
                triangles,
                ranked: vec![Scored { node, score }],
                relevant: vec![rel],
            }),
        }
    }
    Ok(out)
}
