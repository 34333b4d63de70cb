//! End-to-end benchmark run: load, sample, split, fit, train, score,
//! evaluate, write.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use linkpred::baselines::{
    adamic_adar, crw_scores_from, propflow, CommonNeighborWeight, Katz,
};
use linkpred::cocluster::{fit_cocluster, fit_restarts, CoclusterKey, CoclusterModel, CoclusterParams};
use linkpred::dataset::{read_dense_table, synth_planted_blocks, DatasetBundle};
use linkpred::eval::{
    average_precision_flags, build_training_graph, rank_candidates, sample_queries, split_edges,
    splits_hash, MetricsReport, QueryRanking, QuerySplit, Scored, SplitOutcome,
};
use linkpred::local::ll_feature;
use linkpred::ranker::{train_ranker, FeatureContext, QueryFeatures, RankModel};
use linkpred::seed::derive_seed;
use linkpred::{Graph, NodeFeatureMatrix};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{DatasetSource, Method, RunConfig};

pub fn load_dataset(cfg: &RunConfig) -> Result<DatasetBundle> {
    let bundle = match cfg.dataset_source()? {
        DatasetSource::Corpus(c) => {
            if !c.available(&cfg.data_dir) {
                bail!(
                    "corpus {} not found below {} (expected {})",
                    c.name(),
                    cfg.data_dir.display(),
                    c.files(&cfg.data_dir)
                        .iter()
                        .map(|p| p.display().to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                );
            }
            c.load(&cfg.data_dir)?
        }
        DatasetSource::Planted {
            groups,
            within,
            across,
            seed,
        } => synth_planted_blocks(&groups, within, across, seed)?,
        DatasetSource::EdgeList {
            edges,
            features,
            feature_dim,
        } => {
            let graph = Graph::read_edge_list(&edges)?;
            let n = graph.node_count();
            let feats = match features {
                None => NodeFeatureMatrix::zeros(n, 1),
                Some(p) => {
                    let table = read_dense_table(&p, feature_dim)?;
                    // rows are keyed by node id
                    let mut rows = vec![Vec::new(); n];
                    for (k, id) in table.ids.iter().enumerate() {
                        let u: usize = id
                            .parse()
                            .map_err(|_| anyhow!("feature row id {id:?} is not a node id"))?;
                        if u >= n {
                            bail!("feature row for node {u} but the graph has {n} nodes");
                        }
                        let r = table.features.row(k);
                        rows[u] = r.indices.iter().copied().zip(r.values.iter().copied()).collect();
                    }
                    NodeFeatureMatrix::from_sparse_rows(feature_dim, rows)?
                }
            };
            DatasetBundle {
                name: edges.display().to_string(),
                node_ids: (0..n).map(|u| u.to_string()).collect(),
                labels: Vec::new(),
                provenance: Vec::new(),
                raw_links: graph.edge_count(),
                dropped_links: 0,
                graph,
                features: feats,
            }
        }
    };
    Ok(bundle)
}

/// Queries, their splits and the training graph.
pub struct Prepared {
    pub queries: Vec<usize>,
    pub splits: Vec<QuerySplit>,
    pub discarded: usize,
    pub train_graph: Graph,
    pub split_hash: String,
}

pub fn prepare(cfg: &RunConfig, bundle: &DatasetBundle) -> Result<Prepared> {
    let g = &bundle.graph;
    let queries = sample_queries(g, cfg.queries, derive_seed(cfg.master_seed, "queries", 0))?;
    let split_seed = derive_seed(cfg.master_seed, "split", 0);
    let mut splits = Vec::with_capacity(queries.len());
    let mut discarded = 0;
    for &q in &queries {
        match split_edges(g, q, cfg.sigma, split_seed)? {
            SplitOutcome::Split(s) => splits.push(s),
            SplitOutcome::Discard { .. } => discarded += 1,
        }
    }
    if splits.is_empty() {
        bail!(
            "all {} sampled queries were discarded at sigma = {}",
            queries.len(),
            cfg.sigma
        );
    }
    let train_graph = build_training_graph(g, &splits);
    let split_hash = splits_hash(&splits);
    Ok(Prepared {
        queries,
        splits,
        discarded,
        train_graph,
        split_hash,
    })
}

fn cocluster_params(cfg: &RunConfig, n: usize) -> CoclusterParams {
    let seed = cfg
        .cocluster_seed
        .unwrap_or_else(|| derive_seed(cfg.master_seed, "cocluster", 0));
    let mut p = CoclusterParams::with_default_k(n, seed);
    if cfg.cocluster_k > 0 {
        p.k_rows = cfg.cocluster_k;
        p.k_cols = cfg.cocluster_k;
    }
    p.max_sweeps = cfg.cocluster_sweeps;
    p
}

fn cache_file(dir: &Path, key: &CoclusterKey, restarts: usize) -> PathBuf {
    let p = &key.params;
    dir.join(format!(
        "cocluster-{}-k{}x{}-s{}-w{}-r{}.txt",
        &key.graph_hash[..16],
        p.k_rows,
        p.k_cols,
        p.seed,
        p.max_sweeps,
        restarts
    ))
}

/// Fits (or loads from the cache) the co-clustering of the training graph.
pub fn fit_or_load_cocluster(cfg: &RunConfig, g: &Graph) -> Result<CoclusterModel> {
    let params = cocluster_params(cfg, g.node_count());
    let key = CoclusterKey {
        graph_hash: g.content_hash(),
        params,
    };
    let cached = cfg.cache_dir.as_ref().map(|d| cache_file(d, &key, cfg.cocluster_restarts));
    if let Some(path) = &cached {
        if path.is_file() {
            let model = CoclusterModel::load(path)?;
            if model.key.as_ref() == Some(&key) {
                log::info!("co-clustering loaded from {}", path.display());
                return Ok(model);
            }
            log::warn!("ignoring stale co-clustering cache {}", path.display());
        }
    }
    let model = if cfg.cocluster_restarts > 1 {
        let seeds: Vec<u64> = (0..cfg.cocluster_restarts as u64)
            .map(|i| if i == 0 { params.seed } else { derive_seed(params.seed, "restart", i) })
            .collect();
        let mut m = fit_restarts(g, &params, &seeds)?;
        // the cache key names the base seed of the restart family
        m.key = Some(key.clone());
        m
    } else {
        fit_cocluster(g, &params)?
    };
    if let Some(path) = &cached {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        model.save(&tmp)?;
        fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(model)
}

fn capped_bad(cfg: &RunConfig, s: &QuerySplit) -> Vec<usize> {
    let n = s.train_bad.len();
    if cfg.train_bad_cap == 0 || n <= cfg.train_bad_cap {
        return s.train_bad.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, "train-bad", s.query as u64));
    let mut idx: Vec<usize> = sample(&mut rng, n, cfg.train_bad_cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| s.train_bad[i]).collect()
}

/// Picks the superposed-walk horizon in {2, 3, 4, 5} by MAP on a further
/// held-out tenth of each query's training neighbors. Ties go to the
/// shorter horizon.
fn select_crw_horizon(cfg: &RunConfig, train: &Graph, splits: &[QuerySplit]) -> usize {
    let mut held: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    for s in splits {
        let n = s.train_good.len();
        if n < 2 {
            continue;
        }
        let h = (n / 10).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, "crw-validation", s.query as u64));
        let mut idx = sample(&mut rng, n, h).into_vec();
        idx.sort_unstable();
        held.push((s.query, idx.into_iter().map(|i| s.train_good[i]).collect(), capped_bad(cfg, s)));
    }
    if held.is_empty() {
        return 3;
    }
    let removed: HashSet<(usize, usize)> = held
        .iter()
        .flat_map(|(q, g, _)| g.iter().map(move |&t| ((*q).min(t), (*q).max(t))))
        .collect();
    let val = train.without_edges(&removed);
    let mut best = (3, f64::NEG_INFINITY);
    for t in 2..=5 {
        let aps: Vec<f64> = held
            .par_iter()
            .filter_map(|(q, good, bad)| {
                if bad.is_empty() {
                    return None;
                }
                let scores = crw_scores_from(&val, *q, t);
                let cands = good
                    .iter()
                    .chain(bad)
                    .map(|&v| Scored { node: v, score: scores[v] })
                    .collect();
                let goods: HashSet<usize> = good.iter().copied().collect();
                let flags: Vec<bool> = rank_candidates(cands)
                    .iter()
                    .map(|c| goods.contains(&c.node))
                    .collect();
                average_precision_flags(&flags)
            })
            .collect();
        let map = aps.iter().sum::<f64>() / aps.len().max(1) as f64;
        log::info!("crw horizon {t}: validation MAP {map:.4}");
        if map > best.1 {
            best = (t, map);
        }
    }
    best.0
}

/// Everything a run produces in memory.
pub struct RunOutcome {
    pub config: RunConfig,
    pub report: MetricsReport,
    pub rankings: Vec<QueryRanking>,
    pub split_hash: String,
    pub model: Option<RankModel>,
    pub cocluster: Option<CoclusterModel>,
    pub train_graph: Graph,
    pub summary: String,
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.with_context(|| format!("stage '{name}' failed"))
}

/// Runs the pipeline on an already loaded dataset without touching disk
/// (except for the co-clustering cache).
pub fn execute(cfg: &RunConfig, bundle: &DatasetBundle) -> Result<RunOutcome> {
    stage("config", cfg.validate())?;
    let threads = if cfg.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        cfg.threads
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;
    pool.install(|| execute_in_pool(cfg, bundle))
}

fn execute_in_pool(cfg: &RunConfig, bundle: &DatasetBundle) -> Result<RunOutcome> {
    let full = &bundle.graph;
    let prep = stage("split", prepare(cfg, bundle))?;
    let train = &prep.train_graph;
    log::info!(
        "{}: {} queries sampled, {} split, {} discarded",
        bundle.name,
        prep.queries.len(),
        prep.splits.len(),
        prep.discarded
    );

    let cocluster = if cfg.uses_cocluster() {
        Some(stage("cocluster", fit_or_load_cocluster(cfg, train))?)
    } else {
        None
    };

    let mut crw_t = cfg.crw_t;
    let mut model = None;
    let scorer: Box<dyn Fn(usize, &[usize]) -> Result<Vec<f64>> + Sync> = match cfg.method {
        Method::Ccll => {
            let layout = cfg.features();
            let ctx = FeatureContext::new(train, &bundle.features, cocluster.as_ref(), layout)?;
            let data: Vec<QueryFeatures> = stage(
                "features",
                prep.splits
                    .par_iter()
                    .map(|s| {
                        let good = s
                            .train_good
                            .iter()
                            .map(|&v| ctx.raw(s.query, v))
                            .collect::<linkpred::Result<Vec<_>>>()?;
                        let bad = capped_bad(cfg, s)
                            .iter()
                            .map(|&v| ctx.raw(s.query, v))
                            .collect::<linkpred::Result<Vec<_>>>()?;
                        Ok(QueryFeatures { good, bad })
                    })
                    .collect::<Result<Vec<_>>>(),
            )?;
            let m = stage("train", train_ranker(&data, layout, cfg.train_params()).map_err(Into::into))?;
            model = Some(m.clone());
            Box::new(move |q, pool| {
                pool.iter()
                    .map(|&v| Ok(m.score(&ctx.raw(q, v)?)))
                    .collect()
            })
        }
        Method::Ll => {
            let feats = &bundle.features;
            let local = cfg.local();
            local.validate()?;
            Box::new(move |q, pool| {
                pool.iter()
                    .map(|&v| Ok(ll_feature(train, feats, q, v, local)?.value))
                    .collect()
            })
        }
        Method::Aa | Method::Ra => {
            let w = if cfg.method == Method::Aa {
                CommonNeighborWeight::AdamicAdar
            } else {
                CommonNeighborWeight::ResourceAllocation
            };
            Box::new(move |q, pool| Ok(pool.iter().map(|&v| adamic_adar(train, q, v, w)).collect()))
        }
        Method::Katz => {
            let katz = stage("score", Katz::new(train, cfg.katz_beta, cfg.katz_max_len).map_err(Into::into))?;
            Box::new(move |q, pool| {
                let s = katz.scores_from(q);
                Ok(pool.iter().map(|&v| s[v]).collect())
            })
        }
        Method::Crw => {
            if crw_t == 0 {
                crw_t = select_crw_horizon(cfg, train, &prep.splits);
            }
            let t = crw_t;
            Box::new(move |q, pool| {
                let s = crw_scores_from(train, q, t);
                Ok(pool.iter().map(|&v| s[v]).collect())
            })
        }
        Method::PropFlow => {
            let l = cfg.propflow_l;
            Box::new(move |q, pool| {
                let s = propflow(train, q, l);
                Ok(pool.iter().map(|&v| s.get(&v).copied().unwrap_or(0.0)).collect())
            })
        }
    };

    let rankings: Vec<QueryRanking> = stage(
        "score",
        prep.splits
            .par_iter()
            .map(|s| {
                let pool = s.test_pool();
                let scores = scorer(s.query, &pool)?;
                if let Some(bad) = scores.iter().find(|x| !x.is_finite()) {
                    bail!("non-finite score {bad} for query {}", s.query);
                }
                let ranked = rank_candidates(
                    pool.iter()
                        .zip(scores)
                        .map(|(&node, score)| Scored { node, score })
                        .collect(),
                );
                let relevant = ranked
                    .iter()
                    .map(|c| s.test_good.binary_search(&c.node).is_ok())
                    .collect();
                Ok(QueryRanking {
                    query: s.query,
                    degree: full.degree(s.query),
                    triangles: full.triangle_count(s.query),
                    ranked,
                    relevant,
                })
            })
            .collect::<Result<Vec<_>>>(),
    )?;
    drop(scorer);
    let report = MetricsReport::compute(&rankings, cfg.curve_depth);

    let mut header: Vec<(String, String)> = vec![
        ("dataset".into(), bundle.name.clone()),
        ("method".into(), cfg.method.name().into()),
        ("label".into(), cfg.label()),
        ("feature_layout".into(), cfg.features().descriptor()),
        ("sigma".into(), cfg.sigma.to_string()),
        ("master_seed".into(), cfg.master_seed.to_string()),
        ("nodes".into(), full.node_count().to_string()),
        ("edges".into(), full.edge_count().to_string()),
        ("train_edges".into(), train.edge_count().to_string()),
        ("queries_sampled".into(), prep.queries.len().to_string()),
        ("queries_discarded".into(), prep.discarded.to_string()),
        ("split_hash".into(), prep.split_hash.clone()),
    ];
    if cfg.method == Method::Crw {
        header.push(("crw_t".into(), crw_t.to_string()));
    }
    if let Some(c) = &cocluster {
        header.push(("cocluster_k".into(), c.k_rows.to_string()));
        header.push(("cocluster_cost".into(), c.coding_cost().to_string()));
    }
    if let Some(m) = &model {
        let trace = &m.loss_trace;
        header.push(("train_loss_first_epoch".into(), trace[0].to_string()));
        header.push(("train_loss_last_epoch".into(), trace[trace.len() - 1].to_string()));
    }
    let summary = report.summary_text(&header);
    Ok(RunOutcome {
        config: cfg.clone(),
        report,
        rankings,
        split_hash: prep.split_hash,
        model,
        cocluster,
        train_graph: prep.train_graph,
        summary,
    })
}

/// Writes every artifact of `out` into `dir` atomically: files go to a
/// sibling temporary directory that is renamed into place at the end.
pub fn write_outputs(out: &RunOutcome, dir: &Path) -> Result<()> {
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    let name = dir
        .file_name()
        .ok_or_else(|| anyhow!("output path {} has no final component", dir.display()))?;
    let tmp = parent.join(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| -> Result<()> {
        if tmp.exists() {
            fs::remove_dir_all(&tmp)?;
        }
        fs::create_dir_all(&tmp)?;
        let mut files: BTreeMap<&str, String> = BTreeMap::new();
        files.insert("config.resolved", out.config.to_string());
        files.insert("summary.txt", out.summary.clone());
        files.insert("per_query.tsv", out.report.per_query_tsv());
        files.insert("pr_curve.tsv", out.report.pr_curve_tsv());
        files.insert("bins_degree.tsv", out.report.bins_tsv(linkpred::eval::BinAxis::Degree));
        files.insert(
            "bins_triangles.tsv",
            out.report.bins_tsv(linkpred::eval::BinAxis::Triangles),
        );
        files.insert("rankings.tsv", linkpred::eval::rankings_tsv(&out.rankings));
        files.insert("train_graph.edges", out.train_graph.to_edge_list_string());
        if let Some(m) = &out.model {
            files.insert("model.txt", m.to_text());
        }
        if let Some(c) = &out.cocluster {
            files.insert("cocluster.txt", c.to_text());
        }
        for (f, body) in files {
            let p = tmp.join(f);
            fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        }
        if dir.exists() {
            fs::remove_dir_all(dir).with_context(|| format!("replacing {}", dir.display()))?;
        }
        fs::rename(&tmp, dir).with_context(|| format!("moving results to {}", dir.display()))?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_dir_all(&tmp);
    }
    stage("write", result)
}

/// Loads the dataset, runs the pipeline and writes all artifacts to
/// `cfg.output`.
pub fn run_benchmark(cfg: &RunConfig) -> Result<RunOutcome> {
    stage("config", cfg.validate())?;
    let bundle = stage("load", load_dataset(cfg))?;
    let out = execute(cfg, &bundle)?;
    write_outputs(&out, &cfg.output)?;
    Ok(out)
}
