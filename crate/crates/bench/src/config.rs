//! Flat `key = value` run configuration: defaults, then a config file, then
//! command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use linkpred::local::LocalParams;
use linkpred::ranker::{FeatureConfig, TrainParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Ccll,
    Ll,
    Aa,
    Ra,
    Katz,
    Crw,
    PropFlow,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Ccll,
        Method::Ll,
        Method::Aa,
        Method::Ra,
        Method::Katz,
        Method::Crw,
        Method::PropFlow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ccll => "ccll",
            Method::Ll => "ll",
            Method::Aa => "aa",
            Method::Ra => "ra",
            Method::Katz => "katz",
            Method::Crw => "crw",
            Method::PropFlow => "propflow",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| anyhow!("unknown method {s:?}"))
    }
}

/// Where the graph comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSource {
    /// A benchmark corpus below `data_dir`.
    Corpus(linkpred::dataset::Corpus),
    /// Planted-partition graph.
    Planted {
        groups: Vec<usize>,
        within: f64,
        across: f64,
        seed: u64,
    },
    /// Edge list plus optional dense feature table.
    EdgeList {
        edges: PathBuf,
        features: Option<PathBuf>,
        feature_dim: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dataset: String,
    pub data_dir: PathBuf,
    pub planted_groups: Vec<usize>,
    pub planted_within: f64,
    pub planted_across: f64,
    pub planted_seed: u64,
    pub edges_file: PathBuf,
    pub features_file: PathBuf,
    pub feature_dim: usize,

    pub method: Method,
    pub sigma: f64,
    pub queries: usize,
    pub master_seed: u64,

    pub alpha: f64,
    pub beta: f64,
    pub blocks_aa: bool,
    pub blocks_ll: bool,
    pub blocks_cc: bool,
    pub quadratic: bool,

    /// 0 means `round(√N)` clamped to `[2, 64]`.
    pub cocluster_k: usize,
    pub cocluster_seed: Option<u64>,
    pub cocluster_sweeps: usize,
    pub cocluster_restarts: usize,
    pub cache_dir: Option<PathBuf>,

    pub lambda: f64,
    pub epochs: usize,
    pub triples_per_epoch: usize,
    /// Training bad nodes used per query; 0 keeps all.
    pub train_bad_cap: usize,

    pub katz_beta: f64,
    pub katz_max_len: usize,
    /// 0 selects the horizon from {2, 3, 4, 5} on a validation split.
    pub crw_t: usize,
    pub propflow_l: usize,

    pub threads: usize,
    pub curve_depth: usize,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: "cora".into(),
            data_dir: PathBuf::from("data"),
            planted_groups: vec![40, 40, 40, 40],
            planted_within: 0.15,
            planted_across: 0.01,
            planted_seed: 7,
            edges_file: PathBuf::new(),
            features_file: PathBuf::new(),
            feature_dim: 0,
            method: Method::Ccll,
            sigma: 0.9,
            queries: 500,
            master_seed: 1,
            alpha: 0.8,
            beta: 1.2,
            blocks_aa: true,
            blocks_ll: true,
            blocks_cc: true,
            quadratic: false,
            cocluster_k: 0,
            cocluster_seed: None,
            cocluster_sweeps: 50,
            cocluster_restarts: 1,
            cache_dir: None,
            lambda: 1e-4,
            epochs: 30,
            triples_per_epoch: 100_000,
            train_bad_cap: 200,
            katz_beta: 0.005,
            katz_max_len: 10,
            crw_t: 0,
            propflow_l: 5,
            threads: 0,
            curve_depth: 50,
            output: PathBuf::from("out"),
        }
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => bail!("expected a boolean, got {v:?}"),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T> {
    v.parse().map_err(|_| anyhow!("bad number {v:?}"))
}

fn opt_path(v: &str) -> Option<PathBuf> {
    (!v.is_empty()).then(|| PathBuf::from(v))
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let apply = |c: &mut RunConfig| -> Result<()> {
            match key.trim() {
                "dataset" => c.dataset = v.to_ascii_lowercase(),
                "data_dir" => c.data_dir = PathBuf::from(v),
                "planted_groups" => {
                    c.planted_groups = v
                        .split(',')
                        .map(|s| parse_num(s.trim()))
                        .collect::<Result<_>>()?
                }
                "planted_within" => c.planted_within = parse_num(v)?,
                "planted_across" => c.planted_across = parse_num(v)?,
                "planted_seed" => c.planted_seed = parse_num(v)?,
                "edges_file" => c.edges_file = PathBuf::from(v),
                "features_file" => c.features_file = PathBuf::from(v),
                "feature_dim" => c.feature_dim = parse_num(v)?,
                "method" => c.method = Method::parse(v)?,
                "sigma" => c.sigma = parse_num(v)?,
                "queries" => c.queries = parse_num(v)?,
                "master_seed" => c.master_seed = parse_num(v)?,
                "alpha" => c.alpha = parse_num(v)?,
                "beta" => c.beta = parse_num(v)?,
                "blocks" => {
                    c.blocks_aa = false;
                    c.blocks_ll = false;
                    c.blocks_cc = false;
                    for b in v.split(['+', ',']).map(str::trim) {
                        match b {
                            "aa" => c.blocks_aa = true,
                            "ll" => c.blocks_ll = true,
                            "cc" => c.blocks_cc = true,
                            _ => bail!("unknown feature block {b:?}"),
                        }
                    }
                }
                "quadratic" => c.quadratic = parse_bool(v)?,
                "cocluster_k" => c.cocluster_k = parse_num(v)?,
                "cocluster_seed" => {
                    c.cocluster_seed = if v == "auto" { None } else { Some(parse_num(v)?) }
                }
                "cocluster_sweeps" => c.cocluster_sweeps = parse_num(v)?,
                "cocluster_restarts" => c.cocluster_restarts = parse_num(v)?,
                "cache_dir" => c.cache_dir = opt_path(v),
                "lambda" => c.lambda = parse_num(v)?,
                "epochs" => c.epochs = parse_num(v)?,
                "triples_per_epoch" => c.triples_per_epoch = parse_num(v)?,
                "train_bad_cap" => c.train_bad_cap = parse_num(v)?,
                "katz_beta" => c.katz_beta = parse_num(v)?,
                "katz_max_len" => c.katz_max_len = parse_num(v)?,
                "crw_t" => c.crw_t = if v == "auto" { 0 } else { parse_num(v)? },
                "propflow_l" => c.propflow_l = parse_num(v)?,
                "threads" => c.threads = parse_num(v)?,
                "curve_depth" => c.curve_depth = parse_num(v)?,
                "output" => c.output = PathBuf::from(v),
                other => bail!("unknown config key {other:?}"),
            }
            Ok(())
        };
        apply(self).with_context(|| format!("config key {key:?}"))
    }

    /// Applies a `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin}:{}: expected 'key = value'", i + 1))?;
            self.set(k, v).with_context(|| format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies `key=value` overrides such as those given with `--set`.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, items: &[S]) -> Result<()> {
        for item in items {
            let item = item.as_ref();
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("override {item:?} is not key=value"))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            bail!("sigma must lie in (0, 1), got {}", self.sigma);
        }
        if self.queries == 0 {
            bail!("queries must be >= 1");
        }
        if self.curve_depth == 0 {
            bail!("curve_depth must be >= 1");
        }
        self.features().validate()?;
        self.train_params().validate()?;
        if self.cocluster_sweeps == 0 || self.cocluster_restarts == 0 {
            bail!("cocluster_sweeps and cocluster_restarts must be >= 1");
        }
        if self.katz_max_len == 0 || self.propflow_l == 0 {
            bail!("katz_max_len and propflow_l must be >= 1");
        }
        self.dataset_source()?;
        Ok(())
    }

    pub fn dataset_source(&self) -> Result<DatasetSource> {
        if let Some(c) = linkpred::dataset::Corpus::from_name(&self.dataset) {
            return Ok(DatasetSource::Corpus(c));
        }
        match self.dataset.as_str() {
            "planted" => Ok(DatasetSource::Planted {
                groups: self.planted_groups.clone(),
                within: self.planted_within,
                across: self.planted_across,
                seed: self.planted_seed,
            }),
            "edgelist" => Ok(DatasetSource::EdgeList {
                edges: self.edges_file.clone(),
                features: opt_path(&self.features_file.to_string_lossy()),
                feature_dim: self.feature_dim,
            }),
            other => bail!("unknown dataset {other:?}"),
        }
    }

    pub fn local(&self) -> LocalParams {
        LocalParams {
            alpha: self.alpha,
            beta: self.beta,
        }
    }

    /// Feature layout of the learned model.
    pub fn features(&self) -> FeatureConfig {
        FeatureConfig {
            aa: self.blocks_aa,
            ll: self.blocks_ll,
            cc: self.blocks_cc,
            quadratic: self.quadratic,
            local: self.local(),
        }
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            lambda: self.lambda,
            epochs: self.epochs,
            triples_per_epoch: self.triples_per_epoch,
            seed: linkpred::seed::derive_seed(self.master_seed, "ranker", 0),
        }
    }

    /// Short name for reports, e.g. `ccll[aa+ll/linear]` or `crw`.
    pub fn label(&self) -> String {
        match self.method {
            Method::Ccll => format!("ccll[{}]", self.features().descriptor()),
            m => m.name().to_string(),
        }
    }

    /// Whether the run needs a co-clustering.
    pub fn uses_cocluster(&self) -> bool {
        self.method == Method::Ccll && self.blocks_cc
    }

    /// Every key in a fixed order, as `key = value` lines.
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        let blocks = {
            let mut b = Vec::new();
            if self.blocks_aa {
                b.push("aa");
            }
            if self.blocks_ll {
                b.push("ll");
            }
            if self.blocks_cc {
                b.push("cc");
            }
            b.join("+")
        };
        let path = |p: &Path| p.display().to_string();
        vec![
            ("dataset", self.dataset.clone()),
            ("data_dir", path(&self.data_dir)),
            (
                "planted_groups",
                self.planted_groups.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("planted_within", self.planted_within.to_string()),
            ("planted_across", self.planted_across.to_string()),
            ("planted_seed", self.planted_seed.to_string()),
            ("edges_file", path(&self.edges_file)),
            ("features_file", path(&self.features_file)),
            ("feature_dim", self.feature_dim.to_string()),
            ("method", self.method.name().into()),
            ("sigma", self.sigma.to_string()),
            ("queries", self.queries.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("blocks", blocks),
            ("quadratic", self.quadratic.to_string()),
            ("cocluster_k", self.cocluster_k.to_string()),
            (
                "cocluster_seed",
                self.cocluster_seed.map_or("auto".into(), |s| s.to_string()),
            ),
            ("cocluster_sweeps", self.cocluster_sweeps.to_string()),
            ("cocluster_restarts", self.cocluster_restarts.to_string()),
            ("cache_dir", self.cache_dir.as_deref().map_or(String::new(), path)),
            ("lambda", self.lambda.to_string()),
            ("epochs", self.epochs.to_string()),
            ("triples_per_epoch", self.triples_per_epoch.to_string()),
            ("train_bad_cap", self.train_bad_cap.to_string()),
            ("katz_beta", self.katz_beta.to_string()),
            ("katz_max_len", self.katz_max_len.to_string()),
            ("crw_t", if self.crw_t == 0 { "auto".into() } else { self.crw_t.to_string() }),
            ("propflow_l", self.propflow_l.to_string()),
            ("threads", self.threads.to_string()),
            ("curve_depth", self.curve_depth.to_string()),
            ("output", path(&self.output)),
        ]
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.resolved() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
