use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use linkpred::cocluster::{fit_cocluster, CoclusterParams};
use linkpred::eval::{parse_rankings_tsv, rank_candidates, MetricsReport, Scored};
use linkpred::ranker::{FeatureContext, RankModel};
use linkpred::Graph;
use linkpred_bench::{load_dataset, run_benchmark, run_matrix, write_matrix, RunConfig};

#[derive(Parser)]
#[command(name = "linkpred", version, about = "Link prediction benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmark runs.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Co-clustering of an edge list.
    #[command(subcommand)]
    Cocluster(CoclusterCommand),
    /// Rank candidates for one query with a trained run.
    Score(ScoreArgs),
    /// Metric utilities.
    #[command(subcommand)]
    Metrics(MetricsCommand),
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set sigma=0.8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (same as `--set output=DIR`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(p) = &self.config {
            cfg.apply_file(p)?;
        }
        cfg.apply_overrides(&self.overrides)?;
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum BenchCommand {
    /// One method on one dataset.
    Run(ConfigArgs),
    /// Several methods on identical splits.
    Matrix {
        #[command(flatten)]
        base: ConfigArgs,
        /// Comma-separated methods, each run with the base config.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        /// Extra configuration as comma-separated `key=value` overrides of
        /// the base; repeatable.
        #[arg(long)]
        variant: Vec<String>,
    },
}

#[derive(Subcommand)]
enum CoclusterCommand {
    Fit {
        #[arg(long)]
        graph: PathBuf,
        /// Groups per side; 0 picks round(sqrt N) clamped to [2, 64].
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        sweeps: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ScoreArgs {
    /// Output directory of a learned run.
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    query: usize,
    #[arg(long, default_value_t = 20)]
    top: usize,
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// Recompute metrics from a run's rankings file.
    Recompute {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 50)]
        curve_depth: usize,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = real_main(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn real_main(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench(BenchCommand::Run(args)) => {
            let cfg = args.resolve()?;
            let out = run_benchmark(&cfg)?;
            print!("{}", out.summary);
            println!("results in {}", cfg.output.display());
        }
        Command::Bench(BenchCommand::Matrix {
            base,
            methods,
            variant,
        }) => {
            let cfg = base.resolve()?;
            let mut configs = Vec::new();
            for m in methods.iter().filter(|m| !m.is_empty()) {
                let mut c = cfg.clone();
                c.set("method", m)?;
                configs.push(c);
            }
            for v in &variant {
                let mut c = cfg.clone();
                let items: Vec<&str> = v.split(',').filter(|s| !s.trim().is_empty()).collect();
                c.apply_overrides(&items)?;
                configs.push(c);
            }
            if configs.is_empty() {
                configs.push(cfg.clone());
            }
            let out = run_matrix(&configs)?;
            write_matrix(&out, &cfg.output)?;
            print!("{}", out.comparison);
            println!("results in {}", cfg.output.display());
        }
        Command::Cocluster(CoclusterCommand::Fit {
            graph,
            k,
            seed,
            sweeps,
            out,
        }) => {
            let g = Graph::read_edge_list(&graph)?;
            let mut p = CoclusterParams::with_default_k(g.node_count(), seed);
            if k > 0 {
                p.k_rows = k;
                p.k_cols = k;
            }
            p.max_sweeps = sweeps;
            let m = fit_cocluster(&g, &p)?;
            m.save(&out)?;
            println!(
                "k = {}, sweeps = {}, coding cost = {} bits",
                m.k_rows,
                m.cost_trace.len() - 1,
                m.coding_cost()
            );
        }
        Command::Score(args) => score(&args)?,
        Command::Metrics(MetricsCommand::Recompute { run, curve_depth }) => {
            recompute(&run, curve_depth)?
        }
    }
    Ok(())
}

fn score(args: &ScoreArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    cfg.apply_file(&args.run.join("config.resolved"))?;
    let model_path = args.run.join("model.txt");
    if !model_path.is_file() {
        bail!("{} has no model.txt; only learned runs can be rescored", args.run.display());
    }
    let model = RankModel::load(&model_path)?;
    let bundle = load_dataset(&cfg)?;
    let train = Graph::read_edge_list(&args.run.join("train_graph.edges"))?;
    let cocluster = if model.layout.cc {
        Some(linkpred::cocluster::CoclusterModel::load(&args.run.join("cocluster.txt"))?)
    } else {
        None
    };
    let ctx = FeatureContext::new(&train, &bundle.features, cocluster.as_ref(), model.layout)?;
    train.check_node(args.query)?;
    let cands: Vec<usize> = (0..train.node_count())
        .filter(|&v| v != args.query && !train.has_edge(args.query, v))
        .collect();
    let ranked = model.score_and_rank(&ctx, args.query, &cands)?;
    println!("rank\tnode\tid\tscore");
    for (i, Scored { node, score }) in rank_candidates(ranked).into_iter().take(args.top).enumerate() {
        println!("{}\t{node}\t{}\t{score}", i + 1, bundle.node_ids[node]);
    }
    Ok(())
}

fn recompute(run: &Path, depth: usize) -> Result<()> {
    let text = std::fs::read_to_string(run.join("rankings.tsv"))
        .with_context(|| format!("reading rankings in {}", run.display()))?;
    let report = MetricsReport::compute(&parse_rankings_tsv(&text)?, depth);
    print!("{}", report.summary_text(&[]));
    let summary = std::fs::read_to_string(run.join("summary.txt")).unwrap_or_default();
    let stored = summary
        .lines()
        .find_map(|l| l.strip_prefix("map = "))
        .map(str::to_string);
    match stored {
        Some(m) if m == report.map.to_string() => println!("stored map matches"),
        Some(m) => bail!("stored map {m} differs from recomputed {}", report.map),
        None => println!("no stored summary to compare"),
    }
    Ok(())
}
