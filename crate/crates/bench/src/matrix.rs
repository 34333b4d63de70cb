//! Paired comparison of several configurations on one dataset.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use linkpred::eval::BinAxis;

use crate::config::RunConfig;
use crate::pipeline::{execute, load_dataset, write_outputs, RunOutcome};

/// Result of a matrix run, one outcome per configuration in input order.
pub struct MatrixOutcome {
    pub runs: Vec<RunOutcome>,
    pub comparison: String,
    pub bins_degree: String,
    pub bins_triangles: String,
}

fn check_paired(configs: &[RunConfig]) -> Result<()> {
    let Some(first) = configs.first() else {
        bail!("matrix needs at least one configuration");
    };
    for c in &configs[1..] {
        let same = c.dataset_source()? == first.dataset_source()?
            && c.data_dir == first.data_dir
            && c.master_seed == first.master_seed
            && c.sigma == first.sigma
            && c.queries == first.queries;
        if !same {
            bail!(
                "configurations {} and {} differ in dataset, seed, sigma or query budget; unpaired comparisons are rejected",
                first.label(),
                c.label()
            );
        }
    }
    Ok(())
}

/// Unique directory names for the runs, from their labels.
pub fn run_names(configs: &[RunConfig]) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(configs.len());
    for c in configs {
        let base: String = c
            .label()
            .chars()
            .map(|ch| if ch.is_ascii_alphanumeric() || ch == '-' { ch } else { '_' })
            .collect();
        let base = format!("{base}_s{}", c.sigma);
        let mut name = base.clone();
        let mut i = 2;
        while names.contains(&name) {
            name = format!("{base}_{i}");
            i += 1;
        }
        names.push(name);
    }
    names
}

/// Runs every configuration on the same splits and tabulates MAP, AUC and
/// per-bin MAP side by side.
pub fn run_matrix(configs: &[RunConfig]) -> Result<MatrixOutcome> {
    check_paired(configs)?;
    let bundle = load_dataset(&configs[0]).context("stage 'load' failed")?;
    let mut runs = Vec::with_capacity(configs.len());
    for c in configs {
        log::info!("running {}", c.label());
        runs.push(execute(c, &bundle)?);
    }
    let hash = &runs[0].split_hash;
    if let Some(r) = runs.iter().find(|r| &r.split_hash != hash) {
        bail!("split hash of {} differs from the first run", r.config.label());
    }
    let names = run_names(configs);
    let mut comparison = String::from("run\tmethod\tfeature_layout\tsigma\tqueries\tmap\tauc\tprecision_at_10\trecall_at_10\n");
    for (name, r) in names.iter().zip(&runs) {
        let at = |v: &[f64]| v.get(9).copied().unwrap_or(f64::NAN);
        let _ = writeln!(
            comparison,
            "{name}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.config.method.name(),
            r.config.features().descriptor(),
            r.config.sigma,
            r.report.queries.len(),
            r.report.map,
            r.report.auc,
            at(&r.report.precision),
            at(&r.report.recall)
        );
    }
    let bins = |axis: BinAxis| {
        let mut s = format!("bin\t{0}_lo\t{0}_hi\tqueries", axis.name());
        for n in &names {
            let _ = write!(s, "\t{n}");
        }
        s.push('\n');
        let first = runs[0].report.bins(axis);
        for (i, b) in first.iter().enumerate() {
            let _ = write!(s, "{}\t{}\t{}\t{}", i + 1, b.lo, b.hi, b.count);
            for r in &runs {
                let _ = write!(s, "\t{}", r.report.bins(axis).get(i).map_or(f64::NAN, |x| x.map));
            }
            s.push('\n');
        }
        s
    };
    Ok(MatrixOutcome {
        bins_degree: bins(BinAxis::Degree),
        bins_triangles: bins(BinAxis::Triangles),
        comparison,
        runs,
    })
}

/// Writes the comparison tables and each run's artifacts below `dir`.
pub fn write_matrix(out: &MatrixOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let configs: Vec<RunConfig> = out.runs.iter().map(|r| r.config.clone()).collect();
    for (name, r) in run_names(&configs).iter().zip(&out.runs) {
        write_outputs(r, &dir.join(name))?;
    }
    for (f, body) in [
        ("comparison.tsv", &out.comparison),
        ("bins_degree.tsv", &out.bins_degree),
        ("bins_triangles.tsv", &out.bins_triangles),
    ] {
        fs::write(dir.join(f), body).with_context(|| format!("writing {f}"))?;
    }
    Ok(())
}
