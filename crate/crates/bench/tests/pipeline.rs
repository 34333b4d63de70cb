use std::path::Path;
use std::process::Command;

use linkpred_bench::{execute, load_dataset, run_benchmark, run_matrix, write_matrix, RunConfig};

fn small(overrides: &[&str]) -> RunConfig {
    let mut c = RunConfig::default();
    c.apply_overrides(&[
        "dataset=planted",
        "planted_groups=20,20,20",
        "planted_within=0.3",
        "planted_across=0.03",
        "queries=25",
        "sigma=0.8",
        "epochs=5",
        "threads=2",
    ])
    .unwrap();
    c.apply_overrides(overrides).unwrap();
    c
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linkpred"))
}

fn entries(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn repeated_runs_are_identical() {
    let cfg = small(&["method=ccll"]);
    let bundle = load_dataset(&cfg).unwrap();
    let a = execute(&cfg, &bundle).unwrap();
    let mut single = cfg.clone();
    single.threads = 1;
    let b = execute(&single, &bundle).unwrap();
    assert_eq!(a.summary, b.summary);
    assert_eq!(a.report.map, b.report.map);
    assert!(a.summary.contains("feature_layout = aa+ll+cc/linear"));
}

#[test]
fn outputs_are_complete_and_recomputable() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = small(&["method=ccll", &format!("output={}", out.display())]);
    let r = run_benchmark(&cfg).unwrap();
    assert_eq!(
        entries(&out),
        [
            "bins_degree.tsv",
            "bins_triangles.tsv",
            "cocluster.txt",
            "config.resolved",
            "model.txt",
            "per_query.tsv",
            "pr_curve.tsv",
            "rankings.tsv",
            "summary.txt",
            "train_graph.edges",
        ]
    );
    assert_eq!(entries(tmp.path()), ["run"]);
    let mut echoed = RunConfig::default();
    echoed.apply_file(&out.join("config.resolved")).unwrap();
    assert_eq!(echoed, r.config);

    let recompute = bin()
        .args(["metrics", "recompute", "--run"])
        .arg(&out)
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&recompute.stdout);
    assert!(recompute.status.success(), "{}", String::from_utf8_lossy(&recompute.stderr));
    assert!(text.contains("stored map matches"), "{text}");

    let q = r.rankings[0].query.to_string();
    let score = bin()
        .args(["score", "--top", "5", "--query", &q, "--run"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(score.status.success(), "{}", String::from_utf8_lossy(&score.stderr));
    assert_eq!(String::from_utf8_lossy(&score.stdout).lines().count(), 6);
}

#[test]
fn missing_corpus_fails_at_load_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut cfg = small(&[]);
    cfg.apply_overrides(&[
        "dataset=cora",
        &format!("data_dir={}", tmp.path().join("nowhere").display()),
        &format!("output={}", out.display()),
    ])
    .unwrap();
    let err = format!("{:#}", run_benchmark(&cfg).err().unwrap());
    assert!(err.contains("stage 'load' failed") && err.contains("not found"), "{err}");
    assert!(entries(tmp.path()).is_empty());
}

#[test]
fn matrix_runs_share_splits_and_reject_unpaired_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = [
        small(&["method=ccll"]),
        small(&["method=ccll", "blocks=ll+aa"]),
        small(&["method=aa"]),
        small(&["method=crw", "crw_t=3"]),
        small(&["method=katz"]),
        small(&["method=propflow"]),
        small(&["method=ra"]),
    ];
    let out = run_matrix(&configs).unwrap();
    assert!(out.runs.iter().all(|r| r.split_hash == out.runs[0].split_hash));
    write_matrix(&out, tmp.path()).unwrap();
    let table = std::fs::read_to_string(tmp.path().join("comparison.tsv")).unwrap();
    assert_eq!(table.lines().count(), configs.len() + 1);
    assert!(table.contains("aa+ll+cc/linear") && table.contains("aa+ll/linear"), "{table}");

    let unpaired = [small(&["method=aa"]), small(&["method=aa", "master_seed=2"])];
    let err = run_matrix(&unpaired).err().unwrap().to_string();
    assert!(err.contains("unpaired"), "{err}");
}

#[test]
fn linear_and_quadratic_differ_only_in_layout() {
    let lin = small(&["method=ccll"]);
    let quad = small(&["method=ccll", "quadratic=true"]);
    let (a, b) = (lin.to_string(), quad.to_string());
    let diff: Vec<_> = a.lines().zip(b.lines()).filter(|(x, y)| x != y).collect();
    assert_eq!(diff, [("quadratic = false", "quadratic = true")]);
    let bundle = load_dataset(&lin).unwrap();
    let q = execute(&quad, &bundle).unwrap();
    assert_eq!(q.model.unwrap().nu.len(), 14);
}

#[test]
fn cli_rejects_unknown_keys() {
    let o = bin().args(["bench", "run", "--set", "nonsense=1"]).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonsense"));
}
