//! End-to-end runs of the `dshd` binary over a scratch directory.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dshd"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "dshd {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const CONFIG: &str = r#"
[model]
kind = "homogeneous"
num_vertices = 12
arity = 2
p = 0.3

[alternative]
support = [0, 1, 2, 3]
rho = 2.0

[experiment]
n = 4
test = "known-scan"
replicates = 60
seed = 5
rho = 2.0
"#;

#[test]
fn full_pipeline_round_trip() {
    let dir = scratch();
    let dir = dir.path();
    let config = dir.join("run.toml");
    std::fs::write(&config, CONFIG).unwrap();
    let config = config.to_str().unwrap();

    // Sampling is deterministic in (seed, replicate).
    let edges = dir.join("edges.csv");
    let again = dir.join("edges-again.csv");
    for out in [&edges, &again] {
        run_ok(&[
            "sample",
            "--config",
            config,
            "--seed",
            "7",
            "--replicate",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let body = std::fs::read(&edges).unwrap();
    assert_eq!(body, std::fs::read(&again).unwrap());
    assert!(body.starts_with(b"v1,v2\n"));

    // Known-probability scan against the configured model.
    let scan_out = dir.join("scan.json");
    run_ok(&[
        "scan",
        "--edges",
        edges.to_str().unwrap(),
        "--model",
        config,
        "--n-max",
        "4",
        "--exact",
        "--tau",
        "1.0",
        "--out",
        scan_out.to_str().unwrap(),
    ]);
    let scan = json(&scan_out);
    assert!(scan["statistic"].as_f64().unwrap() >= 0.0);
    assert_eq!(scan["exact"], serde_json::json!(true));
    assert_eq!(scan["tau"], serde_json::json!(1.0));
    assert!(scan["argmax_set"].is_array());
    // Default size window runs from the arity up to n_max: sizes 2, 3, 4.
    assert_eq!(scan["per_size_best"].as_array().unwrap().len(), 3);
    assert!(matches!(scan["decision"].as_str().unwrap(), "reject" | "retain"));

    // Adaptive scan needs the vertex count instead of a model.
    let adaptive_out = dir.join("adaptive.json");
    run_ok(&[
        "adaptive-scan",
        "--edges",
        edges.to_str().unwrap(),
        "--num-vertices",
        "12",
        "--n-max",
        "4",
        "--tau",
        "1.0",
        "--out",
        adaptive_out.to_str().unwrap(),
    ]);
    let adaptive = json(&adaptive_out);
    assert!(adaptive["statistic"].as_f64().unwrap() >= 0.0);

    // Likelihood-ratio oracle with truncation.
    let lr_out = dir.join("lr.json");
    run_ok(&[
        "lr-oracle",
        "--edges",
        edges.to_str().unwrap(),
        "--model",
        config,
        "--n",
        "4",
        "--rho",
        "2.0",
        "--truncated",
        "--out",
        lr_out.to_str().unwrap(),
    ]);
    let lr = json(&lr_out);
    let mixture = lr["mixture"].as_f64().unwrap();
    let truncated = lr["truncated"].as_f64().unwrap();
    assert!(mixture > 0.0);
    assert!(truncated <= mixture);

    // Boundary diagnostics.
    let boundary_out = dir.join("boundary.json");
    run_ok(&["boundary", "--config", config, "--out", boundary_out.to_str().unwrap()]);
    let boundary = json(&boundary_out);
    assert_eq!(boundary["rho"], serde_json::json!(2.0));
    assert!(boundary["powerless"]["entries"].is_array());
    assert!(boundary["powerful"]["entries"].is_array());
    // Non-finite sentinels (empty-family infinities) serialize as null.
    assert!(boundary["cn"]["value"].is_number() || boundary["cn"]["value"].is_null());
    assert!(boundary["cn"]["empty_family"].is_boolean());
    assert_eq!(boundary["critical_rho"].as_array().unwrap().len(), 1);

    // Risk in both formats; CSV leads with its header.
    let risk_csv = dir.join("risk.csv");
    run_ok(&[
        "risk", "--config", config, "--out", risk_csv.to_str().unwrap(), "--format", "csv",
        "--workers", "1",
    ]);
    let csv = std::fs::read_to_string(&risk_csv).unwrap();
    assert!(csv.starts_with("metric,"));
    assert!(csv.lines().last().unwrap().starts_with("risk,"));

    let risk_json = dir.join("risk.json");
    run_ok(&[
        "risk", "--config", config, "--out", risk_json.to_str().unwrap(), "--format", "json",
    ]);
    let risk = json(&risk_json);
    let risk_hat = risk["risk_hat"].as_f64().unwrap();
    assert!((0.0..=2.0).contains(&risk_hat));
    assert_eq!(risk["replicates"], serde_json::json!(60));

    // Power curve CSV: header plus one row per grid point.
    let power_out = dir.join("power.csv");
    run_ok(&[
        "power-curve",
        "--config",
        config,
        "--rho-grid",
        "1.0,2.0",
        "--out",
        power_out.to_str().unwrap(),
    ]);
    let power = std::fs::read_to_string(&power_out).unwrap();
    let lines: Vec<&str> = power.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "rho,functional,powerless,powerful,type1,power,power_lo,power_hi,risk"
    );
    assert!(lines[1].starts_with("1.0,") || lines[1].starts_with("1,"));
}

#[test]
fn failures_are_stage_tagged_and_nonzero() {
    let dir = scratch();
    let dir = dir.path();

    // Missing config file.
    let out = bin()
        .args(["risk", "--config", "/nonexistent/run.toml", "--out", "x", "--format", "csv"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error: config:"), "stderr: {stderr}");

    // Config that fails validation (support larger than the vertex count).
    let bad = dir.join("bad.toml");
    std::fs::write(
        &bad,
        r#"
[model]
kind = "homogeneous"
num_vertices = 6
arity = 2
p = 0.2

[experiment]
n = 9
test = "known-scan"
replicates = 50
seed = 1
rho = 2.0
"#,
    )
    .unwrap();
    let out = bin()
        .args([
            "risk",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            dir.join("never.csv").to_str().unwrap(),
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error:"), "stderr: {stderr}");

    // Unknown format is rejected by argument parsing.
    let out = bin()
        .args(["risk", "--config", "x", "--out", "y", "--format", "yaml"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
