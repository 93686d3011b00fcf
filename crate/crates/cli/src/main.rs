//! `dshd`: command line front end for the detection toolkit.
//!
//! Every subcommand reads its inputs from files, writes one output file,
//! and prints a single confirmation line. Errors go to stderr prefixed
//! with the stage that failed, and the exit code is nonzero.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dshd_core::boundary::{
    check_condition_2, check_condition_3, check_scenarios, cn, critical_rho, BoundaryReport,
    CnReport, CriticalTarget,
};
use dshd_core::config::{load_model_file, load_run_config, RunConfig};
use dshd_core::experiment::{with_worker_count, OutputFormat};
use dshd_core::hypergraph::{load_edge_csv, write_edge_csv, VertexSet};
use dshd_core::lr::{GammaVariant, LrConfig, LrOracle};
use dshd_core::model::PlantedAlternative;
use dshd_core::sampler::{sample, SampleSpec};
use dshd_core::scan::{adaptive_scan, scan_known_p, ScanConfig};

#[derive(Parser)]
#[command(
    name = "dshd",
    version,
    about = "Dense subhypergraph detection: sampling, scan tests, and risk estimation"
)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one hypergraph replicate and write its edge list.
    Sample(SampleArgs),
    /// Known-probability scan test on an edge list.
    Scan(ScanArgs),
    /// Adaptive scan test; estimates the edge rate from the sample.
    AdaptiveScan(AdaptiveScanArgs),
    /// Detection-boundary diagnostics for a configured experiment.
    Boundary(BoundaryArgs),
    /// Exact likelihood-ratio statistics at small scale.
    LrOracle(LrOracleArgs),
    /// Monte Carlo risk estimate at one boost.
    Risk(RiskArgs),
    /// Power curve over a grid of boosts.
    PowerCurve(PowerCurveArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Config file; uses its [model] and, when present, [alternative].
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Replicate id: selects the random stream within the seed.
    #[arg(long)]
    replicate: u64,
    /// Output edge list CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    /// Edge list CSV.
    #[arg(long)]
    edges: PathBuf,
    /// Config file providing the null model via its [model] section.
    #[arg(long)]
    model: PathBuf,
    /// Largest candidate set size to scan.
    #[arg(long)]
    n_max: usize,
    /// Enumerate every candidate set (the default).
    #[arg(long, conflicts_with = "heuristic")]
    exact: bool,
    /// Greedy seed-and-swap search instead of full enumeration.
    #[arg(long)]
    heuristic: bool,
    /// Rejection threshold: reject when the statistic exceeds it.
    #[arg(long)]
    tau: f64,
    /// Output JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AdaptiveScanArgs {
    /// Edge list CSV.
    #[arg(long)]
    edges: PathBuf,
    /// Vertex count; an edge list alone cannot pin down isolated vertices.
    #[arg(long)]
    num_vertices: u32,
    /// Largest candidate set size to scan.
    #[arg(long)]
    n_max: usize,
    /// Enumerate every candidate set (the default).
    #[arg(long, conflicts_with = "heuristic")]
    exact: bool,
    /// Greedy seed-and-swap search instead of full enumeration.
    #[arg(long)]
    heuristic: bool,
    /// Rejection threshold: reject when the statistic exceeds it.
    #[arg(long)]
    tau: f64,
    /// Output JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundaryArgs {
    /// Config file; needs [model], [experiment], and optionally [boundary].
    #[arg(long)]
    config: PathBuf,
    /// Output JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LrOracleArgs {
    /// Edge list CSV.
    #[arg(long)]
    edges: PathBuf,
    /// Config file providing the null model via its [model] section.
    #[arg(long)]
    model: PathBuf,
    /// Planted support size.
    #[arg(long)]
    n: usize,
    /// Boost factor of the alternative.
    #[arg(long)]
    rho: f64,
    /// Also compute the truncated ratio over the small-signal event.
    #[arg(long)]
    truncated: bool,
    /// Slack in the truncation thresholds (used with --truncated).
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Truncation threshold form.
    #[arg(long, value_parser = ["with-p-factor", "literal"], default_value = "with-p-factor")]
    gamma_variant: String,
    /// Cap on the number of enumerated supports.
    #[arg(long)]
    support_budget: Option<u64>,
    /// Output JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RiskArgs {
    /// Config file describing model, test, and experiment.
    #[arg(long)]
    config: PathBuf,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
    /// Output format.
    #[arg(long, value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Args)]
struct PowerCurveArgs {
    /// Config file describing model, test, and experiment.
    #[arg(long)]
    config: PathBuf,
    /// Boost grid, comma separated (e.g. 1.0,1.5,2.0,4.0).
    #[arg(long, value_delimiter = ',', required = true)]
    rho_grid: Vec<f64>,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
    /// Output format.
    #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
    format: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.workers {
        None => dispatch(cli.command),
        Some(workers) => {
            with_worker_count(workers, || dispatch(cli.command)).context("worker pool")?
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Sample(args) => run_sample(args),
        Command::Scan(args) => run_scan(args),
        Command::AdaptiveScan(args) => run_adaptive_scan(args),
        Command::Boundary(args) => run_boundary(args),
        Command::LrOracle(args) => run_lr_oracle(args),
        Command::Risk(args) => run_risk(args),
        Command::PowerCurve(args) => run_power_curve(args),
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serialize")?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("write {}", path.display()))
}

fn run_sample(args: SampleArgs) -> anyhow::Result<()> {
    let cfg = load_run_config(&args.config).context("config")?;
    let model = cfg.model().context("config")?;
    let alternative = cfg.alternative(&model).context("config")?;
    let mut spec = match &alternative {
        None => SampleSpec::null(&model, args.seed, args.replicate),
        Some(alt) => SampleSpec::planted(&model, alt, args.seed, args.replicate),
    };
    if let Some(budget) = cfg.edge_budget() {
        spec.edge_budget = budget;
    }
    let g = sample(&spec).context("sample")?;
    write_edge_csv(&g, &args.out).context("write")?;
    println!(
        "wrote {} edges ({} hypothesis) to {}",
        g.num_edges(),
        if alternative.is_some() { "planted" } else { "null" },
        args.out.display()
    );
    Ok(())
}

fn scan_config(n_max: usize, heuristic: bool, tau: f64) -> ScanConfig {
    let mut cfg = if heuristic {
        ScanConfig::heuristic(n_max)
    } else {
        ScanConfig::exact(n_max)
    };
    cfg.tau = tau;
    cfg
}

fn report_scan(result: &dshd_core::scan::ScanResult, out: &Path) -> anyhow::Result<()> {
    write_json(result, out)?;
    println!(
        "statistic {:.6}, decision {}, wrote {}",
        result.statistic,
        match result.decision {
            dshd_core::scan::Decision::Reject => "reject",
            dshd_core::scan::Decision::Retain => "retain",
        },
        out.display()
    );
    Ok(())
}

fn run_scan(args: ScanArgs) -> anyhow::Result<()> {
    let model = load_model_file(&args.model).context("model")?;
    let g = load_edge_csv(&args.edges, model.num_vertices()).context("edges")?;
    let cfg = scan_config(args.n_max, args.heuristic, args.tau);
    let result = scan_known_p(&g, &model, &cfg).context("scan")?;
    report_scan(&result, &args.out)
}

fn run_adaptive_scan(args: AdaptiveScanArgs) -> anyhow::Result<()> {
    let g = load_edge_csv(&args.edges, args.num_vertices).context("edges")?;
    let cfg = scan_config(args.n_max, args.heuristic, args.tau);
    let result = adaptive_scan(&g, &cfg).context("scan")?;
    report_scan(&result, &args.out)
}

/// Everything the boundary subcommand reports for one configuration.
#[derive(Serialize)]
struct BoundaryOutput {
    epsilon: f64,
    rho: f64,
    supports: Vec<VertexSet>,
    /// Condition for asymptotically powerless tests at this boost.
    powerless: BoundaryReport,
    /// Condition for an asymptotically powerful scan at this boost.
    powerful: BoundaryReport,
    /// Growth-regime checks; present when delta and gamma_n are configured.
    #[serde(skip_serializing_if = "Option::is_none")]
    scenarios: Option<BoundaryReport>,
    cn: CnReport,
    /// Boosts at which each support's functional crosses the boundary.
    critical_rho: Vec<CriticalRhoRow>,
}

#[derive(Serialize)]
struct CriticalRhoRow {
    support: VertexSet,
    powerless: Option<f64>,
    powerful: Option<f64>,
}

fn run_boundary(args: BoundaryArgs) -> anyhow::Result<()> {
    let cfg = load_run_config(&args.config).context("config")?;
    let model = cfg.model().context("config")?;
    let settings = cfg.boundary_settings().context("config")?;
    let rho = settings
        .rho
        .context("config: boundary needs a boost (boundary.rho or experiment.rho)")?;
    let supports = cfg.supports(&model).context("config")?;
    let alts = supports
        .iter()
        .map(|s| PlantedAlternative::new(&model, s.clone(), rho))
        .collect::<dshd_core::Result<Vec<_>>>()
        .context("config")?;

    let epsilon = settings.epsilon;
    let mut rows = Vec::with_capacity(supports.len());
    for s in &supports {
        rows.push(CriticalRhoRow {
            support: s.clone(),
            powerless: critical_rho(&model, s, epsilon, CriticalTarget::Powerless)
                .context("boundary")?,
            powerful: critical_rho(&model, s, epsilon, CriticalTarget::Powerful)
                .context("boundary")?,
        });
    }
    let output = BoundaryOutput {
        epsilon,
        rho,
        supports: supports.clone(),
        powerless: check_condition_2(&model, &alts, epsilon).context("boundary")?,
        powerful: check_condition_3(&model, &alts, epsilon).context("boundary")?,
        scenarios: match &settings.scenario {
            None => None,
            Some(params) => Some(check_scenarios(&model, params, &supports).context("boundary")?),
        },
        cn: cn(&model, rho, epsilon, &supports).context("boundary")?,
        critical_rho: rows,
    };
    write_json(&output, &args.out)?;
    println!(
        "powerless {}, powerful {}, wrote {}",
        output.powerless.holds(),
        output.powerful.holds(),
        args.out.display()
    );
    Ok(())
}

fn run_lr_oracle(args: LrOracleArgs) -> anyhow::Result<()> {
    let model = load_model_file(&args.model).context("model")?;
    let g = load_edge_csv(&args.edges, model.num_vertices()).context("edges")?;
    let mut cfg = LrConfig::new(args.n, args.rho, args.epsilon);
    cfg.gamma_variant = match args.gamma_variant.as_str() {
        "literal" => GammaVariant::Literal,
        _ => GammaVariant::WithPFactor,
    };
    if let Some(budget) = args.support_budget {
        cfg.support_budget = budget;
    }
    let oracle = if args.truncated {
        LrOracle::with_truncation(&model, &cfg).context("lr-oracle")?
    } else {
        LrOracle::new(&model, &cfg).context("lr-oracle")?
    };
    let evaluation = oracle.evaluate(&g).context("lr-oracle")?;
    write_json(&evaluation, &args.out)?;
    println!(
        "mixture ratio {:.6e} over {} supports, wrote {}",
        evaluation.mixture,
        oracle.support_count(),
        args.out.display()
    );
    Ok(())
}

fn parse_format(s: &str) -> anyhow::Result<OutputFormat> {
    s.parse::<OutputFormat>().context("format")
}

fn configured_experiment(path: &Path) -> anyhow::Result<(RunConfig, dshd_core::experiment::Experiment)> {
    let cfg = load_run_config(path).context("config")?;
    let exp = cfg.experiment().context("config")?;
    Ok((cfg, exp))
}

fn run_risk(args: RiskArgs) -> anyhow::Result<()> {
    let format = parse_format(&args.format)?;
    let (cfg, exp) = configured_experiment(&args.config)?;
    let rho = cfg.rho().context("config")?;
    let estimate = exp.run_risk(rho).context("risk")?;
    dshd_core::experiment::write_risk(&estimate, format, &args.out).context("write")?;
    println!(
        "risk {:.4} = type1 {:.4} + worst type2 {:.4}, wrote {}",
        estimate.risk_hat,
        estimate.type1.rate,
        estimate.type2_worst,
        args.out.display()
    );
    Ok(())
}

fn run_power_curve(args: PowerCurveArgs) -> anyhow::Result<()> {
    let format = parse_format(&args.format)?;
    let (_, exp) = configured_experiment(&args.config)?;
    let rows = exp.power_curve(&args.rho_grid).context("power-curve")?;
    dshd_core::experiment::write_power(&rows, format, &args.out).context("write")?;
    println!("{} grid points, wrote {}", rows.len(), args.out.display());
    Ok(())
}
