//! Monte Carlo risk harness.
//!
//! The risk of a test is its null rejection rate plus the worst retain
//! rate over planted supports. True worst cases range over all `C(N, n)`
//! supports; the harness evaluates a caller-supplied finite family and
//! says so in its output. Replicate streams never overlap: the null uses
//! replicate ids `[0, R)`, planted support `j` uses `[R(j+1), R(j+2))`,
//! and threshold calibration runs on a seed derived from a fixed tag.
//!
//! Determinism contract: identical [`Experiment`] values (seed included)
//! produce byte-identical emitted files under any worker count. Replicates
//! are evaluated independently and reduced by counting, so no
//! floating-point reduction order depends on scheduling.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary;
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, VertexSet};
use crate::lr::{LrConfig, LrOracle, DEFAULT_SUPPORT_BUDGET};
use crate::model::{PlantedAlternative, ProbabilityModel};
use crate::sampler::{derive_seed, sample, uniform01, SampleSpec, DEFAULT_EDGE_BUDGET};
use crate::scan::{adaptive_scan, calibrate_threshold, scan_known_p, ScanConfig, ScanStatistic};

/// Stream tag separating calibration replicates from evaluation replicates.
const CALIBRATION_TAG: u64 = 0x5ca1_ab1e_ca11_b3a7;

/// Stream tag for the seeded random supports of [`default_supports`].
const SUPPORT_TAG: u64 = 0x5eed_5e75_0f5e_7500;

/// Two-sided 95% normal quantile used by every Wilson interval.
const Z95: f64 = 1.959963984540054;

/// Which test the harness drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    KnownScan,
    AdaptiveScan,
    LrOracle,
}

/// Rejection threshold: fixed, or an empirical null quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum TauSpec {
    /// Compare the statistic against this value. Infinities are legal and
    /// give the constant always-reject / always-retain tests.
    Fixed { value: f64 },
    /// `(1 - level)` empirical quantile of the statistic over fresh null
    /// replicates on a dedicated stream.
    Calibrated { level: f64, replicates: u64 },
}

/// A binomial rate with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl RateEstimate {
    pub fn new(successes: u64, trials: u64) -> RateEstimate {
        let (lo, hi) = wilson_interval(successes, trials);
        RateEstimate {
            successes,
            trials,
            rate: if trials == 0 {
                0.0
            } else {
                successes as f64 / trials as f64
            },
            lo,
            hi,
        }
    }

    /// Interval width, the unit of the monotonicity tolerances.
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (Z95 / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Retain rate of one planted support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportRate {
    pub support: Vec<u32>,
    pub retain: RateEstimate,
}

/// Estimated risk of one test at one boost factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub test: TestKind,
    pub rho: f64,
    pub tau: f64,
    pub tau_spec: TauSpec,
    pub replicates: u64,
    /// Whether the statistic was computed by exact enumeration on every
    /// replicate (heuristic scans clear this).
    pub exact: bool,
    pub type1: RateEstimate,
    pub type2_by_support: Vec<SupportRate>,
    pub type2_worst: f64,
    pub worst_support: Vec<u32>,
    /// `type1.rate + type2_worst`, in `[0, 2]`.
    pub risk_hat: f64,
    /// Reminder that the worst case ranges over the evaluated family only.
    pub support_family: String,
}

/// One row of a power curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub rho: f64,
    /// Smallest boundary functional over the evaluated supports: the
    /// hardest alternative in the family.
    pub functional: f64,
    /// Whole family sits at or below the powerless side of the boundary.
    pub powerless: bool,
    /// Whole family clears the powerful side.
    pub powerful: bool,
    pub type1: f64,
    pub power: f64,
    pub power_lo: f64,
    pub power_hi: f64,
    pub risk: f64,
}

/// A fully specified experiment; the CLI builds one from a config file.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub model: ProbabilityModel,
    /// Evaluated planted supports, all of one size `n`.
    pub supports: Vec<VertexSet>,
    pub test: TestKind,
    pub scan: ScanConfig,
    /// Slack for the boundary diagnostics and the truncation levels.
    pub epsilon: f64,
    pub replicates: u64,
    pub seed: u64,
    pub tau: TauSpec,
    pub edge_budget: u64,
    pub lr_support_budget: u64,
}

impl Experiment {
    pub fn new(
        model: ProbabilityModel,
        supports: Vec<VertexSet>,
        test: TestKind,
        scan: ScanConfig,
        replicates: u64,
        seed: u64,
        tau: TauSpec,
    ) -> Experiment {
        Experiment {
            model,
            supports,
            test,
            scan,
            epsilon: 0.1,
            replicates,
            seed,
            tau,
            edge_budget: DEFAULT_EDGE_BUDGET,
            lr_support_budget: DEFAULT_SUPPORT_BUDGET,
        }
    }

    /// Common planted size of the supports.
    pub fn planted_size(&self) -> usize {
        self.supports.first().map_or(0, |s| s.len())
    }

    fn validate(&self) -> Result<()> {
        if self.supports.is_empty() {
            return Err(Error::domain("experiment", "no supports to evaluate"));
        }
        let n = self.planted_size();
        for s in &self.supports {
            s.check_range(self.model.num_vertices())?;
            if s.len() != n {
                return Err(Error::domain(
                    "experiment",
                    format!("support sizes differ: {} vs {}", s.len(), n),
                ));
            }
        }
        if n < self.model.arity() {
            return Err(Error::domain(
                "experiment",
                format!("support size {n} below arity {}", self.model.arity()),
            ));
        }
        if self.replicates == 0 {
            return Err(Error::domain("experiment", "need at least one replicate"));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::domain(
                "experiment",
                format!("epsilon = {} not in (0, inf)", self.epsilon),
            ));
        }
        match self.tau {
            TauSpec::Fixed { value } => {
                if value.is_nan() {
                    return Err(Error::domain("experiment", "tau is NaN"));
                }
            }
            TauSpec::Calibrated { level, replicates } => {
                if !(level > 0.0 && level < 1.0) {
                    return Err(Error::domain(
                        "experiment",
                        format!("calibration level {level} not in (0, 1)"),
                    ));
                }
                if replicates < 50 {
                    return Err(Error::domain(
                        "experiment",
                        format!("{replicates} calibration replicates, need at least 50"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn engine(&self, rho: f64) -> Result<TestEngine> {
        Ok(match self.test {
            TestKind::KnownScan => TestEngine::KnownScan,
            TestKind::AdaptiveScan => TestEngine::AdaptiveScan,
            TestKind::LrOracle => {
                let cfg = LrConfig {
                    n: self.planted_size(),
                    rho,
                    epsilon: self.epsilon,
                    gamma_variant: Default::default(),
                    support_budget: self.lr_support_budget,
                };
                TestEngine::Lr(Box::new(LrOracle::new(&self.model, &cfg)?))
            }
        })
    }

    fn statistic(&self, engine: &TestEngine, g: &Hypergraph) -> Result<f64> {
        match engine {
            TestEngine::KnownScan => Ok(scan_known_p(g, &self.model, &self.scan)?.statistic),
            TestEngine::AdaptiveScan => Ok(adaptive_scan(g, &self.scan)?.statistic),
            TestEngine::Lr(oracle) => Ok(oracle.evaluate(g)?.mixture),
        }
    }

    fn resolve_tau(&self, engine: &TestEngine) -> Result<f64> {
        let (level, cal_replicates) = match self.tau {
            TauSpec::Fixed { value } => return Ok(value),
            TauSpec::Calibrated { level, replicates } => (level, replicates),
        };
        let cal_seed = derive_seed(self.seed, CALIBRATION_TAG);
        match engine {
            TestEngine::KnownScan => calibrate_threshold(
                &self.model,
                &self.scan,
                ScanStatistic::KnownP,
                level,
                cal_replicates,
                cal_seed,
                self.edge_budget,
            ),
            TestEngine::AdaptiveScan => calibrate_threshold(
                &self.model,
                &self.scan,
                ScanStatistic::Adaptive,
                level,
                cal_replicates,
                cal_seed,
                self.edge_budget,
            ),
            TestEngine::Lr(_) => {
                let mut values = self.batch(engine, None, cal_seed, 0, cal_replicates)?;
                values.sort_unstable_by(|a, b| {
                    a.partial_cmp(b).expect("statistics are finite")
                });
                let idx = ((1.0 - level) * cal_replicates as f64).ceil() as usize;
                Ok(values[idx.clamp(1, cal_replicates as usize) - 1])
            }
        }
    }

    /// Statistics for `count` replicates starting at replicate id `base`.
    fn batch(
        &self,
        engine: &TestEngine,
        alt: Option<&PlantedAlternative>,
        seed: u64,
        base: u64,
        count: u64,
    ) -> Result<Vec<f64>> {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut spec = match alt {
                    None => SampleSpec::null(&self.model, seed, base + i),
                    Some(a) => SampleSpec::planted(&self.model, a, seed, base + i),
                };
                spec.edge_budget = self.edge_budget;
                self.statistic(engine, &sample(&spec)?)
            })
            .collect()
    }

    /// Estimates the risk at boost `rho` over the configured support family.
    pub fn run_risk(&self, rho: f64) -> Result<RiskEstimate> {
        self.validate()?;
        let alts: Vec<PlantedAlternative> = self
            .supports
            .iter()
            .map(|s| PlantedAlternative::new(&self.model, s.clone(), rho))
            .collect::<Result<_>>()?;
        let engine = self.engine(rho)?;
        let tau = self.resolve_tau(&engine)?;
        let r = self.replicates;

        let null_stats = self.batch(&engine, None, self.seed, 0, r)?;
        let rejections = null_stats.iter().filter(|&&s| s > tau).count() as u64;
        let type1 = RateEstimate::new(rejections, r);

        let mut type2_by_support = Vec::with_capacity(alts.len());
        for (j, alt) in alts.iter().enumerate() {
            let base = r * (j as u64 + 1);
            let stats = self.batch(&engine, Some(alt), self.seed, base, r)?;
            let retained = stats.iter().filter(|&&s| !(s > tau)).count() as u64;
            type2_by_support.push(SupportRate {
                support: alt.support().members().to_vec(),
                retain: RateEstimate::new(retained, r),
            });
        }

        // Worst support: highest retain rate, first on ties.
        let worst = type2_by_support
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.retain
                    .rate
                    .partial_cmp(&b.retain.rate)
                    .expect("rates are finite")
                    .then(ib.cmp(ia))
            })
            .expect("supports are nonempty")
            .1;

        let type2_worst = worst.retain.rate;
        Ok(RiskEstimate {
            test: self.test,
            rho,
            tau,
            tau_spec: self.tau,
            replicates: r,
            exact: self.is_exact(),
            type1,
            type2_worst,
            worst_support: worst.support.clone(),
            risk_hat: type1.rate + type2_worst,
            support_family: format!(
                "worst case over {} evaluated supports of size {}, not all size-{} sets",
                self.supports.len(),
                self.planted_size(),
                self.planted_size(),
            ),
            type2_by_support,
        })
    }

    /// One risk estimate per grid point, plus the boundary diagnostics of
    /// the evaluated family. Deterministic given the seed.
    pub fn power_curve(&self, rho_grid: &[f64]) -> Result<Vec<PowerRow>> {
        let mut rows = Vec::with_capacity(rho_grid.len());
        for &rho in rho_grid {
            let est = self.run_risk(rho)?;
            let alts: Vec<PlantedAlternative> = self
                .supports
                .iter()
                .map(|s| PlantedAlternative::new(&self.model, s.clone(), rho))
                .collect::<Result<_>>()?;
            let mut functional = f64::INFINITY;
            for alt in &alts {
                functional = functional.min(boundary::boundary_functional(&self.model, alt)?);
            }
            let powerless = boundary::check_condition_2(&self.model, &alts, self.epsilon)?;
            let powerful = boundary::check_condition_3(&self.model, &alts, self.epsilon)?;
            let worst = est
                .type2_by_support
                .iter()
                .find(|s| s.support == est.worst_support)
                .expect("worst support is in the table");
            rows.push(PowerRow {
                rho,
                functional,
                powerless: powerless.holds(),
                powerful: powerful.holds(),
                type1: est.type1.rate,
                power: 1.0 - est.type2_worst,
                power_lo: 1.0 - worst.retain.hi,
                power_hi: 1.0 - worst.retain.lo,
                risk: est.risk_hat,
            });
        }
        Ok(rows)
    }

    fn is_exact(&self) -> bool {
        match self.test {
            TestKind::KnownScan | TestKind::AdaptiveScan => {
                matches!(self.scan.enumeration, crate::scan::Enumeration::Exact)
            }
            TestKind::LrOracle => true,
        }
    }
}

enum TestEngine {
    KnownScan,
    AdaptiveScan,
    Lr(Box<LrOracle>),
}

/// Default support family: one canonical support for homogeneous models
/// (every support is equivalent by exchangeability), the min-weight and
/// max-weight sets plus `random_count` seeded random sets for rank-1
/// models, and the canonical set plus random sets otherwise. Duplicates
/// collapse; order is deterministic.
pub fn default_supports(
    model: &ProbabilityModel,
    n: usize,
    seed: u64,
    random_count: usize,
) -> Result<Vec<VertexSet>> {
    let num_vertices = model.num_vertices();
    if n < model.arity() || n > num_vertices as usize {
        return Err(Error::domain(
            "support family",
            format!("size {n} not in [{}, {num_vertices}]", model.arity()),
        ));
    }
    let canonical: Vec<u32> = (0..n as u32).collect();
    if model.is_homogeneous() {
        return Ok(vec![VertexSet::new(canonical)?]);
    }

    let mut family: Vec<Vec<u32>> = Vec::new();
    match model.weights() {
        Ok(weights) => {
            let mut order: Vec<u32> = (0..num_vertices).collect();
            order.sort_by(|&a, &b| {
                weights[a as usize]
                    .partial_cmp(&weights[b as usize])
                    .expect("weights are finite")
                    .then(a.cmp(&b))
            });
            let mut lightest: Vec<u32> = order[..n].to_vec();
            lightest.sort_unstable();
            family.push(lightest);
            let mut heaviest: Vec<u32> = order
                .iter()
                .rev()
                .take(n)
                .copied()
                .collect();
            heaviest.sort_unstable();
            family.push(heaviest);
        }
        Err(_) => family.push(canonical),
    }

    let stream = derive_seed(seed, SUPPORT_TAG);
    for j in 0..random_count {
        let mut chosen: BTreeSet<u32> = BTreeSet::new();
        let mut counter = 0u64;
        while chosen.len() < n {
            let u = uniform01(stream, j as u64, counter);
            counter += 1;
            chosen.insert(((u * num_vertices as f64) as u32).min(num_vertices - 1));
        }
        family.push(chosen.into_iter().collect());
    }

    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut supports = Vec::new();
    for members in family {
        if seen.insert(members.clone()) {
            supports.push(VertexSet::new(members)?);
        }
    }
    Ok(supports)
}

/// Runs `f` on a dedicated pool with exactly `workers` threads. Output
/// bytes must not depend on the choice.
pub fn with_worker_count<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::domain("worker pool", e.to_string()))?;
    Ok(pool.install(f))
}

/// Serialization format of the emitted tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<OutputFormat> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::domain(
                "output format",
                format!("{other:?} is neither \"csv\" nor \"json\""),
            )),
        }
    }
}

fn stream_err(e: impl ToString) -> Error {
    Error::io("<stream>", std::io::Error::other(e.to_string()))
}

pub fn emit_risk_json<W: Write>(est: &RiskEstimate, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, est).map_err(stream_err)?;
    w.write_all(b"\n").map_err(stream_err)
}

pub fn load_risk_json<R: Read>(r: R) -> Result<RiskEstimate> {
    serde_json::from_reader(r).map_err(stream_err)
}

/// One line of the risk CSV; the `type2` metric repeats per support and
/// the final `risk` line carries the headline number.
#[derive(Debug, Serialize, Deserialize)]
struct RiskCsvRow {
    metric: String,
    support: String,
    successes: Option<u64>,
    trials: Option<u64>,
    value: f64,
    lo: Option<f64>,
    hi: Option<f64>,
}

fn support_label(support: &[u32]) -> String {
    support
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn emit_risk_csv<W: Write>(est: &RiskEstimate, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut rows = vec![RiskCsvRow {
        metric: "type1".into(),
        support: String::new(),
        successes: Some(est.type1.successes),
        trials: Some(est.type1.trials),
        value: est.type1.rate,
        lo: Some(est.type1.lo),
        hi: Some(est.type1.hi),
    }];
    for s in &est.type2_by_support {
        rows.push(RiskCsvRow {
            metric: "type2".into(),
            support: support_label(&s.support),
            successes: Some(s.retain.successes),
            trials: Some(s.retain.trials),
            value: s.retain.rate,
            lo: Some(s.retain.lo),
            hi: Some(s.retain.hi),
        });
    }
    rows.push(RiskCsvRow {
        metric: "risk".into(),
        support: support_label(&est.worst_support),
        successes: None,
        trials: None,
        value: est.risk_hat,
        lo: None,
        hi: None,
    });
    for row in rows {
        out.serialize(row).map_err(stream_err)?;
    }
    out.flush().map_err(stream_err)
}

pub fn emit_power_json<W: Write>(rows: &[PowerRow], mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, rows).map_err(stream_err)?;
    w.write_all(b"\n").map_err(stream_err)
}

pub fn load_power_json<R: Read>(r: R) -> Result<Vec<PowerRow>> {
    serde_json::from_reader(r).map_err(stream_err)
}

pub fn emit_power_csv<W: Write>(rows: &[PowerRow], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(true).from_writer(w);
    if rows.is_empty() {
        // serde-driven headers need at least one record; write them by hand
        // so an empty table still has its schema line.
        out.write_record([
            "rho",
            "functional",
            "powerless",
            "powerful",
            "type1",
            "power",
            "power_lo",
            "power_hi",
            "risk",
        ])
        .map_err(stream_err)?;
    }
    for row in rows {
        out.serialize(row).map_err(stream_err)?;
    }
    out.flush().map_err(stream_err)
}

pub fn load_power_csv<R: Read>(r: R) -> Result<Vec<PowerRow>> {
    let mut reader = csv::Reader::from_reader(r);
    reader
        .deserialize()
        .map(|row| row.map_err(stream_err))
        .collect()
}

pub fn write_risk(est: &RiskEstimate, format: OutputFormat, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    match format {
        OutputFormat::Json => emit_risk_json(est, file),
        OutputFormat::Csv => emit_risk_csv(est, file),
    }
    .map_err(|e| retag(e, path))
}

pub fn write_power(rows: &[PowerRow], format: OutputFormat, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    match format {
        OutputFormat::Json => emit_power_json(rows, file),
        OutputFormat::Csv => emit_power_csv(rows, file),
    }
    .map_err(|e| retag(e, path))
}

/// Replace the placeholder stream path with the real one.
fn retag(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}
