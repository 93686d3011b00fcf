//! TOML experiment configuration shared with the CLI.
//!
//! A config file has up to seven sections; only `[model]` is always
//! required, the rest depend on the subcommand:
//!
//! ```toml
//! [model]
//! kind = "homogeneous"        # or "rank1", "explicit"
//! num_vertices = 24           # rank1 derives it from the weights
//! arity = 2
//! p = 0.15                    # homogeneous only
//! # weights = [0.1, 0.2, ...]     rank1, inline
//! # weights_file = "weights.csv"  rank1, CSV `vertex,weight`
//! # explicit_file = "probs.csv"   explicit, CSV `v1,...,vm,p`
//!
//! [alternative]               # optional: planted sampling
//! support = [0, 1, 2, 3, 4, 5]
//! rho = 6.0
//!
//! [experiment]                # risk / power-curve / boundary
//! n = 6
//! test = "known-scan"         # or "adaptive-scan", "lr-oracle"
//! replicates = 200
//! seed = 17
//! rho = 6.0                   # boost used by `risk`
//! epsilon = 0.1               # optional slack, default 0.1
//! supports = "default"        # or "canonical", or [[0,1,2], [3,4,5]]
//! random_supports = 8         # optional, default family only
//! edge_budget = 20000000      # optional
//!
//! [scan]                      # optional, defaults follow experiment.n
//! n_max = 6
//! size_min = 2
//! enumeration = "exact"       # or "heuristic"
//! seeds = 4                   # heuristic only
//! swap_rounds = 2             # heuristic only
//! subset_budget = 50000000
//! adaptive_size_floor = false
//!
//! [tau]                       # optional, default fixed 1.0
//! mode = "calibrated"         # or "fixed"
//! value = 1.0                 # fixed only
//! level = 0.05                # calibrated, default 0.05
//! replicates = 500            # calibrated, default 500
//!
//! [lr]                        # optional
//! support_budget = 1000000
//!
//! [boundary]                  # optional, `boundary` subcommand
//! epsilon = 0.1               # default: experiment.epsilon
//! rho = 6.0                   # default: experiment.rho
//! delta = 0.25                # with gamma_n: growth-regime checks
//! gamma_n = 1.0
//! ```
//!
//! Relative paths inside a config resolve against the config file's
//! directory. Unknown keys are rejected: a typo fails fast instead of
//! silently running with a default.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::boundary::ScenarioParams;
use crate::error::{Error, Result};
use crate::experiment::{default_supports, Experiment, TauSpec, TestKind};
use crate::hypergraph::VertexSet;
use crate::model::{
    load_explicit_csv, load_weights_csv, PlantedAlternative, ProbabilityModel,
};
use crate::scan::{Enumeration, ScanConfig};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
enum ModelKind {
    Homogeneous,
    Rank1,
    Explicit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    kind: ModelKind,
    num_vertices: Option<u32>,
    arity: usize,
    p: Option<f64>,
    weights: Option<Vec<f64>>,
    weights_file: Option<PathBuf>,
    explicit_file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlternativeSection {
    support: Vec<u32>,
    rho: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SupportsSpec {
    Named(String),
    Explicit(Vec<Vec<u32>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    n: usize,
    test: TestKind,
    replicates: u64,
    seed: u64,
    rho: Option<f64>,
    epsilon: Option<f64>,
    edge_budget: Option<u64>,
    supports: Option<SupportsSpec>,
    random_supports: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanSection {
    n_max: Option<usize>,
    size_min: Option<usize>,
    enumeration: Option<String>,
    seeds: Option<usize>,
    swap_rounds: Option<usize>,
    subset_budget: Option<u64>,
    adaptive_size_floor: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TauSection {
    mode: String,
    value: Option<f64>,
    level: Option<f64>,
    replicates: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LrSection {
    support_budget: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundarySection {
    epsilon: Option<f64>,
    rho: Option<f64>,
    delta: Option<f64>,
    gamma_n: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: ModelSection,
    alternative: Option<AlternativeSection>,
    experiment: Option<ExperimentSection>,
    scan: Option<ScanSection>,
    tau: Option<TauSection>,
    lr: Option<LrSection>,
    boundary: Option<BoundarySection>,
}

/// A parsed config file plus the directory its relative paths resolve
/// against.
#[derive(Debug)]
pub struct RunConfig {
    raw: RawConfig,
    base: PathBuf,
}

/// Boundary-diagnostic settings assembled from `[boundary]` with
/// `[experiment]` fallbacks.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySettings {
    pub epsilon: f64,
    /// Boost for the condition checks; `None` when neither section names one.
    pub rho: Option<f64>,
    /// Present only when both `delta` and `gamma_n` are configured.
    pub scenario: Option<ScenarioParams>,
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: RawConfig = toml::from_str(&text)
        .map_err(|e| Error::invalid_config(format!("{}: {e}", path.display())))?;
    Ok(RunConfig {
        raw,
        base: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
    })
}

/// Loads just the model from a config file, for subcommands whose other
/// inputs arrive as flags. Extra sections in the file are allowed.
pub fn load_model_file(path: &Path) -> Result<ProbabilityModel> {
    #[derive(Deserialize)]
    struct ModelOnly {
        model: ModelSection,
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: ModelOnly = toml::from_str(&text)
        .map_err(|e| Error::invalid_config(format!("{}: {e}", path.display())))?;
    build_model(&raw.model, path.parent().unwrap_or(Path::new(".")))
}

fn build_model(section: &ModelSection, base: &Path) -> Result<ProbabilityModel> {
    let forbid = |cond: bool, what: &str, kind: &str| -> Result<()> {
        if cond {
            Err(Error::invalid_config(format!(
                "model.{what} does not apply to kind = {kind:?}"
            )))
        } else {
            Ok(())
        }
    };
    match section.kind {
        ModelKind::Homogeneous => {
            forbid(section.weights.is_some(), "weights", "homogeneous")?;
            forbid(section.weights_file.is_some(), "weights_file", "homogeneous")?;
            forbid(section.explicit_file.is_some(), "explicit_file", "homogeneous")?;
            let n = section
                .num_vertices
                .ok_or_else(|| Error::invalid_config("homogeneous model needs num_vertices"))?;
            let p = section
                .p
                .ok_or_else(|| Error::invalid_config("homogeneous model needs p"))?;
            ProbabilityModel::homogeneous(n, section.arity, p)
        }
        ModelKind::Rank1 => {
            forbid(section.p.is_some(), "p", "rank1")?;
            forbid(section.explicit_file.is_some(), "explicit_file", "rank1")?;
            let model = match (&section.weights, &section.weights_file) {
                (Some(w), None) => ProbabilityModel::rank1(w.clone(), section.arity)?,
                (None, Some(file)) => load_weights_csv(&base.join(file), section.arity)?,
                (Some(_), Some(_)) => {
                    return Err(Error::invalid_config(
                        "rank1 model takes weights or weights_file, not both",
                    ))
                }
                (None, None) => {
                    return Err(Error::invalid_config(
                        "rank1 model needs weights or weights_file",
                    ))
                }
            };
            if let Some(n) = section.num_vertices {
                if n != model.num_vertices() {
                    return Err(Error::invalid_config(format!(
                        "num_vertices = {n} but the weights define {}",
                        model.num_vertices()
                    )));
                }
            }
            Ok(model)
        }
        ModelKind::Explicit => {
            forbid(section.p.is_some(), "p", "explicit")?;
            forbid(section.weights.is_some(), "weights", "explicit")?;
            forbid(section.weights_file.is_some(), "weights_file", "explicit")?;
            let n = section
                .num_vertices
                .ok_or_else(|| Error::invalid_config("explicit model needs num_vertices"))?;
            let file = section
                .explicit_file
                .as_ref()
                .ok_or_else(|| Error::invalid_config("explicit model needs explicit_file"))?;
            load_explicit_csv(&base.join(file), n, section.arity)
        }
    }
}

impl RunConfig {
    pub fn model(&self) -> Result<ProbabilityModel> {
        build_model(&self.raw.model, &self.base)
    }

    /// The planted alternative of `[alternative]`, if the section exists.
    pub fn alternative(&self, model: &ProbabilityModel) -> Result<Option<PlantedAlternative>> {
        match &self.raw.alternative {
            None => Ok(None),
            Some(section) => {
                let support = VertexSet::new(section.support.clone())?;
                Ok(Some(PlantedAlternative::new(model, support, section.rho)?))
            }
        }
    }

    fn experiment_section(&self) -> Result<&ExperimentSection> {
        self.raw
            .experiment
            .as_ref()
            .ok_or_else(|| Error::invalid_config("missing [experiment] section"))
    }

    /// `experiment.edge_budget`, when configured; the sampler default
    /// applies otherwise.
    pub fn edge_budget(&self) -> Option<u64> {
        self.raw.experiment.as_ref().and_then(|e| e.edge_budget)
    }

    /// The boost `experiment.rho`, required by the `risk` subcommand.
    pub fn rho(&self) -> Result<f64> {
        self.experiment_section()?
            .rho
            .ok_or_else(|| Error::invalid_config("missing experiment.rho"))
    }

    /// The support family the experiment evaluates.
    pub fn supports(&self, model: &ProbabilityModel) -> Result<Vec<VertexSet>> {
        let e = self.experiment_section()?;
        let random_count = e.random_supports.unwrap_or(8);
        match &e.supports {
            None => default_supports(model, e.n, e.seed, random_count),
            Some(SupportsSpec::Named(name)) => match name.as_str() {
                "default" => default_supports(model, e.n, e.seed, random_count),
                "canonical" => Ok(vec![VertexSet::new((0..e.n as u32).collect())?]),
                other => Err(Error::invalid_config(format!(
                    "experiment.supports = {other:?}; known names: \"default\", \"canonical\""
                ))),
            },
            Some(SupportsSpec::Explicit(lists)) => {
                let mut supports = Vec::with_capacity(lists.len());
                for members in lists {
                    let s = VertexSet::new(members.clone())?;
                    if s.len() != e.n {
                        return Err(Error::invalid_config(format!(
                            "support {s} has size {}, experiment.n is {}",
                            s.len(),
                            e.n
                        )));
                    }
                    supports.push(s);
                }
                Ok(supports)
            }
        }
    }

    fn scan_config(&self, n: usize) -> Result<ScanConfig> {
        let mut cfg = ScanConfig::exact(n);
        let Some(section) = &self.raw.scan else {
            return Ok(cfg);
        };
        if let Some(n_max) = section.n_max {
            cfg.n_max = n_max;
        }
        cfg.size_min = section.size_min;
        match section.enumeration.as_deref() {
            None | Some("exact") => {
                for (key, set) in [
                    ("seeds", section.seeds.is_some()),
                    ("swap_rounds", section.swap_rounds.is_some()),
                ] {
                    if set {
                        return Err(Error::invalid_config(format!(
                            "scan.{key} applies only to enumeration = \"heuristic\""
                        )));
                    }
                }
            }
            Some("heuristic") => {
                cfg.enumeration = Enumeration::Heuristic {
                    seeds: section.seeds.unwrap_or(usize::MAX),
                    swap_rounds: section.swap_rounds.unwrap_or(2),
                };
            }
            Some(other) => {
                return Err(Error::invalid_config(format!(
                    "scan.enumeration = {other:?}; use \"exact\" or \"heuristic\""
                )))
            }
        }
        if let Some(budget) = section.subset_budget {
            cfg.subset_budget = budget;
        }
        cfg.restrict_size_floor = section.adaptive_size_floor.unwrap_or(false);
        Ok(cfg)
    }

    fn tau_spec(&self) -> Result<TauSpec> {
        let Some(section) = &self.raw.tau else {
            return Ok(TauSpec::Fixed { value: 1.0 });
        };
        match section.mode.as_str() {
            "fixed" => {
                for (key, set) in [
                    ("level", section.level.is_some()),
                    ("replicates", section.replicates.is_some()),
                ] {
                    if set {
                        return Err(Error::invalid_config(format!(
                            "tau.{key} applies only to mode = \"calibrated\""
                        )));
                    }
                }
                Ok(TauSpec::Fixed {
                    value: section.value.unwrap_or(1.0),
                })
            }
            "calibrated" => {
                if section.value.is_some() {
                    return Err(Error::invalid_config(
                        "tau.value applies only to mode = \"fixed\"",
                    ));
                }
                Ok(TauSpec::Calibrated {
                    level: section.level.unwrap_or(0.05),
                    replicates: section.replicates.unwrap_or(500),
                })
            }
            other => Err(Error::invalid_config(format!(
                "tau.mode = {other:?}; use \"fixed\" or \"calibrated\""
            ))),
        }
    }

    /// Assembles the full experiment for `risk` and `power-curve`.
    pub fn experiment(&self) -> Result<Experiment> {
        let model = self.model()?;
        let e = self.experiment_section()?;
        let supports = self.supports(&model)?;
        let scan = self.scan_config(e.n)?;
        let tau = self.tau_spec()?;
        let mut exp = Experiment::new(model, supports, e.test, scan, e.replicates, e.seed, tau);
        if let Some(epsilon) = e.epsilon {
            exp.epsilon = epsilon;
        }
        if let Some(budget) = e.edge_budget {
            exp.edge_budget = budget;
        }
        if let Some(lr) = &self.raw.lr {
            if let Some(budget) = lr.support_budget {
                exp.lr_support_budget = budget;
            }
        }
        Ok(exp)
    }

    /// Settings for the `boundary` subcommand.
    pub fn boundary_settings(&self) -> Result<BoundarySettings> {
        let experiment = self.raw.experiment.as_ref();
        let section = self.raw.boundary.as_ref();
        let epsilon = section
            .and_then(|b| b.epsilon)
            .or(experiment.and_then(|e| e.epsilon))
            .unwrap_or(0.1);
        let rho = section
            .and_then(|b| b.rho)
            .or(experiment.and_then(|e| e.rho));
        let scenario = match section.map(|b| (b.delta, b.gamma_n)) {
            None | Some((None, None)) => None,
            Some((Some(delta), Some(gamma_n))) => Some(ScenarioParams {
                epsilon,
                delta,
                gamma_n,
            }),
            Some(_) => {
                return Err(Error::invalid_config(
                    "boundary.delta and boundary.gamma_n come together or not at all",
                ))
            }
        };
        Ok(BoundarySettings {
            epsilon,
            rho,
            scenario,
        })
    }
}
