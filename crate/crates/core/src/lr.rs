//! Exact likelihood-ratio machinery at exhaustive-support scale.
//!
//! For a candidate support `s` with boost `rho`, each in-support edge `e`
//! moves from Bernoulli(p_e) to Bernoulli(q_e), `q_e = min(rho p_e, 1)`,
//! and the per-support ratio is
//!
//! ```text
//! L_s = prod_{e in s} q_e^{A_e} (1-q_e)^{1-A_e} / (p_e^{A_e} (1-p_e)^{1-A_e})
//!     = exp( sum_{e in s} A_e theta(p_e, q_e) - Lambda(p_e, theta(p_e, q_e)) ).
//! ```
//!
//! [`lr_mixture`] averages `L_s` over every size-`n` support; the truncated
//! variant [`truncated_lr`] keeps only supports whose internal edge counts
//! stay below their truncation levels ([`gamma_event`]). Everything is
//! accumulated in log space: `L_s` spans hundreds of orders of magnitude
//! even on toy instances.
//!
//! The whole module is a brute-force benchmark. Budgets keep it honest:
//! support enumeration is capped by [`LrConfig::support_budget`] and the
//! edge-slot table by a fixed internal cap.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::boundary;
use crate::error::{Error, Result};
use crate::hypergraph::{colex_rank, colex_unrank, CanonicalEdge, Hypergraph, VertexSet};
use crate::math;
use crate::model::{PlantedAlternative, ProbabilityModel};

/// Default cap on the number of enumerated supports `C(N, n)`.
pub const DEFAULT_SUPPORT_BUDGET: u64 = 1_000_000;

/// Cap on the edge-slot table `C(N, m)` used for presence lookups.
const EDGE_SLOT_CAP: u64 = 1 << 26;

/// Relative slack when discarding truncation checks that cannot bind; see
/// [`MemberPlan`].
const PRUNE_SLACK: f64 = 1e-9;

/// Which right-hand side the truncation event compares against.
///
/// The event bounds the tilted internal count of each high-signal subset
/// `D`: `sum_{e in D} A_e theta_e <= zeta_D * RHS_D`. The default takes
/// `RHS_D = sum_{e in D} p_e theta_e`, the form whose Bennett-type tail
/// actually closes; the literal variant takes `RHS_D = sum_{e in D}
/// theta_e`, which for `rho >= 1` is never smaller and is vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaVariant {
    #[default]
    WithPFactor,
    Literal,
}

/// Parameters shared by the mixture and truncated oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrConfig {
    /// Planted support size; supports of exactly this size are mixed over.
    pub n: usize,
    /// Boost factor shared by every support, `rho >= 1`.
    pub rho: f64,
    /// Slack parameter of the truncation levels `zeta_D`.
    pub epsilon: f64,
    #[serde(default)]
    pub gamma_variant: GammaVariant,
    /// Cap on `C(N, n)`; enumeration beyond it is refused, not approximated.
    #[serde(default = "default_support_budget")]
    pub support_budget: u64,
}

fn default_support_budget() -> u64 {
    DEFAULT_SUPPORT_BUDGET
}

impl LrConfig {
    pub fn new(n: usize, rho: f64, epsilon: f64) -> Self {
        LrConfig {
            n,
            rho,
            epsilon,
            gamma_variant: GammaVariant::default(),
            support_budget: DEFAULT_SUPPORT_BUDGET,
        }
    }
}

/// Mixture and truncated likelihood ratios of one graph.
///
/// The truncated pair is `None` when the oracle was built without
/// truncation plans ([`LrOracle::new`] rather than
/// [`LrOracle::with_truncation`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrEvaluation {
    pub log_mixture: f64,
    pub mixture: f64,
    pub log_truncated: Option<f64>,
    pub truncated: Option<f64>,
}

/// One edge's role in the ratio, precomputed per edge slot.
#[derive(Debug, Clone, Copy)]
enum EdgeKind {
    /// `0 < p < q < 1`: the usual exponential-family tilt.
    Tilted { p: f64, theta: f64, lambda: f64 },
    /// `q = 1`: the alternative forces the edge. An absent edge sends the
    /// whole ratio to zero; a present one contributes `-ln p`.
    Saturated { neg_ln_p: f64 },
    /// `p = 0` (edge impossible under both measures) or `p = 1` with
    /// `rho = 1` (forced under both): carries no likelihood information.
    Inert,
}

fn edge_kind(p: f64, rho: f64) -> Result<EdgeKind> {
    if p <= 0.0 {
        return Ok(EdgeKind::Inert);
    }
    let q = rho * p;
    if q >= 1.0 {
        if p >= 1.0 {
            return Ok(EdgeKind::Inert);
        }
        return Ok(EdgeKind::Saturated { neg_ln_p: -p.ln() });
    }
    if rho == 1.0 {
        // theta(p, p) is exactly 0 and Lambda(p, 0) exactly 0; short-circuit
        // so the collapse to L = 1 is bitwise, not merely approximate.
        return Ok(EdgeKind::Tilted {
            p,
            theta: 0.0,
            lambda: 0.0,
        });
    }
    let theta = math::theta(p, q)?;
    let lambda = math::lambda_mgf(p, theta)?;
    Ok(EdgeKind::Tilted { p, theta, lambda })
}

/// Edge slots (colex ranks) and tilt terms for all `C(N, m)` edges.
struct SlotTable {
    kinds: Vec<EdgeKind>,
}

impl SlotTable {
    fn build(model: &ProbabilityModel, rho: f64) -> Result<SlotTable> {
        let slots = math::binom(model.num_vertices() as u64, model.arity() as u64)?;
        if slots > EDGE_SLOT_CAP {
            return Err(Error::BudgetExceeded {
                stage: "edge-slot table",
                required: slots as u128,
                budget: EDGE_SLOT_CAP as u128,
            });
        }
        let mut kinds = Vec::with_capacity(slots as usize);
        for rank in 0..slots {
            let edge = colex_unrank(rank, model.arity())?;
            let p = model.edge_probability(&edge)?;
            kinds.push(edge_kind(p, rho)?);
        }
        Ok(SlotTable { kinds })
    }
}

fn presence_bitmap(g: &Hypergraph, slots: usize) -> Result<Vec<bool>> {
    let mut present = vec![false; slots];
    for e in g.edges() {
        present[colex_rank(e)? as usize] = true;
    }
    Ok(present)
}

fn check_shape(g: &Hypergraph, num_vertices: u32, arity: usize) -> Result<()> {
    if g.num_vertices() != num_vertices || g.arity() != arity {
        return Err(Error::domain(
            "likelihood ratio",
            format!(
                "graph shape ({}, {}) does not match model ({}, {})",
                g.num_vertices(),
                g.arity(),
                num_vertices,
                arity
            ),
        ));
    }
    Ok(())
}

/// One truncation check `sum_{e in D, present} theta_e <= rhs`.
///
/// Checks whose all-edges-present left side cannot reach `rhs` (with
/// [`PRUNE_SLACK`] headroom for summation rounding) are dropped at plan
/// time; dropping one never changes the event's value.
#[derive(Debug)]
struct MemberPlan {
    edges: Vec<(usize, f64)>,
    rhs: f64,
}

impl MemberPlan {
    fn holds(&self, present: &[bool]) -> bool {
        let mut lhs = 0.0;
        for &(slot, theta) in &self.edges {
            if present[slot] {
                lhs += theta;
            }
        }
        lhs <= self.rhs
    }
}

/// Precomputed evaluation plan for one support.
#[derive(Debug)]
struct SupportPlan {
    support: VertexSet,
    /// `(slot, theta)` for tilted in-support edges, colex order.
    tilted: Vec<(usize, f64)>,
    /// `(slot, -ln p)` for saturated in-support edges; any absent one
    /// zeroes the ratio.
    saturated: Vec<(usize, f64)>,
    /// `-sum Lambda` over tilted edges: the graph-independent part.
    base: f64,
    members: Vec<MemberPlan>,
}

impl SupportPlan {
    fn log_lr(&self, present: &[bool]) -> f64 {
        let mut log = self.base;
        for &(slot, neg_ln_p) in &self.saturated {
            if !present[slot] {
                return f64::NEG_INFINITY;
            }
            log += neg_ln_p;
        }
        for &(slot, theta) in &self.tilted {
            if present[slot] {
                log += theta;
            }
        }
        log
    }

    fn gamma_holds(&self, present: &[bool]) -> bool {
        self.members.iter().all(|m| m.holds(present))
    }
}

/// For each size-m subset of `members` (colex order over local indices),
/// calls `visit(global slot, kind)`.
fn for_each_inner_edge<F>(
    members: &[u32],
    arity: usize,
    kinds: &[EdgeKind],
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, EdgeKind) -> Result<()>,
{
    let count = math::binom(members.len() as u64, arity as u64)?;
    for local in 0..count {
        let pattern = colex_unrank(local, arity)?;
        let vertices: Vec<u32> = pattern
            .vertices()
            .iter()
            .map(|&i| members[i as usize])
            .collect();
        let edge = CanonicalEdge::new(vertices)?;
        let slot = colex_rank(&edge)? as usize;
        visit(slot, kinds[slot])?;
    }
    Ok(())
}

/// Exhaustive likelihood-ratio oracle over all `C(N, n)` supports.
///
/// Construction does all per-support work (tilt terms, truncation levels);
/// [`LrOracle::evaluate`] then costs one pass over in-support edges per
/// replicate, so a Monte Carlo loop pays the enumeration once.
#[derive(Debug)]
pub struct LrOracle {
    num_vertices: u32,
    arity: usize,
    plans: Vec<SupportPlan>,
    /// `ln C(N, n)`, via the exact count so `rho = 1` yields exactly 1.
    ln_support_count: f64,
    truncation: bool,
}

impl LrOracle {
    /// Mixture-only oracle; [`LrEvaluation::truncated`] will be `None`.
    pub fn new(model: &ProbabilityModel, cfg: &LrConfig) -> Result<LrOracle> {
        LrOracle::build(model, cfg, false)
    }

    /// Oracle that also evaluates the truncated ratio. Requires the
    /// high-signal family machinery, hence stricter shape preconditions
    /// (in particular `N / n > e`).
    pub fn with_truncation(model: &ProbabilityModel, cfg: &LrConfig) -> Result<LrOracle> {
        LrOracle::build(model, cfg, true)
    }

    fn build(model: &ProbabilityModel, cfg: &LrConfig, truncation: bool) -> Result<LrOracle> {
        let num_vertices = model.num_vertices();
        let arity = model.arity();
        if cfg.n < arity || cfg.n > num_vertices as usize {
            return Err(Error::domain(
                "likelihood ratio",
                format!(
                    "support size {} not in [{}, {}]",
                    cfg.n, arity, num_vertices
                ),
            ));
        }
        let count = math::binom_u128(num_vertices as u128, cfg.n as u128);
        if count > cfg.support_budget as u128 {
            return Err(Error::BudgetExceeded {
                stage: "support enumeration",
                required: count,
                budget: cfg.support_budget as u128,
            });
        }
        let count = count as u64;
        let slot_table = SlotTable::build(model, cfg.rho)?;
        let kinds = &slot_table.kinds;

        // zeta depends on the candidate only through (|D|, E0[A_D]).
        let mut zeta_cache: HashMap<(usize, u64), f64> = HashMap::new();
        let mut plans = Vec::with_capacity(count as usize);
        for rank in 0..count {
            let support = VertexSet::new(colex_unrank(rank, cfg.n)?.vertices().to_vec())?;
            // Validates rho and the cap rho * p_e <= 1 inside the support.
            let alt = PlantedAlternative::new(model, support.clone(), cfg.rho)?;

            let mut tilted = Vec::new();
            let mut saturated = Vec::new();
            let mut base = 0.0;
            for_each_inner_edge(support.members(), arity, kinds, |slot, kind| {
                match kind {
                    EdgeKind::Tilted { theta, lambda, .. } => {
                        tilted.push((slot, theta));
                        base -= lambda;
                    }
                    EdgeKind::Saturated { neg_ln_p } => saturated.push((slot, neg_ln_p)),
                    EdgeKind::Inert => {}
                }
                Ok(())
            })?;

            let mut members = Vec::new();
            if truncation {
                for d in boundary::es_members(model, &alt, cfg.epsilon)? {
                    if let Some(plan) =
                        member_plan(model, &d, cfg, kinds, &mut zeta_cache)?
                    {
                        members.push(plan);
                    }
                }
            }
            plans.push(SupportPlan {
                support,
                tilted,
                saturated,
                base,
                members,
            });
        }
        Ok(LrOracle {
            num_vertices,
            arity,
            plans,
            ln_support_count: (count as f64).ln(),
            truncation,
        })
    }

    pub fn support_count(&self) -> usize {
        self.plans.len()
    }

    /// Mixture (and, if built with truncation, truncated) likelihood ratio
    /// of `g`.
    ///
    /// Both ratios come from one pass: per-support logs are rescaled by the
    /// shared maximum, kept and truncation-dropped terms accumulate
    /// separately, and the mixture is their sum. Adding the nonnegative
    /// dropped mass back is monotone in floating point, so
    /// `truncated <= mixture` holds exactly, not just up to rounding.
    pub fn evaluate(&self, g: &Hypergraph) -> Result<LrEvaluation> {
        check_shape(g, self.num_vertices, self.arity)?;
        let present = presence_bitmap(g, self.slot_count())?;
        let mut logs = Vec::with_capacity(self.plans.len());
        let mut kept = Vec::with_capacity(self.plans.len());
        let mut max_log = f64::NEG_INFINITY;
        for plan in &self.plans {
            let log = plan.log_lr(&present);
            let keep = !self.truncation || plan.gamma_holds(&present);
            max_log = max_log.max(log);
            logs.push(log);
            kept.push(keep);
        }

        let (log_mixture, log_truncated) = if max_log == f64::NEG_INFINITY {
            (f64::NEG_INFINITY, f64::NEG_INFINITY)
        } else {
            let mut kept_sum = 0.0;
            let mut dropped_sum = 0.0;
            for (log, keep) in logs.iter().zip(&kept) {
                let term = (log - max_log).exp();
                if *keep {
                    kept_sum += term;
                } else {
                    dropped_sum += term;
                }
            }
            (
                max_log + (kept_sum + dropped_sum).ln() - self.ln_support_count,
                max_log + kept_sum.ln() - self.ln_support_count,
            )
        };

        Ok(LrEvaluation {
            log_mixture,
            mixture: log_mixture.exp(),
            log_truncated: self.truncation.then_some(log_truncated),
            truncated: self.truncation.then(|| log_truncated.exp()),
        })
    }

    /// Per-support log ratios in colex support order, for diagnostics.
    pub fn log_ratios(&self, g: &Hypergraph) -> Result<Vec<(VertexSet, f64)>> {
        check_shape(g, self.num_vertices, self.arity)?;
        let present = presence_bitmap(g, self.slot_count())?;
        Ok(self
            .plans
            .iter()
            .map(|plan| (plan.support.clone(), plan.log_lr(&present)))
            .collect())
    }

    fn slot_count(&self) -> usize {
        self.plans
            .iter()
            .flat_map(|p| p.tilted.iter().chain(&p.saturated))
            .map(|&(slot, _)| slot + 1)
            .max()
            .unwrap_or(0)
            .max(
                math::binom(self.num_vertices as u64, self.arity as u64)
                    .map(|v| v as usize)
                    .unwrap_or(0),
            )
    }
}

fn member_plan(
    model: &ProbabilityModel,
    d: &VertexSet,
    cfg: &LrConfig,
    kinds: &[EdgeKind],
    zeta_cache: &mut HashMap<(usize, u64), f64>,
) -> Result<Option<MemberPlan>> {
    let mut edges = Vec::new();
    let mut sum_p_theta = 0.0;
    let mut sum_theta = 0.0;
    for_each_inner_edge(d.members(), model.arity(), kinds, |slot, kind| {
        match kind {
            EdgeKind::Tilted { p, theta, .. } => {
                edges.push((slot, theta));
                sum_p_theta += p * theta;
                sum_theta += theta;
            }
            EdgeKind::Saturated { .. } => {
                // theta(p, 1) is an infinite tilt; both sides of the check
                // become infinite and the member can never fail.
                edges.push((slot, f64::INFINITY));
                sum_p_theta = f64::INFINITY;
                sum_theta = f64::INFINITY;
            }
            EdgeKind::Inert => {}
        }
        Ok(())
    })?;
    let expected = model.expected_internal(d)?.value;
    let key = (d.len(), expected.to_bits());
    let z = match zeta_cache.get(&key) {
        Some(&z) => z,
        None => {
            let z = boundary::zeta(model, d, cfg.epsilon)?;
            zeta_cache.insert(key, z);
            z
        }
    };
    let rhs = match cfg.gamma_variant {
        GammaVariant::WithPFactor => z * sum_p_theta,
        GammaVariant::Literal => z * sum_theta,
    };
    let max_lhs: f64 = edges.iter().map(|&(_, t)| t).sum();
    if max_lhs * (1.0 + PRUNE_SLACK) <= rhs {
        return Ok(None);
    }
    Ok(Some(MemberPlan { edges, rhs }))
}

/// Log of the per-support ratio `ln L_s`; negative infinity when a
/// saturated in-support edge is absent from `g`.
pub fn log_lr_for_support(
    g: &Hypergraph,
    model: &ProbabilityModel,
    s: &VertexSet,
    rho: f64,
) -> Result<f64> {
    check_shape(g, model.num_vertices(), model.arity())?;
    // Validates the support and the cap rho * p_e <= 1 inside it.
    PlantedAlternative::new(model, s.clone(), rho)?;
    let slots = math::binom(g.num_vertices() as u64, g.arity() as u64)?;
    if slots > EDGE_SLOT_CAP {
        return Err(Error::BudgetExceeded {
            stage: "edge-slot table",
            required: slots as u128,
            budget: EDGE_SLOT_CAP as u128,
        });
    }
    let present = presence_bitmap(g, slots as usize)?;
    let mut log = 0.0;
    let mut dead = false;
    let mut kinds_cache: HashMap<usize, EdgeKind> = HashMap::new();
    for_each_inner_edge_direct(model, s.members(), rho, &mut kinds_cache, |slot, kind| {
        match kind {
            EdgeKind::Tilted { theta, lambda, .. } => {
                log -= lambda;
                if present[slot] {
                    log += theta;
                }
            }
            EdgeKind::Saturated { neg_ln_p } => {
                if present[slot] {
                    log += neg_ln_p;
                } else {
                    dead = true;
                }
            }
            EdgeKind::Inert => {}
        }
        Ok(())
    })?;
    Ok(if dead { f64::NEG_INFINITY } else { log })
}

/// As [`for_each_inner_edge`] but computing kinds on demand, for one-shot
/// queries that do not warrant a full slot table.
fn for_each_inner_edge_direct<F>(
    model: &ProbabilityModel,
    members: &[u32],
    rho: f64,
    cache: &mut HashMap<usize, EdgeKind>,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, EdgeKind) -> Result<()>,
{
    let count = math::binom(members.len() as u64, model.arity() as u64)?;
    for local in 0..count {
        let pattern = colex_unrank(local, model.arity())?;
        let vertices: Vec<u32> = pattern
            .vertices()
            .iter()
            .map(|&i| members[i as usize])
            .collect();
        let edge = CanonicalEdge::new(vertices)?;
        let slot = colex_rank(&edge)? as usize;
        let kind = match cache.get(&slot) {
            Some(&k) => k,
            None => {
                let k = edge_kind(model.edge_probability(&edge)?, rho)?;
                cache.insert(slot, k);
                k
            }
        };
        visit(slot, kind)?;
    }
    Ok(())
}

/// Per-support likelihood ratio `L_s`; zero when a saturated in-support
/// edge is absent.
pub fn lr_for_support(
    g: &Hypergraph,
    model: &ProbabilityModel,
    s: &VertexSet,
    rho: f64,
) -> Result<f64> {
    Ok(log_lr_for_support(g, model, s, rho)?.exp())
}

/// Uniform mixture `C(N, n)^{-1} sum_{|s| = n} L_s`.
pub fn lr_mixture(g: &Hypergraph, model: &ProbabilityModel, cfg: &LrConfig) -> Result<f64> {
    Ok(LrOracle::new(model, cfg)?.evaluate(g)?.mixture)
}

/// Truncated mixture: mean over supports of `L_s * 1[truncation event]`.
pub fn truncated_lr(g: &Hypergraph, model: &ProbabilityModel, cfg: &LrConfig) -> Result<f64> {
    let eval = LrOracle::with_truncation(model, cfg)?.evaluate(g)?;
    Ok(eval.truncated.expect("built with truncation"))
}

/// Truncation event of one support: every high-signal subset `D` keeps its
/// tilted internal count below `zeta_D` times the configured right side.
/// An empty high-signal family makes the event vacuously true.
pub fn gamma_event(
    g: &Hypergraph,
    model: &ProbabilityModel,
    s: &VertexSet,
    cfg: &LrConfig,
) -> Result<bool> {
    check_shape(g, model.num_vertices(), model.arity())?;
    let alt = PlantedAlternative::new(model, s.clone(), cfg.rho)?;
    let slot_table = SlotTable::build(model, cfg.rho)?;
    let present = presence_bitmap(g, slot_table.kinds.len())?;
    let mut zeta_cache = HashMap::new();
    for d in boundary::es_members(model, &alt, cfg.epsilon)? {
        if let Some(plan) = member_plan(model, &d, cfg, &slot_table.kinds, &mut zeta_cache)? {
            if !plan.holds(&present) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample, SampleSpec};

    fn vs(ids: &[u32]) -> VertexSet {
        VertexSet::new(ids.to_vec()).unwrap()
    }

    fn graph(num_vertices: u32, arity: usize, edges: &[&[u32]]) -> Hypergraph {
        let edges: Vec<CanonicalEdge> = edges
            .iter()
            .map(|e| CanonicalEdge::new(e.to_vec()).unwrap())
            .collect();
        Hypergraph::from_edges(num_vertices, arity, edges).unwrap()
    }

    /// Direct Bernoulli probability-ratio form, no exponential-family
    /// rewriting: the oracle the log-space path must match.
    fn direct_log_lr(
        g: &Hypergraph,
        model: &ProbabilityModel,
        s: &VertexSet,
        rho: f64,
    ) -> f64 {
        let m = model.arity();
        let count = math::binom(s.len() as u64, m as u64).unwrap();
        let mut log = 0.0;
        for local in 0..count {
            let pattern = colex_unrank(local, m).unwrap();
            let vertices: Vec<u32> = pattern
                .vertices()
                .iter()
                .map(|&i| s.members()[i as usize])
                .collect();
            let edge = CanonicalEdge::new(vertices).unwrap();
            let p = model.edge_probability(&edge).unwrap();
            if p <= 0.0 || p >= 1.0 {
                continue;
            }
            let q = (rho * p).min(1.0);
            let present = g.edges().contains(&edge);
            log += if present {
                (q / p).ln()
            } else {
                ((1.0 - q) / (1.0 - p)).ln()
            };
        }
        log
    }

    #[test]
    fn rho_one_collapses_every_ratio_to_one() {
        let model = ProbabilityModel::homogeneous(9, 2, 0.3).unwrap();
        let cfg = LrConfig::new(3, 1.0, 0.2);
        let oracle = LrOracle::with_truncation(&model, &cfg).unwrap();
        for replicate in 0..5 {
            let g = sample(&SampleSpec::null(&model, 7, replicate)).unwrap();
            let eval = oracle.evaluate(&g).unwrap();
            assert_eq!(eval.mixture, 1.0);
            assert_eq!(eval.truncated, Some(1.0));
            assert_eq!(
                lr_for_support(&g, &model, &vs(&[1, 4, 8]), 1.0).unwrap(),
                1.0
            );
        }
    }

    #[test]
    fn single_present_edge_worked_example() {
        // Support {0,1,2}, only {0,1} present: ratio 3 on the present edge,
        // 0.7/0.9 on each of the two absent ones.
        let model = ProbabilityModel::homogeneous(6, 2, 0.1).unwrap();
        let g = graph(6, 2, &[&[0, 1]]);
        let got = lr_for_support(&g, &model, &vs(&[0, 1, 2]), 3.0).unwrap();
        let want = 3.0 * (0.7f64 / 0.9) * (0.7 / 0.9);
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn tilt_form_matches_direct_ratio_on_random_instances() {
        use crate::sampler::uniform01;
        for (arity, num_vertices) in [(2usize, 7u32), (3, 7)] {
            let slots = math::binom(num_vertices as u64, arity as u64).unwrap();
            let mut probs = HashMap::new();
            for rank in 0..slots {
                let edge = colex_unrank(rank, arity).unwrap();
                let p = 0.05 + 0.55 * uniform01(99, 1000 + rank, 0);
                probs.insert(edge, p);
            }
            let model =
                ProbabilityModel::explicit(num_vertices, arity, probs).unwrap();
            for replicate in 0..20 {
                let g = sample(&SampleSpec::null(&model, 3, replicate)).unwrap();
                let support = match replicate % 3 {
                    0 => vs(&[0, 1, 2]),
                    1 => vs(&[1, 3, 4, 6]),
                    _ => vs(&[0, 2, 3, 5, 6]),
                };
                let rho = 1.0 + 0.5 * uniform01(5, replicate, 0);
                let got = log_lr_for_support(&g, &model, &support, rho).unwrap();
                let want = direct_log_lr(&g, &model, &support, rho);
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                    "arity {arity} replicate {replicate}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn mixture_matches_naive_support_mean() {
        let model = ProbabilityModel::homogeneous(8, 2, 0.25).unwrap();
        let cfg = LrConfig::new(3, 2.0, 0.2);
        for replicate in 0..5 {
            let g = sample(&SampleSpec::null(&model, 11, replicate)).unwrap();
            let total_u = math::binom(8, 3).unwrap();
            let mut acc = 0.0;
            for rank in 0..total_u {
                let s = VertexSet::new(
                    colex_unrank(rank, 3).unwrap().vertices().to_vec(),
                )
                .unwrap();
                acc += lr_for_support(&g, &model, &s, 2.0).unwrap();
            }
            let want = acc / total_u as f64;
            let got = lr_mixture(&g, &model, &cfg).unwrap();
            assert!(
                (got - want).abs() <= 1e-12 * want.max(1.0),
                "{got} vs {want}"
            );
        }
    }

    #[test]
    fn four_vertex_mixture_closed_form() {
        // n = 2 supports are single edges. With only {0,1} present:
        // L_{01} = rho, every other support contributes (1-rho p)/(1-p).
        let model = ProbabilityModel::homogeneous(4, 2, 0.2).unwrap();
        let g = graph(4, 2, &[&[0, 1]]);
        let cfg = LrConfig::new(2, 2.0, 0.2);
        let got = lr_mixture(&g, &model, &cfg).unwrap();
        let absent = (1.0 - 0.4f64) / (1.0 - 0.2);
        let want = (2.0 + 5.0 * absent) / 6.0;
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }

    #[test]
    fn null_mean_of_mixture_is_near_one() {
        let model = ProbabilityModel::homogeneous(8, 2, 0.2).unwrap();
        let cfg = LrConfig::new(3, 2.0, 0.2);
        let oracle = LrOracle::new(&model, &cfg).unwrap();
        let reps = 3000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for replicate in 0..reps {
            let g = sample(&SampleSpec::null(&model, 17, replicate)).unwrap();
            let l = oracle.evaluate(&g).unwrap().mixture;
            sum += l;
            sumsq += l * l;
        }
        let mean = sum / reps as f64;
        let var = (sumsq / reps as f64 - mean * mean).max(0.0);
        let se = (var / reps as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 4.0 * se,
            "mean {mean}, se {se}"
        );
    }

    #[test]
    fn truncated_never_exceeds_mixture() {
        let model = ProbabilityModel::homogeneous(14, 2, 0.28).unwrap();
        let cfg = LrConfig::new(5, 2.5, 0.1);
        let oracle = LrOracle::with_truncation(&model, &cfg).unwrap();
        let support = vs(&[0, 1, 2, 3, 4]);
        let alt = PlantedAlternative::new(&model, support, 2.5).unwrap();
        for replicate in 0..40 {
            // Planted replicates stress the truncation: dense supports are
            // exactly the ones the event rejects.
            let g = sample(&SampleSpec::planted(&model, &alt, 23, replicate)).unwrap();
            let eval = oracle.evaluate(&g).unwrap();
            let truncated = eval.truncated.unwrap();
            assert!(
                truncated <= eval.mixture,
                "replicate {replicate}: {truncated} > {}",
                eval.mixture
            );
        }
    }

    #[test]
    fn truncation_actually_bites_on_planted_graphs() {
        let model = ProbabilityModel::homogeneous(14, 2, 0.28).unwrap();
        let cfg = LrConfig::new(5, 2.5, 0.1);
        let oracle = LrOracle::with_truncation(&model, &cfg).unwrap();
        let support = vs(&[0, 1, 2, 3, 4]);
        let alt = PlantedAlternative::new(&model, support, 2.5).unwrap();
        let mut strict = 0;
        for replicate in 0..40 {
            let g = sample(&SampleSpec::planted(&model, &alt, 23, replicate)).unwrap();
            let eval = oracle.evaluate(&g).unwrap();
            if eval.truncated.unwrap() < eval.mixture {
                strict += 1;
            }
        }
        assert!(strict > 0, "no replicate was truncated");
    }

    #[test]
    fn gamma_reduces_to_count_threshold_when_homogeneous() {
        let model = ProbabilityModel::homogeneous(14, 2, 0.28).unwrap();
        let cfg = LrConfig::new(5, 2.5, 0.1);
        let support = vs(&[2, 5, 7, 9, 13]);
        let alt = PlantedAlternative::new(&model, support.clone(), 2.5).unwrap();
        let members = boundary::es_members(&model, &alt, cfg.epsilon).unwrap();
        assert!(!members.is_empty());
        let mut seen = [false; 2];
        for replicate in 0..60 {
            let g = sample(&SampleSpec::planted(&model, &alt, 29, replicate)).unwrap();
            let got = gamma_event(&g, &model, &support, &cfg).unwrap();
            let want = members.iter().all(|d| {
                let a = g.count_internal_edges(d).unwrap() as f64;
                let e0 = model.expected_internal(d).unwrap().value;
                let z = boundary::zeta(&model, d, cfg.epsilon).unwrap();
                a <= z * e0
            });
            assert_eq!(got, want, "replicate {replicate}");
            seen[got as usize] = true;
        }
        assert!(seen[0] && seen[1], "both outcomes should occur");
    }

    #[test]
    fn empty_high_signal_family_is_vacuously_true() {
        // rho = 1 has zero signal: no subset qualifies, the event holds.
        let model = ProbabilityModel::homogeneous(9, 2, 0.3).unwrap();
        let cfg = LrConfig::new(3, 1.0, 0.2);
        let g = graph(9, 2, &[&[0, 1], &[0, 2], &[1, 2]]);
        assert!(gamma_event(&g, &model, &vs(&[0, 1, 2]), &cfg).unwrap());
    }

    #[test]
    fn saturated_edges_force_or_kill_the_ratio() {
        // rho p = 1: the alternative forces every in-support edge.
        let model = ProbabilityModel::homogeneous(6, 2, 0.5).unwrap();
        let s = vs(&[0, 1, 2]);
        let complete = graph(6, 2, &[&[0, 1], &[0, 2], &[1, 2]]);
        let got = lr_for_support(&complete, &model, &s, 2.0).unwrap();
        assert!((got - 8.0).abs() <= 1e-12, "{got}");
        let missing = graph(6, 2, &[&[0, 1], &[0, 2]]);
        assert_eq!(lr_for_support(&missing, &model, &s, 2.0).unwrap(), 0.0);
        assert_eq!(
            log_lr_for_support(&missing, &model, &s, 2.0).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn literal_variant_is_vacuous_for_rho_at_least_one() {
        // With rho >= 1 every theta >= 0 and zeta >= 1, so the literal right
        // side dominates even the all-edges-present left side.
        let model = ProbabilityModel::homogeneous(14, 2, 0.28).unwrap();
        let mut cfg = LrConfig::new(5, 2.5, 0.1);
        cfg.gamma_variant = GammaVariant::Literal;
        let support = vs(&[0, 1, 2, 3, 4]);
        let alt = PlantedAlternative::new(&model, support.clone(), 2.5).unwrap();
        let oracle = LrOracle::with_truncation(&model, &cfg).unwrap();
        for replicate in 0..20 {
            let g = sample(&SampleSpec::planted(&model, &alt, 31, replicate)).unwrap();
            assert!(gamma_event(&g, &model, &support, &cfg).unwrap());
            let eval = oracle.evaluate(&g).unwrap();
            assert_eq!(eval.truncated, Some(eval.mixture));
        }
    }

    #[test]
    fn support_budget_is_enforced() {
        let model = ProbabilityModel::homogeneous(20, 2, 0.1).unwrap();
        let mut cfg = LrConfig::new(10, 1.5, 0.2);
        cfg.support_budget = 1000;
        let err = LrOracle::new(&model, &cfg).unwrap_err();
        match err {
            Error::BudgetExceeded { stage, required, budget } => {
                assert_eq!(stage, "support enumeration");
                assert_eq!(required, 184756);
                assert_eq!(budget, 1000);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let model = ProbabilityModel::homogeneous(8, 2, 0.2).unwrap();
        let cfg = LrConfig::new(3, 2.0, 0.2);
        let oracle = LrOracle::new(&model, &cfg).unwrap();
        let g = graph(9, 2, &[&[0, 1]]);
        assert!(oracle.evaluate(&g).is_err());
        let g3 = Hypergraph::from_edges(8, 3, vec![]).unwrap();
        assert!(oracle.evaluate(&g3).is_err());
        assert!(lr_for_support(&g3, &model, &vs(&[0, 1, 2]), 2.0).is_err());
    }

    #[test]
    fn log_ratios_align_with_per_support_calls() {
        let model = ProbabilityModel::homogeneous(7, 2, 0.3).unwrap();
        let cfg = LrConfig::new(3, 1.8, 0.2);
        let oracle = LrOracle::new(&model, &cfg).unwrap();
        let g = sample(&SampleSpec::null(&model, 41, 0)).unwrap();
        let ratios = oracle.log_ratios(&g).unwrap();
        assert_eq!(ratios.len(), 35);
        for (support, log) in &ratios {
            let direct = log_lr_for_support(&g, &model, support, 1.8).unwrap();
            assert!(
                (log - direct).abs() <= 1e-12 * direct.abs().max(1.0),
                "{support}: {log} vs {direct}"
            );
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = LrConfig::new(4, 2.5, 0.15);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: LrConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
        // Defaults fill in when omitted.
        let sparse: LrConfig =
            serde_json::from_str(r#"{"n":3,"rho":2.0,"epsilon":0.1}"#).unwrap();
        assert_eq!(sparse.gamma_variant, GammaVariant::WithPFactor);
        assert_eq!(sparse.support_budget, DEFAULT_SUPPORT_BUDGET);
    }
}
