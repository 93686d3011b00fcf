//! Detection-boundary computations.
//!
//! Everything here is finite arithmetic on one instance: the optimizing
//! subset `D*` of a support, the calibration root `zeta`, the membership
//! family `E_S`, the constant `c_n`, and reports for the powerless /
//! powerful conditions and the two growth scenarios. The underlying claims
//! are asymptotic; the reports state finite surrogates and leave the
//! interpretation to the caller. Family-wide extrema are taken over a
//! caller-supplied list of supports, never over all size-`n` subsets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{colex_unrank, CanonicalEdge, VertexSet};
use crate::math::{binom_f64, h, h_inverse, theta};
use crate::model::{PlantedAlternative, ProbabilityModel};

/// Cap on `2^{|s|}` for the exhaustive subset paths.
pub const EXHAUSTIVE_SUBSET_BUDGET: u64 = 1 << 20;

/// One line of a boundary report: a named comparison `lhs` vs `rhs` with
/// `margin = lhs / rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

impl ConditionEntry {
    fn new(name: String, lhs: f64, rhs: f64, holds: bool) -> Self {
        ConditionEntry {
            name,
            lhs,
            rhs,
            margin: lhs / rhs,
            holds,
        }
    }
}

/// A list of condition entries; the first entry summarizes the family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub entries: Vec<ConditionEntry>,
}

impl BoundaryReport {
    /// The family-level entry.
    pub fn summary(&self) -> &ConditionEntry {
        &self.entries[0]
    }

    pub fn holds(&self) -> bool {
        self.summary().holds
    }
}

fn check_support(model: &ProbabilityModel, s: &VertexSet) -> Result<()> {
    s.check_range(model.num_vertices())?;
    if s.len() < model.arity() {
        return Err(Error::InvalidSet {
            what: "support",
            detail: format!(
                "{} vertices, need at least the arity {}",
                s.len(),
                model.arity()
            ),
        });
    }
    Ok(())
}

/// Per-size maximizers of the expected internal count over subsets of `s`.
///
/// Homogeneous models depend only on size, so the first `k` members stand
/// in for every `k`-subset. Product-weight models are maximized by the `k`
/// heaviest members (the expected count is increasing in every weight).
/// Anything else is enumerated outright, subject to the subset budget.
fn max_expected_by_size(
    model: &ProbabilityModel,
    s: &VertexSet,
) -> Result<Vec<(usize, f64, Vec<u32>)>> {
    let m = model.arity();
    let sizes = m..=s.len();
    if model.is_homogeneous() {
        sizes
            .map(|k| {
                let set: Vec<u32> = s.members()[..k].to_vec();
                let d = VertexSet::new(set.clone())?;
                Ok((k, model.expected_internal(&d)?.value, set))
            })
            .collect()
    } else if let Ok(weights) = model.weights() {
        let mut order: Vec<u32> = s.members().to_vec();
        order.sort_by(|&a, &b| {
            weights[b as usize]
                .partial_cmp(&weights[a as usize])
                .expect("weights are finite")
                .then(a.cmp(&b))
        });
        sizes
            .map(|k| {
                let mut set: Vec<u32> = order[..k].to_vec();
                set.sort_unstable();
                let d = VertexSet::new(set.clone())?;
                Ok((k, model.expected_internal(&d)?.value, set))
            })
            .collect()
    } else {
        if s.len() >= 64 || (1u64 << s.len()) > EXHAUSTIVE_SUBSET_BUDGET {
            return Err(Error::BudgetExceeded {
                stage: "subset maximization",
                required: 2u128.saturating_pow(s.len() as u32),
                budget: EXHAUSTIVE_SUBSET_BUDGET as u128,
            });
        }
        let mut best: Vec<Option<(f64, Vec<u32>)>> = vec![None; s.len() + 1];
        let mut current = Vec::with_capacity(s.len());
        subsets_of(s.members(), m, &mut current, &mut |set| {
            let d = VertexSet::new(set.to_vec())?;
            let value = model.expected_internal(&d)?.value;
            let row = &mut best[set.len()];
            // Strict improvement only: enumeration is lexicographic, so
            // the first maximizer seen is the lexicographically smallest.
            if row.as_ref().is_none_or(|(v, _)| value > *v) {
                *row = Some((value, set.to_vec()));
            }
            Ok(())
        })?;
        Ok(best
            .into_iter()
            .enumerate()
            .filter_map(|(k, row)| row.map(|(v, set)| (k, v, set)))
            .collect())
    }
}

/// Calls `visit` on every subset of `members` with at least `min_size`
/// elements, in lexicographic order of the vertex sequence.
fn subsets_of(
    members: &[u32],
    min_size: usize,
    current: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    fn walk(
        members: &[u32],
        from: usize,
        min_size: usize,
        current: &mut Vec<u32>,
        visit: &mut impl FnMut(&[u32]) -> Result<()>,
    ) -> Result<()> {
        for i in from..members.len() {
            current.push(members[i]);
            if current.len() >= min_size {
                visit(current)?;
            }
            walk(members, i + 1, min_size, current, visit)?;
            current.pop();
        }
        Ok(())
    }
    walk(members, 0, min_size, current, visit)
}

/// The subset objective `E0[A_D] / (|D| ln(N / |D|))` maximized over
/// `D subseteq s` with `|D| >= m`, returned with its maximizer.
pub fn dstar_objective(model: &ProbabilityModel, s: &VertexSet) -> Result<(VertexSet, f64)> {
    check_support(model, s)?;
    if s.len() >= model.num_vertices() as usize {
        return Err(Error::domain(
            "dstar",
            format!(
                "support of size {} must be a proper subset of {} vertices",
                s.len(),
                model.num_vertices()
            ),
        ));
    }
    let n = model.num_vertices() as f64;
    let mut best: Option<(f64, Vec<u32>)> = None;
    for (k, expected, set) in max_expected_by_size(model, s)? {
        let value = expected / (k as f64 * (n / k as f64).ln());
        let replace = match &best {
            None => true,
            Some((v, b)) => value > *v || (value == *v && set < *b),
        };
        if replace {
            best = Some((value, set));
        }
    }
    let (value, set) = best.expect("size range is nonempty");
    Ok((VertexSet::new(set)?, value))
}

/// The maximizing subset alone.
pub fn dstar(model: &ProbabilityModel, s: &VertexSet) -> Result<VertexSet> {
    Ok(dstar_objective(model, s)?.0)
}

/// Whether `|dstar(model, s)| >= n^{1/(m+1)}`, compared exactly in
/// integers as `|D*|^{m+1} >= n`.
pub fn check_dstar_size(model: &ProbabilityModel, s: &VertexSet, n: usize) -> Result<bool> {
    let d = dstar(model, s)?;
    let lhs = (d.len() as u128).saturating_pow(model.arity() as u32 + 1);
    Ok(lhs >= n as u128)
}

/// The unique `zeta >= 1` with
/// `(1 + epsilon) E0[A_D] h(zeta - 1) = |d| ln(N / |d|)`,
/// i.e. `1 + h_inverse(rhs / ((1 + epsilon) E0[A_D]))`.
pub fn zeta(model: &ProbabilityModel, d: &VertexSet, epsilon: f64) -> Result<f64> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::domain(
            "zeta",
            format!("epsilon = {epsilon} not in [0, inf)"),
        ));
    }
    let n = model.num_vertices() as usize;
    if d.len() < model.arity() || d.len() >= n {
        return Err(Error::domain(
            "zeta",
            format!("|d| = {} not in [{}, {})", d.len(), model.arity(), n),
        ));
    }
    let expected = model.expected_internal(d)?.value;
    if expected <= 0.0 {
        return Err(Error::ZeroExpectation {
            context: format!("zeta of a size-{} subset with zero expected count", d.len()),
        });
    }
    let rhs = d.len() as f64 * (n as f64 / d.len() as f64).ln();
    Ok(1.0 + h_inverse(rhs / ((1.0 + epsilon) * expected))?)
}

fn es_rhs(d_len: usize, n: usize, big_n: u32, epsilon: f64) -> Result<f64> {
    let ratio = big_n as f64 / n as f64;
    if ratio <= std::f64::consts::E {
        return Err(Error::domain(
            "es_member",
            format!("N / n = {big_n} / {n} must exceed e for the iterated log"),
        ));
    }
    let inner = (big_n as f64 * d_len as f64 / (n as f64 * n as f64)).ln() - ratio.ln().ln();
    Ok((1.0 - epsilon / 2.0) * d_len as f64 * inner)
}

/// Membership of `d` in the high-signal family of the support:
/// `(rho - 1)^2 E0[A_D] > (1 - epsilon/2) |d| (ln(N|d|/n^2) - ln ln(N/n))`.
/// A negative right side makes membership automatic.
pub fn es_member(
    model: &ProbabilityModel,
    alt: &PlantedAlternative,
    d: &VertexSet,
    epsilon: f64,
) -> Result<bool> {
    if !d.is_subset_of(alt.support()) {
        return Err(Error::InvalidSet {
            what: "membership candidate",
            detail: format!("{} is not a subset of the support", d),
        });
    }
    let rhs = es_rhs(d.len(), alt.support().len(), model.num_vertices(), epsilon)?;
    let expected = model.expected_internal(d)?.value;
    let lhs = (alt.rho() - 1.0) * (alt.rho() - 1.0) * expected;
    Ok(lhs > rhs)
}

/// All members of the family: subsets `d subseteq support` with
/// `|d| >= m` passing [`es_member`], in lexicographic order.
pub fn es_members(
    model: &ProbabilityModel,
    alt: &PlantedAlternative,
    epsilon: f64,
) -> Result<Vec<VertexSet>> {
    let s = alt.support();
    if s.len() >= 64 || (1u64 << s.len()) > EXHAUSTIVE_SUBSET_BUDGET {
        return Err(Error::BudgetExceeded {
            stage: "membership enumeration",
            required: 2u128.saturating_pow(s.len() as u32),
            budget: EXHAUSTIVE_SUBSET_BUDGET as u128,
        });
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(s.len());
    subsets_of(s.members(), model.arity(), &mut current, &mut |set| {
        let d = VertexSet::new(set.to_vec())?;
        if es_member(model, alt, &d, epsilon)? {
            out.push(d);
        }
        Ok(())
    })?;
    Ok(out)
}

/// The family constant `c_n`, with a flag for the degenerate empty family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CnReport {
    /// `min` over supports and members of
    /// `(1-eps) rho (E0[A_D]/|D|) h(zeta_D/rho - 1) - ln(n/|D|)`;
    /// positive infinity when no member exists anywhere.
    pub value: f64,
    pub empty_family: bool,
}

/// Evaluates `c_n` over the supplied supports, each planted with boost
/// `rho`. The minimum over all size-`n` supports in the underlying theory
/// is replaced by the minimum over this finite family.
pub fn cn(
    model: &ProbabilityModel,
    rho: f64,
    epsilon: f64,
    supports: &[VertexSet],
) -> Result<CnReport> {
    if supports.is_empty() {
        return Err(Error::domain("cn", "no supports supplied"));
    }
    let n = supports[0].len();
    let mut value = f64::INFINITY;
    let mut empty = true;
    for s in supports {
        if s.len() != n {
            return Err(Error::InvalidSet {
                what: "support family",
                detail: format!("sizes differ: {} vs {}", s.len(), n),
            });
        }
        let alt = PlantedAlternative::new(model, s.clone(), rho)?;
        for d in es_members(model, &alt, epsilon)? {
            empty = false;
            let expected = model.expected_internal(&d)?.value;
            let z = zeta(model, &d, epsilon)?;
            let term = (1.0 - epsilon) * rho * (expected / d.len() as f64)
                * h(z / rho - 1.0)?
                - (n as f64 / d.len() as f64).ln();
            value = value.min(term);
        }
    }
    Ok(CnReport {
        value,
        empty_family: empty,
    })
}

fn check_epsilon(op: &'static str, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(
            op,
            format!("epsilon = {epsilon} not in (0, 1)"),
        ));
    }
    Ok(())
}

/// The boundary functional of one planted support:
/// `h(rho - 1) * max_D E0[A_D] / (|D| ln(N/|D|))`.
pub fn boundary_functional(model: &ProbabilityModel, alt: &PlantedAlternative) -> Result<f64> {
    let (_, objective) = dstar_objective(model, alt.support())?;
    Ok(h(alt.rho() - 1.0)? * objective)
}

/// Powerless side: every test fails when the functional stays at or below
/// `1 - epsilon` for the whole family. The first entry is the family
/// maximum; one entry per support follows.
pub fn check_condition_2(
    model: &ProbabilityModel,
    alts: &[PlantedAlternative],
    epsilon: f64,
) -> Result<BoundaryReport> {
    check_epsilon("check_condition_2", epsilon)?;
    if alts.is_empty() {
        return Err(Error::domain("check_condition_2", "no alternatives supplied"));
    }
    let rhs = 1.0 - epsilon;
    let mut entries = vec![ConditionEntry::new(String::new(), 0.0, rhs, false)];
    let mut family_max = f64::NEG_INFINITY;
    for (i, alt) in alts.iter().enumerate() {
        let value = boundary_functional(model, alt)?;
        family_max = family_max.max(value);
        entries.push(ConditionEntry::new(
            format!("powerless[{i}]"),
            value,
            rhs,
            value <= rhs,
        ));
    }
    entries[0] = ConditionEntry::new(
        "powerless".into(),
        family_max,
        rhs,
        family_max <= rhs,
    );
    Ok(BoundaryReport { entries })
}

/// Powerful side: the scan test succeeds when the functional reaches
/// `1 + epsilon` on every support. Magnitude entries report
/// `rho * E0[A_{D*}]` per support (a growth quantity with no finite
/// pass/fail, hence `holds = true` against an infinite target).
pub fn check_condition_3(
    model: &ProbabilityModel,
    alts: &[PlantedAlternative],
    epsilon: f64,
) -> Result<BoundaryReport> {
    check_epsilon("check_condition_3", epsilon)?;
    if alts.is_empty() {
        return Err(Error::domain("check_condition_3", "no alternatives supplied"));
    }
    let rhs = 1.0 + epsilon;
    let mut entries = vec![ConditionEntry::new(String::new(), 0.0, rhs, false)];
    let mut magnitudes = Vec::new();
    let mut family_min = f64::INFINITY;
    for (i, alt) in alts.iter().enumerate() {
        let value = boundary_functional(model, alt)?;
        family_min = family_min.min(value);
        entries.push(ConditionEntry::new(
            format!("powerful[{i}]"),
            value,
            rhs,
            value >= rhs,
        ));
        let d = dstar(model, alt.support())?;
        let magnitude = alt.rho() * model.expected_internal(&d)?.value;
        magnitudes.push(ConditionEntry {
            name: format!("signal_mass[{i}]"),
            lhs: magnitude,
            rhs: f64::INFINITY,
            margin: 0.0,
            holds: true,
        });
    }
    entries[0] = ConditionEntry::new(
        "powerful".into(),
        family_min,
        rhs,
        family_min >= rhs,
    );
    entries.extend(magnitudes);
    Ok(BoundaryReport { entries })
}

/// Which side of the boundary a critical boost should cross.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalTarget {
    /// Functional reaches `1 - epsilon`: the edge of the powerless region.
    Powerless,
    /// Functional reaches `1 + epsilon`: the edge of the powerful region.
    Powerful,
}

/// Smallest `rho` at which the boundary functional of `s` reaches the
/// target, or `None` when no admissible boost (`rho <= 1 / max p_e`)
/// gets there. The functional is `h(rho - 1) * objective` with `h`
/// increasing, so the crossing is `1 + h_inverse(target / objective)`.
pub fn critical_rho(
    model: &ProbabilityModel,
    s: &VertexSet,
    epsilon: f64,
    target: CriticalTarget,
) -> Result<Option<f64>> {
    check_epsilon("critical_rho", epsilon)?;
    let (_, objective) = dstar_objective(model, s)?;
    let goal = match target {
        CriticalTarget::Powerless => 1.0 - epsilon,
        CriticalTarget::Powerful => 1.0 + epsilon,
    };
    if objective <= 0.0 {
        return Ok(None);
    }
    let rho = 1.0 + h_inverse(goal / objective)?;
    let p_max = model.max_edge_probability_within(s)?;
    let rho_cap = if p_max > 0.0 {
        1.0 / p_max
    } else {
        f64::INFINITY
    };
    Ok(if rho <= rho_cap { Some(rho) } else { None })
}

/// Growth-regime parameters; `gamma_n` is the finite stand-in for a
/// vanishing sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioParams {
    pub epsilon: f64,
    pub delta: f64,
    pub gamma_n: f64,
}

impl ScenarioParams {
    fn validate(&self) -> Result<()> {
        check_epsilon("scenario params", self.epsilon)?;
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::domain(
                "scenario params",
                format!("delta = {} not in (0, 0.5)", self.delta),
            ));
        }
        if !self.gamma_n.is_finite() || self.gamma_n <= 0.0 {
            return Err(Error::domain(
                "scenario params",
                format!("gamma_n = {} not positive", self.gamma_n),
            ));
        }
        Ok(())
    }
}

/// Mean edge probability of a subset: `E0[A_D] / C(|D|, m)`.
fn mean_edge_probability(model: &ProbabilityModel, d: &VertexSet) -> Result<f64> {
    Ok(model.expected_internal(d)?.value / binom_f64(d.len() as u64, model.arity() as u64))
}

/// Finite surrogates of the two growth scenarios, one entry per condition:
///
/// * `subset_mass_ratio`: max over supports and small subsets
///   (`|D| < n / (N/n)^gamma`) of `(C(|D|,m) N / (C(N,m) |D|)) (mu_D / mu_S)`
///   against `delta`; an empty size window holds vacuously and reports
///   negative infinity.
/// * `support_mass_scenario_1`: `max_S 1/mu_S` against `n^{m-1} / ln(N/n)`.
/// * `support_mass_scenario_2`: `max_S 1/mu_S` against `ln(N/n) / ln n`
///   (automatic failure at `n = N` where the target degenerates to 0).
/// * `support_size_growth` and `log_size_ratio`: `n` against
///   `N^{1/2 - delta}`, in level and in logs.
pub fn check_scenarios(
    model: &ProbabilityModel,
    params: &ScenarioParams,
    supports: &[VertexSet],
) -> Result<BoundaryReport> {
    params.validate()?;
    if supports.is_empty() {
        return Err(Error::domain("check_scenarios", "no supports supplied"));
    }
    let n = supports[0].len();
    let big_n = model.num_vertices() as f64;
    let m = model.arity();
    for s in supports {
        if s.len() != n {
            return Err(Error::InvalidSet {
                what: "support family",
                detail: format!("sizes differ: {} vs {}", s.len(), n),
            });
        }
    }

    // Small-subset mass ratio.
    let size_bound = n as f64 / (big_n / n as f64).powf(params.gamma_n);
    let mut ratio_max = f64::NEG_INFINITY;
    let total_edges = binom_f64(model.num_vertices() as u64, m as u64);
    for s in supports {
        let mu_s = mean_edge_probability(model, s)?;
        if mu_s <= 0.0 {
            return Err(Error::domain(
                "check_scenarios",
                format!("support {} has zero mean edge probability", s),
            ));
        }
        for (k, expected, _) in max_expected_by_size(model, s)? {
            if (k as f64) >= size_bound {
                continue;
            }
            let mu_d = expected / binom_f64(k as u64, m as u64);
            let ratio = (binom_f64(k as u64, m as u64) * big_n / (total_edges * k as f64))
                * (mu_d / mu_s);
            ratio_max = ratio_max.max(ratio);
        }
    }
    let empty_window = ratio_max == f64::NEG_INFINITY;
    let mut entries = vec![ConditionEntry {
        name: if empty_window {
            "subset_mass_ratio[empty]".into()
        } else {
            "subset_mass_ratio".into()
        },
        lhs: ratio_max,
        rhs: params.delta,
        margin: if empty_window {
            0.0
        } else {
            ratio_max / params.delta
        },
        holds: empty_window || ratio_max <= params.delta,
    }];

    // Support mass against the two scenario targets.
    let mut inv_mu_max = f64::NEG_INFINITY;
    for s in supports {
        inv_mu_max = inv_mu_max.max(1.0 / mean_edge_probability(model, s)?);
    }
    let log_ratio = (big_n / n as f64).ln();
    let rhs1 = (n as f64).powi(m as i32 - 1) / log_ratio;
    entries.push(ConditionEntry::new(
        "support_mass_scenario_1".into(),
        inv_mu_max,
        rhs1,
        inv_mu_max <= rhs1,
    ));
    let rhs2 = log_ratio / (n as f64).ln();
    entries.push(ConditionEntry::new(
        "support_mass_scenario_2".into(),
        inv_mu_max,
        rhs2,
        rhs2 > 0.0 && inv_mu_max <= rhs2,
    ));

    // Support size growth.
    let growth_rhs = big_n.powf(0.5 - params.delta);
    entries.push(ConditionEntry::new(
        "support_size_growth".into(),
        n as f64,
        growth_rhs,
        (n as f64) <= growth_rhs,
    ));
    let log_lhs = (n as f64).ln() / big_n.ln();
    entries.push(ConditionEntry::new(
        "log_size_ratio".into(),
        log_lhs,
        0.5 - params.delta,
        log_lhs <= 0.5 - params.delta,
    ));
    Ok(BoundaryReport { entries })
}

/// Finite diagnostic of the tilt-doubling property: lists the edges of `d`
/// where `theta(p_e, zeta_D p_e) > 2 theta(p_e, rho p_e)`. A boosted
/// probability at or above 1 counts as an infinite tilt; zero-probability
/// edges never occur and are skipped.
pub fn theta_doubling_violations(
    model: &ProbabilityModel,
    alt: &PlantedAlternative,
    d: &VertexSet,
    epsilon: f64,
) -> Result<Vec<CanonicalEdge>> {
    if !d.is_subset_of(alt.support()) {
        return Err(Error::InvalidSet {
            what: "diagnostic subset",
            detail: format!("{} is not a subset of the support", d),
        });
    }
    let z = zeta(model, d, epsilon)?;
    let m = model.arity();
    let mut violations = Vec::new();
    let total = crate::math::binom(d.len() as u64, m as u64)?;
    for rank in 0..total {
        let local = colex_unrank(rank, m)?;
        let e = CanonicalEdge::new(
            local
                .vertices()
                .iter()
                .map(|&i| d.members()[i as usize])
                .collect(),
        )?;
        let p = model.edge_probability(&e)?;
        if p == 0.0 {
            continue;
        }
        let tilt = |q: f64| -> Result<f64> {
            if q >= 1.0 {
                Ok(f64::INFINITY)
            } else {
                theta(p, q)
            }
        };
        let lhs = tilt(z * p)?;
        let rhs = tilt(alt.rho() * p)?;
        if lhs > 2.0 * rhs {
            violations.push(e);
        }
    }
    Ok(violations)
}
