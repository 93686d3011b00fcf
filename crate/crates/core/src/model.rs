//! Null edge-probability models and planted alternatives.
//!
//! Under the null every canonical m-edge `e` is present independently with
//! probability `p_e`. Three shapes are supported:
//!
//! * homogeneous: `p_e = p` for every edge,
//! * rank-1: `p_e = prod_{i in e} W_i` for a vertex weight vector `W`,
//! * explicit: a full table over all `C(N, m)` edges.
//!
//! The planted alternative multiplies `p_e` by a boost `rho >= 1` on every
//! edge inside a support set `S`, subject to `rho p_e <= 1` there.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hypergraph::{colex_unrank, CanonicalEdge, VertexSet};
use crate::math::{binom, binom_f64};

/// Guard for explicit-table iteration: validating totality enumerates all
/// `C(N, m)` edges, so absurd vertex counts are rejected up front.
const EXPLICIT_TABLE_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone)]
enum Kind {
    Homogeneous { p: f64 },
    Rank1 { weights: Vec<f64> },
    Explicit { probs: HashMap<CanonicalEdge, f64> },
}

/// A null model: vertex count, arity, and the edge probability map.
#[derive(Debug, Clone)]
pub struct ProbabilityModel {
    num_vertices: u32,
    arity: usize,
    kind: Kind,
}

fn check_shape(num_vertices: u32, arity: usize) -> Result<()> {
    if arity < 2 {
        return Err(Error::domain("model", format!("arity {arity} < 2")));
    }
    if (num_vertices as usize) < arity {
        return Err(Error::domain(
            "model",
            format!("{num_vertices} vertices cannot host arity-{arity} edges"),
        ));
    }
    Ok(())
}

impl ProbabilityModel {
    /// Constant edge probability `p in [0, 1]`.
    pub fn homogeneous(num_vertices: u32, arity: usize, p: f64) -> Result<Self> {
        check_shape(num_vertices, arity)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain("model", format!("p = {p} not in [0, 1]")));
        }
        Ok(ProbabilityModel {
            num_vertices,
            arity,
            kind: Kind::Homogeneous { p },
        })
    }

    /// Product weights: `p_e = prod_{i in e} W_i`, each `W_i in [0, 1]`.
    /// The vector length fixes the vertex count.
    pub fn rank1(weights: Vec<f64>, arity: usize) -> Result<Self> {
        let num_vertices = u32::try_from(weights.len()).map_err(|_| {
            Error::domain("model", "weight vector longer than u32 range")
        })?;
        check_shape(num_vertices, arity)?;
        for (i, &w) in weights.iter().enumerate() {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::domain(
                    "model",
                    format!("weight W[{i}] = {w} not in [0, 1]"),
                ));
            }
        }
        Ok(ProbabilityModel {
            num_vertices,
            arity,
            kind: Kind::Rank1 { weights },
        })
    }

    /// Full probability table. The table must contain every canonical edge
    /// over `0..num_vertices` exactly once; totality is validated here so
    /// lookups never miss later.
    pub fn explicit(
        num_vertices: u32,
        arity: usize,
        probs: HashMap<CanonicalEdge, f64>,
    ) -> Result<Self> {
        check_shape(num_vertices, arity)?;
        let total = binom(num_vertices as u64, arity as u64)?;
        if total > EXPLICIT_TABLE_BUDGET {
            return Err(Error::BudgetExceeded {
                stage: "explicit model validation",
                required: total as u128,
                budget: EXPLICIT_TABLE_BUDGET as u128,
            });
        }
        if probs.len() as u64 != total {
            return Err(Error::domain(
                "model",
                format!("table has {} entries, need C({num_vertices}, {arity}) = {total}", probs.len()),
            ));
        }
        for rank in 0..total {
            let e = colex_unrank(rank, arity)?;
            match probs.get(&e) {
                Some(&p) if (0.0..=1.0).contains(&p) => {}
                Some(&p) => {
                    return Err(Error::domain(
                        "model",
                        format!("p_{e} = {p} not in [0, 1]"),
                    ))
                }
                None => {
                    return Err(Error::domain("model", format!("table missing edge {e}")))
                }
            }
        }
        Ok(ProbabilityModel {
            num_vertices,
            arity,
            kind: Kind::Explicit { probs },
        })
    }

    pub fn num_vertices(&self) -> u32 {
        self.num_vertices
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.kind, Kind::Homogeneous { .. })
    }

    pub fn is_rank1(&self) -> bool {
        matches!(self.kind, Kind::Rank1 { .. })
    }

    /// The weight vector of a rank-1 model.
    pub fn weights(&self) -> Result<&[f64]> {
        match &self.kind {
            Kind::Rank1 { weights } => Ok(weights),
            _ => Err(Error::NotRank1 { op: "weights" }),
        }
    }

    /// Null probability of a single canonical edge.
    pub fn edge_probability(&self, e: &CanonicalEdge) -> Result<f64> {
        if e.arity() != self.arity {
            return Err(Error::domain(
                "edge_probability",
                format!("edge {e} has arity {}, model has {}", e.arity(), self.arity),
            ));
        }
        if let Some(&v) = e.vertices().last() {
            if v >= self.num_vertices {
                return Err(Error::VertexOutOfRange {
                    id: v,
                    num_vertices: self.num_vertices,
                });
            }
        }
        Ok(match &self.kind {
            Kind::Homogeneous { p } => *p,
            Kind::Rank1 { weights } => e
                .vertices()
                .iter()
                .map(|&v| weights[v as usize])
                .product(),
            Kind::Explicit { probs } => {
                // Totality was validated at construction.
                *probs.get(e).expect("explicit table is total")
            }
        })
    }

    /// Expected internal edge count `E0[A_D] = sum_{e subset d} p_e`.
    pub fn expected_internal(&self, d: &VertexSet) -> Result<ExpectedInternal> {
        d.check_range(self.num_vertices)?;
        if d.len() < self.arity {
            return Ok(ExpectedInternal {
                value: 0.0,
                undersized: true,
            });
        }
        let value = match &self.kind {
            Kind::Homogeneous { p } => binom_f64(d.len() as u64, self.arity as u64) * p,
            Kind::Rank1 { weights } => {
                // Elementary symmetric polynomial of the member weights.
                let mut e = vec![0.0_f64; self.arity + 1];
                e[0] = 1.0;
                for &v in d.members() {
                    let w = weights[v as usize];
                    for j in (1..=self.arity).rev() {
                        e[j] += w * e[j - 1];
                    }
                }
                e[self.arity]
            }
            Kind::Explicit { probs } => {
                let mut sum = 0.0;
                for_each_subset(d.members(), self.arity, &mut |vs| {
                    let e = CanonicalEdge::new(vs.to_vec()).expect("subset is canonical");
                    sum += *probs.get(&e).expect("explicit table is total");
                });
                sum
            }
        };
        Ok(ExpectedInternal {
            value,
            undersized: false,
        })
    }

    /// Mean edge rate inside `d`: `E0[A_D] / C(|d|, m)`. Needs `|d| >= m`.
    pub fn edge_rate(&self, d: &VertexSet) -> Result<f64> {
        let e = self.expected_internal(d)?;
        if e.undersized {
            return Err(Error::domain(
                "edge_rate",
                format!("|d| = {} below arity {}", d.len(), self.arity),
            ));
        }
        Ok(e.value / binom_f64(d.len() as u64, self.arity as u64))
    }

    /// Largest single-edge probability among edges inside `s`.
    pub fn max_edge_probability_within(&self, s: &VertexSet) -> Result<f64> {
        s.check_range(self.num_vertices)?;
        if s.len() < self.arity {
            return Err(Error::domain(
                "max_edge_probability_within",
                format!("|s| = {} below arity {}", s.len(), self.arity),
            ));
        }
        Ok(match &self.kind {
            Kind::Homogeneous { p } => *p,
            Kind::Rank1 { weights } => {
                // Product of the m largest member weights.
                let mut ws: Vec<f64> = s.members().iter().map(|&v| weights[v as usize]).collect();
                ws.sort_unstable_by(|a, b| b.partial_cmp(a).expect("weights are finite"));
                ws[..self.arity].iter().product()
            }
            Kind::Explicit { probs } => {
                let mut max = 0.0_f64;
                for_each_subset(s.members(), self.arity, &mut |vs| {
                    let e = CanonicalEdge::new(vs.to_vec()).expect("subset is canonical");
                    max = max.max(*probs.get(&e).expect("explicit table is total"));
                });
                max
            }
        })
    }
}

/// Expected internal count with an explicit marker for `|d| < m`, which is
/// a structural zero rather than an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedInternal {
    pub value: f64,
    pub undersized: bool,
}

/// Calls `f` on every size-`k` subset of `base` (members in order).
fn for_each_subset(base: &[u32], k: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(base: &[u32], k: usize, start: usize, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let need = k - cur.len();
        for i in start..=base.len().saturating_sub(need) {
            cur.push(base[i]);
            rec(base, k, i + 1, cur, f);
            cur.pop();
        }
    }
    if k <= base.len() {
        rec(base, k, 0, &mut Vec::with_capacity(k), f);
    }
}

/// A planted alternative: support `S` and boost `rho`, with validity
/// `rho p_e <= 1` on every edge inside `S` checked at construction.
#[derive(Debug, Clone)]
pub struct PlantedAlternative {
    support: VertexSet,
    rho: f64,
}

impl PlantedAlternative {
    pub fn new(model: &ProbabilityModel, support: VertexSet, rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho < 1.0 {
            return Err(Error::domain(
                "alternative",
                format!("rho = {rho} not in [1, inf)"),
            ));
        }
        support.check_range(model.num_vertices())?;
        if support.len() < model.arity() {
            return Err(Error::domain(
                "alternative",
                format!(
                    "support size {} below arity {}",
                    support.len(),
                    model.arity()
                ),
            ));
        }
        let pmax = model.max_edge_probability_within(&support)?;
        if rho * pmax > 1.0 + 1e-12 {
            return Err(Error::domain(
                "alternative",
                format!("rho * max p_e = {} > 1 inside the support", rho * pmax),
            ));
        }
        Ok(PlantedAlternative { support, rho })
    }

    pub fn support(&self) -> &VertexSet {
        &self.support
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Edge probability under this alternative.
    pub fn edge_probability(&self, model: &ProbabilityModel, e: &CanonicalEdge) -> Result<f64> {
        let p = model.edge_probability(e)?;
        if e.vertices().iter().all(|&v| self.support.contains(v)) {
            Ok((self.rho * p).min(1.0))
        } else {
            Ok(p)
        }
    }
}

/// Sparsity diagnostic: the boosted-square scale `rho^2 max_e p_e` inside
/// the support, which the detection theory wants small.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SparsityReport {
    pub rho2_pmax: f64,
    pub tolerance: f64,
    pub holds: bool,
}

pub fn check_sparsity(
    model: &ProbabilityModel,
    alt: &PlantedAlternative,
    tolerance: f64,
) -> Result<SparsityReport> {
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::domain(
            "check_sparsity",
            format!("tolerance = {tolerance} not positive"),
        ));
    }
    let pmax = model.max_edge_probability_within(alt.support())?;
    let rho2_pmax = alt.rho() * alt.rho() * pmax;
    Ok(SparsityReport {
        rho2_pmax,
        tolerance,
        holds: rho2_pmax <= tolerance,
    })
}

/// Extremes of a rank-1 weight vector plus the parity-constrained slack
/// exponent `delta_m` used by the weight-spread condition.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Rank1Stats {
    pub w_max: f64,
    pub w_min: f64,
    pub delta_m: f64,
}

/// `delta_m` must be 0 for even arity and in (0, 1) for odd arity.
pub fn rank1_stats(model: &ProbabilityModel, delta_m: f64) -> Result<Rank1Stats> {
    let weights = model.weights().map_err(|_| Error::NotRank1 {
        op: "rank1_stats",
    })?;
    if model.arity().is_multiple_of(2) {
        if delta_m != 0.0 {
            return Err(Error::domain(
                "rank1_stats",
                format!("delta_m = {delta_m} must be 0 for even arity"),
            ));
        }
    } else if !(delta_m > 0.0 && delta_m < 1.0) {
        return Err(Error::domain(
            "rank1_stats",
            format!("delta_m = {delta_m} not in (0, 1) for odd arity"),
        ));
    }
    let mut w_max = f64::MIN;
    let mut w_min = f64::MAX;
    for &w in weights {
        w_max = w_max.max(w);
        w_min = w_min.min(w);
    }
    Ok(Rank1Stats {
        w_max,
        w_min,
        delta_m,
    })
}

/// Weight-spread condition report for rank-1 models: the estimator theory
/// needs `(w_max / w_min)^m` dominated by both `n^{m/(m+1)}` and
/// `w_min^m (N/n)^{m-1-delta_m}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Rank1AssumptionReport {
    pub lhs: f64,
    pub rhs_size: f64,
    pub rhs_weight: f64,
    pub rhs: f64,
    pub margin: f64,
    pub ratio: f64,
    pub holds: bool,
}

/// Checks the spread condition at support size `n` with headroom factor
/// `margin` (1 = the bare inequality). A zero minimum weight fails
/// automatically: the left side is infinite.
pub fn check_rank1_assumption(
    model: &ProbabilityModel,
    n: usize,
    delta_m: f64,
    margin: f64,
) -> Result<Rank1AssumptionReport> {
    if n < model.arity() || n as u32 > model.num_vertices() {
        return Err(Error::domain(
            "check_rank1_assumption",
            format!("n = {n} not in [arity, num_vertices]"),
        ));
    }
    if !margin.is_finite() || margin <= 0.0 {
        return Err(Error::domain(
            "check_rank1_assumption",
            format!("margin = {margin} not positive"),
        ));
    }
    let stats = rank1_stats(model, delta_m)?;
    let m = model.arity() as f64;
    let nf = n as f64;
    let cap_n = model.num_vertices() as f64;
    let lhs = if stats.w_min == 0.0 {
        f64::INFINITY
    } else {
        (stats.w_max / stats.w_min).powf(m)
    };
    let rhs_size = nf.powf(m / (m + 1.0));
    let rhs_weight = stats.w_min.powf(m) * (cap_n / nf).powf(m - 1.0 - delta_m);
    let rhs = rhs_size.min(rhs_weight);
    let bound = margin * rhs;
    Ok(Rank1AssumptionReport {
        lhs,
        rhs_size,
        rhs_weight,
        rhs,
        margin,
        ratio: lhs / bound,
        holds: lhs < bound,
    })
}

/// Reads a rank-1 weight table from CSV with header `vertex,weight`. The
/// rows must cover ids `0..N` exactly once for some `N`; the file fixes the
/// vertex count.
pub fn load_weights_csv(path: &Path, arity: usize) -> Result<ProbabilityModel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| crate::hypergraph::csv_error_for(path, &e))?;
    let headers = reader
        .headers()
        .map_err(|e| crate::hypergraph::csv_error_for(path, &e))?
        .clone();
    if headers.len() != 2 || &headers[0] != "vertex" || &headers[1] != "weight" {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            detail: "header must be vertex,weight".into(),
        });
    }
    let mut rows: Vec<(u32, f64, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| crate::hypergraph::csv_error_for(path, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |field: &str, what: &str| -> Result<f64> {
            field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("{field:?} is not a {what}"),
            })
        };
        let v = parse(&record[0], "vertex id")? as u32;
        let w = parse(&record[1], "weight")?;
        rows.push((v, w, line));
    }
    let n = rows.len();
    let mut weights = vec![f64::NAN; n];
    for (v, w, line) in rows {
        if v as usize >= n || !weights[v as usize].is_nan() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("vertex {v} missing, repeated, or out of 0..{n}"),
            });
        }
        weights[v as usize] = w;
    }
    ProbabilityModel::rank1(weights, arity)
}

/// Writes the weight table of a rank-1 model; inverse of [`load_weights_csv`].
pub fn write_weights_csv(model: &ProbabilityModel, path: &Path) -> Result<()> {
    use std::io::Write as _;
    let weights = model.weights()?;
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
    );
    writeln!(out, "vertex,weight").map_err(|e| Error::io(path, e))?;
    for (v, w) in weights.iter().enumerate() {
        writeln!(out, "{v},{w}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Reads an explicit probability table from CSV with header `v1,...,vm,p`.
/// The table must be total over canonical edges of `0..num_vertices`.
pub fn load_explicit_csv(
    path: &Path,
    num_vertices: u32,
    arity: usize,
) -> Result<ProbabilityModel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| crate::hypergraph::csv_error_for(path, &e))?;
    let headers = reader
        .headers()
        .map_err(|e| crate::hypergraph::csv_error_for(path, &e))?
        .clone();
    if headers.len() != arity + 1 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            detail: format!("{} columns, expected v1..v{arity},p", headers.len()),
        });
    }
    for i in 0..arity {
        let want = format!("v{}", i + 1);
        if &headers[i] != want.as_str() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                detail: format!("header column {} is {:?}, expected {want:?}", i + 1, &headers[i]),
            });
        }
    }
    if &headers[arity] != "p" {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            detail: "last header column must be p".into(),
        });
    }
    let mut probs = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| crate::hypergraph::csv_error_for(path, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut vertices = Vec::with_capacity(arity);
        for field in record.iter().take(arity) {
            let v: u32 = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("{field:?} is not a vertex id"),
            })?;
            vertices.push(v);
        }
        let p: f64 = record[arity].parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            detail: format!("{:?} is not a probability", &record[arity]),
        })?;
        let edge = CanonicalEdge::new(vertices).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            detail: e.to_string(),
        })?;
        if probs.insert(edge.clone(), p).is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("duplicate edge {edge}"),
            });
        }
    }
    ProbabilityModel::explicit(num_vertices, arity, probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vset(v: &[u32]) -> VertexSet {
        VertexSet::new(v.to_vec()).unwrap()
    }

    fn edge(v: &[u32]) -> CanonicalEdge {
        CanonicalEdge::new(v.to_vec()).unwrap()
    }

    #[test]
    fn construction_validation() {
        assert!(ProbabilityModel::homogeneous(10, 2, 0.3).is_ok());
        assert!(ProbabilityModel::homogeneous(10, 2, 1.2).is_err());
        assert!(ProbabilityModel::homogeneous(10, 1, 0.3).is_err());
        assert!(ProbabilityModel::homogeneous(2, 3, 0.3).is_err());
        assert!(ProbabilityModel::rank1(vec![0.5, 0.5, 1.1], 2).is_err());
        assert!(ProbabilityModel::rank1(vec![0.5; 5], 2).is_ok());
    }

    #[test]
    fn edge_probability_shapes() {
        let homog = ProbabilityModel::homogeneous(6, 2, 0.3).unwrap();
        assert_eq!(homog.edge_probability(&edge(&[1, 4])).unwrap(), 0.3);
        assert!(homog.edge_probability(&edge(&[1, 6])).is_err());
        assert!(homog.edge_probability(&edge(&[1, 2, 3])).is_err());

        let w = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let rank1 = ProbabilityModel::rank1(w.clone(), 3).unwrap();
        let p = rank1.edge_probability(&edge(&[0, 2, 5])).unwrap();
        assert!((p - 0.1 * 0.3 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn explicit_table_totality() {
        let mut probs = HashMap::new();
        for (a, b, p) in [
            (0u32, 1u32, 0.1),
            (0, 2, 0.2),
            (1, 2, 0.3),
            (0, 3, 0.4),
            (1, 3, 0.5),
            (2, 3, 0.6),
        ] {
            probs.insert(edge(&[a, b]), p);
        }
        let model = ProbabilityModel::explicit(4, 2, probs.clone()).unwrap();
        assert_eq!(model.edge_probability(&edge(&[1, 3])).unwrap(), 0.5);

        probs.remove(&edge(&[1, 3]));
        assert!(ProbabilityModel::explicit(4, 2, probs.clone()).is_err());
        probs.insert(edge(&[1, 3]), 1.5);
        assert!(ProbabilityModel::explicit(4, 2, probs).is_err());
    }

    #[test]
    fn expected_internal_homogeneous_and_undersized() {
        let model = ProbabilityModel::homogeneous(10, 3, 0.2).unwrap();
        let e = model.expected_internal(&vset(&[0, 1, 2, 3, 4])).unwrap();
        assert!(!e.undersized);
        assert!((e.value - 10.0 * 0.2).abs() < 1e-12);
        let small = model.expected_internal(&vset(&[0, 1])).unwrap();
        assert!(small.undersized);
        assert_eq!(small.value, 0.0);
        assert!(model.edge_rate(&vset(&[0, 1])).is_err());
        assert!((model.edge_rate(&vset(&[0, 1, 2, 3])).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn expected_internal_rank1_matches_bruteforce() {
        let w = vec![0.12, 0.5, 0.33, 0.7, 0.05, 0.9, 0.41];
        for m in [2usize, 3, 4] {
            let model = ProbabilityModel::rank1(w.clone(), m).unwrap();
            let d = vset(&[0, 2, 3, 5, 6]);
            let got = model.expected_internal(&d).unwrap().value;
            let mut want = 0.0;
            for_each_subset(d.members(), m, &mut |vs| {
                want += vs.iter().map(|&v| w[v as usize]).product::<f64>();
            });
            assert!((got - want).abs() < 1e-12, "m = {m}: {got} vs {want}");
        }
    }

    #[test]
    fn homogeneous_equals_constant_rank1() {
        // p = w^m uniformly; the two models agree on every expectation.
        let w = 0.6_f64;
        let m = 3usize;
        let homog = ProbabilityModel::homogeneous(8, m, w.powi(m as i32)).unwrap();
        let rank1 = ProbabilityModel::rank1(vec![w; 8], m).unwrap();
        for d in [vset(&[0, 1, 2]), vset(&[1, 3, 4, 6, 7]), vset(&[0, 1, 2, 3, 4, 5, 6, 7])] {
            let a = homog.expected_internal(&d).unwrap().value;
            let b = rank1.expected_internal(&d).unwrap().value;
            assert!((a - b).abs() < 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn max_edge_probability() {
        let w = vec![0.1, 0.9, 0.2, 0.8, 0.3];
        let model = ProbabilityModel::rank1(w, 2).unwrap();
        let s = vset(&[0, 1, 3, 4]);
        assert!((model.max_edge_probability_within(&s).unwrap() - 0.72).abs() < 1e-15);
    }

    #[test]
    fn alternative_validity() {
        let model = ProbabilityModel::homogeneous(10, 2, 0.3).unwrap();
        assert!(PlantedAlternative::new(&model, vset(&[0, 1, 2]), 2.0).is_ok());
        // rho p > 1 inside the support
        assert!(PlantedAlternative::new(&model, vset(&[0, 1, 2]), 4.0).is_err());
        assert!(PlantedAlternative::new(&model, vset(&[0]), 2.0).is_err());
        assert!(PlantedAlternative::new(&model, vset(&[0, 1]), 0.5).is_err());
        // Boundary rho p = 1 is allowed.
        let sat = PlantedAlternative::new(&model, vset(&[0, 1, 2]), 1.0 / 0.3).unwrap();
        let q = sat
            .edge_probability(&model, &edge(&[0, 1]))
            .unwrap();
        assert!((q - 1.0).abs() < 1e-12);
        let outside = sat.edge_probability(&model, &edge(&[5, 6])).unwrap();
        assert_eq!(outside, 0.3);
    }

    #[test]
    fn sparsity_report() {
        let model = ProbabilityModel::homogeneous(10, 2, 0.02).unwrap();
        let alt = PlantedAlternative::new(&model, vset(&[0, 1, 2, 3]), 3.0).unwrap();
        let r = check_sparsity(&model, &alt, 0.2).unwrap();
        assert!((r.rho2_pmax - 0.18).abs() < 1e-15);
        assert!(r.holds);
        let r2 = check_sparsity(&model, &alt, 0.1).unwrap();
        assert!(!r2.holds);
    }

    #[test]
    fn rank1_assumption_arithmetic() {
        // Even arity: delta_m must be 0; worked numbers.
        let w = vec![0.6, 0.7, 0.8, 0.6, 0.7, 0.8, 0.6, 0.7, 0.8, 0.6, 0.7, 0.8];
        let model = ProbabilityModel::rank1(w, 2).unwrap();
        let r = check_rank1_assumption(&model, 6, 0.0, 1.0).unwrap();
        // lhs = (0.8/0.6)^2 = 16/9; rhs_size = 6^{2/3}; rhs_weight = 0.36 * 2
        assert!((r.lhs - 16.0 / 9.0).abs() < 1e-12);
        assert!((r.rhs_size - 6.0_f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!((r.rhs_weight - 0.72).abs() < 1e-12);
        // min(3.30, 0.72) = 0.72 < 16/9: the spread is too wide here.
        assert!(!r.holds);
        assert!((r.ratio - (16.0 / 9.0) / 0.72).abs() < 1e-12);

        // A flat profile passes: lhs = 1 against min(3.30, 1.28).
        let flat = ProbabilityModel::rank1(vec![0.8; 12], 2).unwrap();
        let rf = check_rank1_assumption(&flat, 6, 0.0, 1.0).unwrap();
        assert!((rf.lhs - 1.0).abs() < 1e-12);
        assert!((rf.rhs_weight - 1.28).abs() < 1e-12);
        assert!(rf.holds);
    }

    #[test]
    fn rank1_assumption_parity_and_zero_weight() {
        let model = ProbabilityModel::rank1(vec![0.5; 9], 3).unwrap();
        assert!(check_rank1_assumption(&model, 4, 0.0, 1.0).is_err());
        assert!(check_rank1_assumption(&model, 4, 0.5, 1.0).is_ok());
        let model2 = ProbabilityModel::rank1(vec![0.5; 9], 2).unwrap();
        assert!(check_rank1_assumption(&model2, 4, 0.5, 1.0).is_err());

        let with_zero = ProbabilityModel::rank1(vec![0.0, 0.5, 0.5, 0.5], 2).unwrap();
        let r = check_rank1_assumption(&with_zero, 3, 0.0, 1.0).unwrap();
        assert!(!r.holds);
        assert!(r.lhs.is_infinite());
        let homog = ProbabilityModel::homogeneous(5, 2, 0.3).unwrap();
        assert!(matches!(
            check_rank1_assumption(&homog, 3, 0.0, 1.0),
            Err(Error::NotRank1 { .. })
        ));
    }

    #[test]
    fn weights_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let model = ProbabilityModel::rank1(vec![0.25, 0.5, 0.75], 2).unwrap();
        write_weights_csv(&model, &path).unwrap();
        let back = load_weights_csv(&path, 2).unwrap();
        assert_eq!(back.weights().unwrap(), model.weights().unwrap());

        std::fs::write(&path, "vertex,weight\n0,0.5\n2,0.5\n").unwrap();
        assert!(load_weights_csv(&path, 2).is_err());
        std::fs::write(&path, "vertex,weight\n0,0.5\n0,0.5\n").unwrap();
        assert!(load_weights_csv(&path, 2).is_err());
    }

    #[test]
    fn explicit_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(
            &path,
            "v1,v2,p\n0,1,0.1\n0,2,0.2\n1,2,0.3\n",
        )
        .unwrap();
        let model = load_explicit_csv(&path, 3, 2).unwrap();
        assert_eq!(model.edge_probability(&edge(&[0, 2])).unwrap(), 0.2);
        // Missing an edge: totality violated.
        std::fs::write(&path, "v1,v2,p\n0,1,0.1\n0,2,0.2\n").unwrap();
        assert!(load_explicit_csv(&path, 3, 2).is_err());
    }
}
