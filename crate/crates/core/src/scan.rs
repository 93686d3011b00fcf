//! Scan tests for a planted dense subset.
//!
//! For a candidate subset `D` of size `k` in a graph on `N` vertices, the
//! deviation score is
//!
//! ```text
//! T_D = E[A_D] h( [A_D / E[A_D] - 1]_+ ) / ( k ln(N / k) )
//! ```
//!
//! with `h` the convex rate function from [`crate::math`] and `E[A_D]` the
//! expected internal edge count. The scan statistic is the maximum of `T_D`
//! over subsets with sizes in a configured window, and the test rejects when
//! it exceeds a threshold `tau` (default 1, or calibrated from null
//! replicates).
//!
//! Two variants share all machinery:
//!
//! * known probabilities ([`scan_known_p`]): `E[A_D]` comes from the null
//!   model;
//! * adaptive ([`adaptive_scan`]): `E[A_D]` is replaced by the plug-in
//!   estimate `p*_D = max(p_D, (k^m / N^{m-1}) ln^{2m}(N/k))`, where `p_D`
//!   is the crossing-count estimator of [`estimate_pdm`]. The floor keeps
//!   the statistic conservative on subsets too small to estimate.
//!
//! Subsets of size below the arity carry no edges and score exactly 0, so
//! they are admissible but never interesting. Ties between equal-valued
//! subsets resolve to the lexicographically smallest vertex set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, VertexSet};
use crate::math::{binom_f64, h_raw};
use crate::model::ProbabilityModel;
use crate::sampler::{sample, SampleSpec};

/// Default cap on the number of scored subsets in exact mode.
pub const DEFAULT_SUBSET_BUDGET: u64 = 50_000_000;

/// How the subset space is covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Enumeration {
    /// Every subset with size in the window; errors when the count exceeds
    /// the budget.
    Exact,
    /// Greedy growth from high-degree seed vertices followed by swap
    /// refinement. Never beats exact on the same graph, often matches it.
    Heuristic { seeds: usize, swap_rounds: usize },
}

/// Scan configuration; see the module docs for the statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Largest subset size scored (must stay below the vertex count).
    pub n_max: usize,
    /// Smallest subset size scored; `None` means the arity.
    pub size_min: Option<usize>,
    pub enumeration: Enumeration,
    /// Exact-mode budget on `sum_k C(N, k)` over the size window.
    pub subset_budget: u64,
    /// Rejection threshold; the test rejects on `statistic > tau`.
    pub tau: f64,
    /// Adaptive scans only: raise the size floor to `ceil(n_max^{1/(m+1)})`,
    /// the smallest size at which the plug-in rate is informative.
    pub restrict_size_floor: bool,
}

impl ScanConfig {
    pub fn exact(n_max: usize) -> Self {
        ScanConfig {
            n_max,
            size_min: None,
            enumeration: Enumeration::Exact,
            subset_budget: DEFAULT_SUBSET_BUDGET,
            tau: 1.0,
            restrict_size_floor: false,
        }
    }

    /// Heuristic mode with one seed per vertex and two swap rounds.
    pub fn heuristic(n_max: usize) -> Self {
        ScanConfig {
            n_max,
            size_min: None,
            enumeration: Enumeration::Heuristic {
                seeds: usize::MAX,
                swap_rounds: 2,
            },
            subset_budget: DEFAULT_SUBSET_BUDGET,
            tau: 1.0,
            restrict_size_floor: false,
        }
    }

    /// Validates against a graph shape and resolves the size window.
    fn resolve(&self, num_vertices: u32, arity: usize, adaptive: bool) -> Result<(usize, usize)> {
        if self.n_max == 0 || self.n_max >= num_vertices as usize {
            return Err(Error::domain(
                "scan",
                format!(
                    "n_max = {} not in [1, {}) for {} vertices",
                    self.n_max, num_vertices, num_vertices
                ),
            ));
        }
        let size_min = match self.size_min {
            Some(s) => s,
            None if adaptive && self.restrict_size_floor => {
                integer_ceil_root(self.n_max, arity + 1)
            }
            None => arity,
        };
        if size_min == 0 || size_min > self.n_max {
            return Err(Error::domain(
                "scan",
                format!("size_min = {size_min} not in [1, n_max = {}]", self.n_max),
            ));
        }
        if !self.tau.is_finite() {
            return Err(Error::domain("scan", format!("tau = {} not finite", self.tau)));
        }
        if let Enumeration::Heuristic { seeds, .. } = self.enumeration {
            if seeds == 0 {
                return Err(Error::domain("scan", "heuristic needs at least one seed"));
            }
        }
        Ok((size_min, self.n_max))
    }
}

/// `ceil(base^{1/root})` with a guard against floating point landing just
/// above an exact integer root.
fn integer_ceil_root(base: usize, root: usize) -> usize {
    let x = (base as f64).powf(1.0 / root as f64);
    let rounded = x.round();
    if (x - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        x.ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Reject,
    Retain,
}

/// Best subset found at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeBest {
    pub size: usize,
    pub value: f64,
    pub set: VertexSet,
}

/// Scan outcome: the statistic, where it was attained, the per-size table,
/// whether enumeration was exhaustive, and the thresholded decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub statistic: f64,
    pub argmax_set: VertexSet,
    pub per_size_best: Vec<SizeBest>,
    pub exact: bool,
    pub decision: Decision,
    pub tau: f64,
}

/// The deviation score shared by both scan variants. Zero when the observed
/// count does not exceed its expectation; a positive count against a zero
/// expectation is a domain failure of the null model, not a statistic.
fn deviation_score(observed: u64, expected: f64, size: usize, num_vertices: u32) -> Result<f64> {
    let a = observed as f64;
    if a <= expected {
        return Ok(0.0);
    }
    if expected <= 0.0 {
        return Err(Error::ZeroExpectation {
            context: format!("{observed} observed edges in a size-{size} subset with zero expected count"),
        });
    }
    let denom = size as f64 * (num_vertices as f64 / size as f64).ln();
    Ok(expected * h_raw(a / expected - 1.0) / denom)
}

/// Deviation score of a single subset under known probabilities.
///
/// `d` must be a nonempty proper subset of the vertex range; sizes below
/// the arity score 0 (no edge fits).
pub fn t_d(g: &Hypergraph, model: &ProbabilityModel, d: &VertexSet) -> Result<f64> {
    check_same_shape(g, model)?;
    if d.is_empty() || d.len() >= g.num_vertices() as usize {
        return Err(Error::domain(
            "t_d",
            format!(
                "|d| = {} not in [1, {}) for {} vertices",
                d.len(),
                g.num_vertices(),
                g.num_vertices()
            ),
        ));
    }
    let expected = model.expected_internal(d)?;
    let observed = g.count_internal_edges(d)?;
    deviation_score(observed, expected.value, d.len(), g.num_vertices())
}

/// Crossing-count estimator of the expected internal edge count of `d`:
///
/// ```text
/// p_D = 2^{-m} ( A_V^{1/m} - [A_V - 2 A_odd]_+^{1/m} )^m
/// ```
///
/// where `A_odd` counts edges with odd `|e intersect D|`. Under a product
/// weight model the two global counts pin down the weight mass inside `d`,
/// and `p_D` recovers its `m`-th symmetric power, which is the expected
/// count. A negative radicand degrades to `p_D = A_V / 2^m`, which the
/// clamped form already yields. `d` must be a nonempty proper subset.
pub fn estimate_pdm(g: &Hypergraph, d: &VertexSet) -> Result<f64> {
    if d.is_empty() || d.len() >= g.num_vertices() as usize {
        return Err(Error::domain(
            "estimate_pdm",
            format!(
                "|d| = {} not in [1, {}) for {} vertices",
                d.len(),
                g.num_vertices(),
                g.num_vertices()
            ),
        ));
    }
    let odd = g.count_odd_inside(d)?;
    Ok(pdm_from_counts(g.num_edges(), odd, g.arity()))
}

fn mth_root(x: f64, m: usize) -> f64 {
    if m == 2 {
        x.sqrt()
    } else {
        x.powf(1.0 / m as f64)
    }
}

fn pdm_from_counts(total_edges: u64, odd_inside: u64, m: usize) -> f64 {
    let a_v = total_edges as f64;
    let radicand = a_v - 2.0 * odd_inside as f64;
    let u = mth_root(a_v, m);
    let r = if radicand > 0.0 {
        mth_root(radicand, m)
    } else {
        0.0
    };
    (0.5 * (u - r)).powi(m as i32)
}

/// Size-dependent floor of the plug-in estimate:
/// `(k^m / N^{m-1}) ln^{2m}(N/k)`.
fn rate_floor(size: usize, num_vertices: u32, m: usize) -> f64 {
    let k = size as f64;
    let n = num_vertices as f64;
    (k.powi(m as i32) / n.powi(m as i32 - 1)) * (n / k).ln().powi(2 * m as i32)
}

/// The floored estimator `p*_D = max(p_D, (k^m / N^{m-1}) ln^{2m}(N/k))`
/// used by the adaptive scan.
pub fn pdm_star(g: &Hypergraph, d: &VertexSet) -> Result<f64> {
    let p = estimate_pdm(g, d)?;
    Ok(p.max(rate_floor(d.len(), g.num_vertices(), g.arity())))
}

fn check_same_shape(g: &Hypergraph, model: &ProbabilityModel) -> Result<()> {
    if g.num_vertices() != model.num_vertices() || g.arity() != model.arity() {
        return Err(Error::domain(
            "scan",
            format!(
                "graph is {} vertices arity {}, model is {} vertices arity {}",
                g.num_vertices(),
                g.arity(),
                model.num_vertices(),
                model.arity()
            ),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Incremental subset state.
//
// The enumerators maintain, for the current subset D, the internal count
// (edges inside D) and the odd-inside count (edges meeting D in an odd
// number of vertices). Arity 2 uses adjacency bitmasks; general arity uses
// per-edge intersection counters. Push/pop are exact inverses.

trait Counter {
    fn push(&mut self, v: u32);
    fn pop(&mut self, v: u32);
    fn internal(&self) -> u64;
    fn odd_inside(&self) -> u64;
}

struct PairCounter {
    words: usize,
    adj: Vec<u64>,
    deg: Vec<u64>,
    mask: Vec<u64>,
    internal: u64,
    cut: u64,
}

impl PairCounter {
    fn new(g: &Hypergraph) -> Self {
        let n = g.num_vertices() as usize;
        let words = n.div_ceil(64);
        let mut adj = vec![0u64; n * words];
        let mut deg = vec![0u64; n];
        for e in g.edges() {
            let (a, b) = (e.vertices()[0] as usize, e.vertices()[1] as usize);
            adj[a * words + b / 64] |= 1 << (b % 64);
            adj[b * words + a / 64] |= 1 << (a % 64);
            deg[a] += 1;
            deg[b] += 1;
        }
        PairCounter {
            words,
            adj,
            deg,
            mask: vec![0u64; words],
            internal: 0,
            cut: 0,
        }
    }

    fn edges_into(&self, v: u32) -> u64 {
        let row = &self.adj[v as usize * self.words..(v as usize + 1) * self.words];
        row.iter()
            .zip(&self.mask)
            .map(|(a, m)| (a & m).count_ones() as u64)
            .sum()
    }
}

impl Counter for PairCounter {
    fn push(&mut self, v: u32) {
        let e = self.edges_into(v);
        self.internal += e;
        // Edges from v to D leave the cut; edges from v outward join it.
        // Summed before subtracting: cut >= e, so this stays in range.
        self.cut = self.cut + self.deg[v as usize] - 2 * e;
        self.mask[v as usize / 64] |= 1 << (v % 64);
    }

    fn pop(&mut self, v: u32) {
        self.mask[v as usize / 64] &= !(1 << (v % 64));
        let e = self.edges_into(v);
        self.internal -= e;
        // cut >= deg - e while v is in D, so cut + 2e covers deg.
        self.cut = self.cut + 2 * e - self.deg[v as usize];
    }

    fn internal(&self) -> u64 {
        self.internal
    }

    fn odd_inside(&self) -> u64 {
        // For pairs, odd intersection means exactly one endpoint inside.
        self.cut
    }
}

struct GeneralCounter<'g> {
    g: &'g Hypergraph,
    cnt: Vec<u16>,
    internal: u64,
    odd: u64,
}

impl<'g> GeneralCounter<'g> {
    fn new(g: &'g Hypergraph) -> Self {
        GeneralCounter {
            g,
            cnt: vec![0u16; g.num_edges() as usize],
            internal: 0,
            odd: 0,
        }
    }
}

impl Counter for GeneralCounter<'_> {
    fn push(&mut self, v: u32) {
        let m = self.g.arity() as u16;
        for &ei in &self.g.incidence()[v as usize] {
            let c = self.cnt[ei as usize] + 1;
            self.cnt[ei as usize] = c;
            if c == m {
                self.internal += 1;
            }
            if c % 2 == 1 {
                self.odd += 1;
            } else {
                self.odd -= 1;
            }
        }
    }

    fn pop(&mut self, v: u32) {
        let m = self.g.arity() as u16;
        for &ei in &self.g.incidence()[v as usize] {
            let c = self.cnt[ei as usize];
            self.cnt[ei as usize] = c - 1;
            if c == m {
                self.internal -= 1;
            }
            if c % 2 == 1 {
                self.odd -= 1;
            } else {
                self.odd += 1;
            }
        }
    }

    fn internal(&self) -> u64 {
        self.internal
    }

    fn odd_inside(&self) -> u64 {
        self.odd
    }
}

// ---------------------------------------------------------------------------
// Expected-count tracking and scoring.

/// Expected internal count of the current subset, maintained incrementally
/// alongside the enumeration.
enum Tracker<'m> {
    /// table[k] = C(k, m) p
    Homogeneous { table: Vec<f64> },
    /// Rows of elementary symmetric sums e_0..e_m, one snapshot per depth,
    /// so pop restores the previous row exactly (no floating drift).
    Rank1 {
        weights: &'m [f64],
        m: usize,
        rows: Vec<f64>,
        depth: usize,
    },
    /// Direct recomputation from the table; explicit models are small.
    Explicit {
        model: &'m ProbabilityModel,
        current: Vec<u32>,
    },
}

impl<'m> Tracker<'m> {
    fn new(model: &'m ProbabilityModel, n_max: usize) -> Self {
        if model.is_homogeneous() {
            let p = model
                .edge_probability(
                    &crate::hypergraph::colex_unrank(0, model.arity()).expect("arity >= 2"),
                )
                .expect("first edge exists");
            let m = model.arity();
            let table = (0..=n_max)
                .map(|k| binom_f64(k as u64, m as u64) * p)
                .collect();
            Tracker::Homogeneous { table }
        } else if let Ok(weights) = model.weights() {
            let m = model.arity();
            let mut rows = vec![0.0; (n_max + 1) * (m + 1)];
            rows[0] = 1.0; // e_0 of the empty set
            Tracker::Rank1 {
                weights,
                m,
                rows,
                depth: 0,
            }
        } else {
            Tracker::Explicit {
                model,
                current: Vec::with_capacity(n_max),
            }
        }
    }

    fn push(&mut self, v: u32) {
        match self {
            Tracker::Homogeneous { .. } => {}
            Tracker::Rank1 {
                weights,
                m,
                rows,
                depth,
            } => {
                let w = weights[v as usize];
                let stride = *m + 1;
                let (prev, next) = rows.split_at_mut((*depth + 1) * stride);
                let prev = &prev[*depth * stride..];
                next[0] = 1.0;
                for j in 1..stride {
                    next[j] = prev[j] + w * prev[j - 1];
                }
                *depth += 1;
            }
            Tracker::Explicit { current, .. } => current.push(v),
        }
    }

    fn pop(&mut self) {
        match self {
            Tracker::Homogeneous { .. } => {}
            Tracker::Rank1 { depth, .. } => *depth -= 1,
            Tracker::Explicit { current, .. } => {
                current.pop();
            }
        }
    }

    fn expected(&self, size: usize) -> f64 {
        match self {
            Tracker::Homogeneous { table } => table[size],
            Tracker::Rank1 { m, rows, depth, .. } => rows[*depth * (*m + 1) + *m],
            Tracker::Explicit { model, current } => {
                debug_assert_eq!(current.len(), size);
                let d = VertexSet::new(current.clone()).expect("enumeration keeps sets canonical");
                model
                    .expected_internal(&d)
                    .expect("current subset is in range")
                    .value
            }
        }
    }
}

enum Scorer<'m> {
    Known {
        tracker: Tracker<'m>,
        num_vertices: u32,
    },
    Adaptive {
        a_v: f64,
        u_root: f64,
        m: usize,
        num_vertices: u32,
        /// floor[k] = count floor at size k.
        floor: Vec<f64>,
    },
}

impl<'m> Scorer<'m> {
    fn known(model: &'m ProbabilityModel, n_max: usize) -> Self {
        Scorer::Known {
            tracker: Tracker::new(model, n_max),
            num_vertices: model.num_vertices(),
        }
    }

    fn adaptive(g: &Hypergraph, n_max: usize) -> Self {
        let m = g.arity();
        let a_v = g.num_edges() as f64;
        Scorer::Adaptive {
            a_v,
            u_root: mth_root(a_v, m),
            m,
            num_vertices: g.num_vertices(),
            floor: (0..=n_max)
                .map(|k| {
                    if k == 0 {
                        0.0
                    } else {
                        rate_floor(k, g.num_vertices(), m)
                    }
                })
                .collect(),
        }
    }

    fn push(&mut self, v: u32) {
        if let Scorer::Known { tracker, .. } = self {
            tracker.push(v);
        }
    }

    fn pop(&mut self) {
        if let Scorer::Known { tracker, .. } = self {
            tracker.pop();
        }
    }

    fn score(&self, size: usize, internal: u64, odd_inside: u64) -> Result<f64> {
        match self {
            Scorer::Known {
                tracker,
                num_vertices,
            } => deviation_score(internal, tracker.expected(size), size, *num_vertices),
            Scorer::Adaptive {
                a_v,
                u_root,
                m,
                num_vertices,
                floor,
            } => {
                let radicand = *a_v - 2.0 * odd_inside as f64;
                let r = if radicand > 0.0 {
                    mth_root(radicand, *m)
                } else {
                    0.0
                };
                // The crossing-count estimate stands in for the expected
                // internal count itself, floored for stability.
                let p_hat = (0.5 * (u_root - r)).powi(*m as i32);
                let expected = p_hat.max(floor[size]);
                deviation_score(internal, expected, size, *num_vertices)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Enumeration drivers.

/// Per-size best table with deterministic ties: higher value wins, equal
/// value goes to the lexicographically smaller vertex sequence.
struct BestTable {
    size_min: usize,
    rows: Vec<Option<(f64, Vec<u32>)>>,
}

impl BestTable {
    fn new(size_min: usize, n_max: usize) -> Self {
        BestTable {
            size_min,
            rows: vec![None; n_max - size_min + 1],
        }
    }

    fn consider(&mut self, size: usize, value: f64, set: &[u32]) {
        let row = &mut self.rows[size - self.size_min];
        match row {
            Some((best, best_set)) => {
                if value > *best || (value == *best && set < best_set.as_slice()) {
                    *row = Some((value, set.to_vec()));
                }
            }
            None => *row = Some((value, set.to_vec())),
        }
    }
}

struct ExactDfs<'a, C: Counter> {
    num_vertices: u32,
    size_min: usize,
    n_max: usize,
    counter: C,
    scorer: Scorer<'a>,
    best: BestTable,
    current: Vec<u32>,
}

impl<C: Counter> ExactDfs<'_, C> {
    fn run(&mut self, start: u32) -> Result<()> {
        for v in start..self.num_vertices {
            self.counter.push(v);
            self.scorer.push(v);
            self.current.push(v);
            let size = self.current.len();
            if size >= self.size_min {
                let value =
                    self.scorer
                        .score(size, self.counter.internal(), self.counter.odd_inside())?;
                self.best.consider(size, value, &self.current);
            }
            if size < self.n_max {
                self.run(v + 1)?;
            }
            self.current.pop();
            self.scorer.pop();
            self.counter.pop(v);
        }
        Ok(())
    }
}

/// Greedy cover: grow from each seed by the best (score, internal count,
/// degree, smallest id) addition, then swap-refine the full-size set.
struct HeuristicState<'a, C: Counter> {
    num_vertices: u32,
    size_min: usize,
    n_max: usize,
    counter: C,
    scorer: Scorer<'a>,
    best: BestTable,
    degrees: Vec<u64>,
}

impl<C: Counter> HeuristicState<'_, C> {
    fn score_with(&mut self, v: u32, size: usize) -> Result<f64> {
        self.counter.push(v);
        self.scorer.push(v);
        let value = if size >= self.size_min {
            let s = self
                .scorer
                .score(size, self.counter.internal(), self.counter.odd_inside());
            match s {
                Ok(val) => val,
                Err(e) => {
                    self.scorer.pop();
                    self.counter.pop(v);
                    return Err(e);
                }
            }
        } else {
            0.0
        };
        self.scorer.pop();
        self.counter.pop(v);
        Ok(value)
    }

    fn run(&mut self, seeds: usize, swap_rounds: usize) -> Result<()> {
        let mut order: Vec<u32> = (0..self.num_vertices).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(self.degrees[v as usize]), v));
        let seeds = seeds.min(order.len());

        for &seed in &order[..seeds] {
            let mut current = vec![seed];
            self.counter.push(seed);
            self.scorer.push(seed);
            if 1 >= self.size_min {
                let value = self
                    .scorer
                    .score(1, self.counter.internal(), self.counter.odd_inside())?;
                self.best.consider(1, value, &current);
            }
            while current.len() < self.n_max {
                let size = current.len() + 1;
                let mut pick: Option<(f64, u64, u64, u32)> = None;
                for u in 0..self.num_vertices {
                    if current.binary_search(&u).is_ok() {
                        continue;
                    }
                    let value = self.score_with(u, size)?;
                    self.counter.push(u);
                    let internal = self.counter.internal();
                    self.counter.pop(u);
                    let key = (value, internal, self.degrees[u as usize], u);
                    let better = match &pick {
                        None => true,
                        Some(b) => {
                            (key.0, key.1, key.2) > (b.0, b.1, b.2)
                        }
                    };
                    if better {
                        pick = Some(key);
                    }
                }
                let (value, _, _, u) = pick.expect("n_max < num_vertices leaves candidates");
                let at = current.binary_search(&u).unwrap_err();
                current.insert(at, u);
                self.counter.push(u);
                self.scorer.push(u);
                if size >= self.size_min {
                    self.best.consider(size, value, &current);
                }
            }

            // Swap refinement at full size.
            let full = current.len();
            if full >= self.size_min {
                let mut current_value = {
                    let v =
                        self.scorer
                            .score(full, self.counter.internal(), self.counter.odd_inside())?;
                    self.best.consider(full, v, &current);
                    v
                };
                for _ in 0..swap_rounds {
                    let mut best_swap: Option<(f64, u32, u32)> = None;
                    for i in 0..current.len() {
                        let out = current[i];
                        self.counter.pop(out);
                        self.scorer.pop();
                        for u in 0..self.num_vertices {
                            if u != out && current.binary_search(&u).is_ok() {
                                continue;
                            }
                            if u == out {
                                continue;
                            }
                            let value = self.score_with(u, full)?;
                            if best_swap.map_or(value > current_value, |b| value > b.0) {
                                best_swap = Some((value, out, u));
                            }
                        }
                        self.counter.push(out);
                        self.scorer.push(out);
                    }
                    match best_swap {
                        Some((value, out, u)) if value > current_value => {
                            let at = current.binary_search(&out).unwrap();
                            current.remove(at);
                            self.counter.pop(out);
                            self.scorer.pop();
                            let at = current.binary_search(&u).unwrap_err();
                            current.insert(at, u);
                            self.counter.push(u);
                            self.scorer.push(u);
                            current_value = value;
                            self.best.consider(full, value, &current);
                        }
                        _ => break,
                    }
                }
            }

            for &v in current.iter() {
                self.counter.pop(v);
                self.scorer.pop();
            }
        }
        Ok(())
    }
}

// The scorer push/pop in HeuristicState must mirror counter push/pop; the
// scorer's rank-1 tracker is order sensitive only through its depth, and
// every push above is paired with exactly one pop.

fn exact_subset_count(num_vertices: u32, size_min: usize, n_max: usize) -> u128 {
    let mut total: u128 = 0;
    for k in size_min..=n_max {
        total += crate::math::binom_u128(num_vertices as u128, k as u128);
    }
    total
}

fn run_enumeration<C: Counter>(
    counter: C,
    scorer: Scorer<'_>,
    g: &Hypergraph,
    cfg: &ScanConfig,
    size_min: usize,
) -> Result<BestTable> {
    match cfg.enumeration {
        Enumeration::Exact => {
            let required = exact_subset_count(g.num_vertices(), size_min, cfg.n_max);
            if required > cfg.subset_budget as u128 {
                return Err(Error::BudgetExceeded {
                    stage: "exact scan",
                    required,
                    budget: cfg.subset_budget as u128,
                });
            }
            let mut dfs = ExactDfs {
                num_vertices: g.num_vertices(),
                size_min,
                n_max: cfg.n_max,
                counter,
                scorer,
                best: BestTable::new(size_min, cfg.n_max),
                current: Vec::with_capacity(cfg.n_max),
            };
            dfs.run(0)?;
            Ok(dfs.best)
        }
        Enumeration::Heuristic { seeds, swap_rounds } => {
            let degrees: Vec<u64> = (0..g.num_vertices())
                .map(|v| g.incidence()[v as usize].len() as u64)
                .collect();
            let mut state = HeuristicState {
                num_vertices: g.num_vertices(),
                size_min,
                n_max: cfg.n_max,
                counter,
                scorer,
                best: BestTable::new(size_min, cfg.n_max),
                degrees,
            };
            state.run(seeds, swap_rounds)?;
            Ok(state.best)
        }
    }
}

fn assemble(best: BestTable, cfg: &ScanConfig) -> ScanResult {
    let mut per_size_best = Vec::new();
    let mut statistic = 0.0_f64;
    let mut argmax: Option<(f64, Vec<u32>)> = None;
    for (i, row) in best.rows.iter().enumerate() {
        if let Some((value, set)) = row {
            per_size_best.push(SizeBest {
                size: best.size_min + i,
                value: *value,
                set: VertexSet::new(set.clone()).expect("enumeration keeps sets canonical"),
            });
            let replace = match &argmax {
                None => true,
                Some((v, s)) => value > v || (value == v && set.as_slice() < s.as_slice()),
            };
            if replace {
                argmax = Some((*value, set.clone()));
                statistic = *value;
            }
        }
    }
    let (_, set) = argmax.expect("size window is nonempty");
    let decision = if statistic > cfg.tau {
        Decision::Reject
    } else {
        Decision::Retain
    };
    ScanResult {
        statistic,
        argmax_set: VertexSet::new(set).expect("enumeration keeps sets canonical"),
        per_size_best,
        exact: matches!(cfg.enumeration, Enumeration::Exact),
        decision,
        tau: cfg.tau,
    }
}

/// Scan with known null probabilities: maximizes the deviation score of
/// `A_D` against `E0[A_D]` over the configured size window.
pub fn scan_known_p(
    g: &Hypergraph,
    model: &ProbabilityModel,
    cfg: &ScanConfig,
) -> Result<ScanResult> {
    check_same_shape(g, model)?;
    let (size_min, _) = cfg.resolve(g.num_vertices(), g.arity(), false)?;
    let scorer = Scorer::known(model, cfg.n_max);
    let best = if g.arity() == 2 {
        run_enumeration(PairCounter::new(g), scorer, g, cfg, size_min)?
    } else {
        run_enumeration(GeneralCounter::new(g), scorer, g, cfg, size_min)?
    };
    Ok(assemble(best, cfg))
}

/// Model-free scan: the expected count is rebuilt per subset from the
/// floored crossing-count estimator (see module docs).
pub fn adaptive_scan(g: &Hypergraph, cfg: &ScanConfig) -> Result<ScanResult> {
    let (size_min, _) = cfg.resolve(g.num_vertices(), g.arity(), true)?;
    let scorer = Scorer::adaptive(g, cfg.n_max);
    let best = if g.arity() == 2 {
        run_enumeration(PairCounter::new(g), scorer, g, cfg, size_min)?
    } else {
        run_enumeration(GeneralCounter::new(g), scorer, g, cfg, size_min)?
    };
    Ok(assemble(best, cfg))
}

/// Which scan statistic a calibration or experiment drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanStatistic {
    KnownP,
    Adaptive,
}

/// Empirical null quantile of the scan statistic: samples `replicates`
/// null graphs on the given seed's stream and returns the `(1 - level)`
/// quantile (the `ceil((1 - level) R)`-th order statistic), suitable as a
/// rejection threshold at type-1 level approximately `level`.
///
/// Deterministic in `(seed, replicates, cfg)`; needs `level in (0, 1)` and
/// at least 50 replicates for the quantile to mean anything.
pub fn calibrate_threshold(
    model: &ProbabilityModel,
    cfg: &ScanConfig,
    stat: ScanStatistic,
    level: f64,
    replicates: u64,
    seed: u64,
    edge_budget: u64,
) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(
            "calibrate_threshold",
            format!("level = {level} not in (0, 1)"),
        ));
    }
    if replicates < 50 {
        return Err(Error::domain(
            "calibrate_threshold",
            format!("{replicates} replicates, need at least 50"),
        ));
    }
    let mut values: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let mut spec = SampleSpec::null(model, seed, r);
            spec.edge_budget = edge_budget;
            let g = sample(&spec)?;
            let result = match stat {
                ScanStatistic::KnownP => scan_known_p(&g, model, cfg)?,
                ScanStatistic::Adaptive => adaptive_scan(&g, cfg)?,
            };
            Ok(result.statistic)
        })
        .collect::<Result<Vec<f64>>>()?;
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("statistics are finite"));
    let idx = ((1.0 - level) * replicates as f64).ceil() as usize;
    let idx = idx.clamp(1, replicates as usize);
    Ok(values[idx - 1])
}
