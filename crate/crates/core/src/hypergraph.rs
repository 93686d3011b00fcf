//! m-uniform hypergraphs over vertex ids `0..num_vertices`, plus the two
//! counting primitives every statistic in this crate is built from:
//!
//! * `count_internal_edges(d)`: edges with all m vertices inside `d`,
//! * `count_odd_crossing(d)`: edges whose intersection with the complement
//!   of `d` has odd size,
//! * `count_odd_inside(d)`: edges whose intersection with `d` itself has
//!   odd size (the quantity the edge-rate estimator consumes; it coincides
//!   with the odd-crossing count whenever the arity is even).
//!
//! Edges are kept in canonical form (strictly increasing vertex ids) and
//! indexed colexicographically, which is also the enumeration order of the
//! sampler and the counter layout of its random number stream.

use std::collections::HashSet;
use std::fmt;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::binom;

/// An m-uniform edge in canonical form: vertex ids strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalEdge {
    vertices: Vec<u32>,
}

impl CanonicalEdge {
    /// Builds an edge, enforcing canonical form. At least two vertices
    /// (unit edges carry no pairwise structure) and strict increase.
    pub fn new(vertices: Vec<u32>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidSet {
                what: "edge",
                detail: format!("{} vertices, need at least 2", vertices.len()),
            });
        }
        for w in vertices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidSet {
                    what: "edge",
                    detail: format!("vertices not strictly increasing at {} >= {}", w[0], w[1]),
                });
            }
        }
        Ok(CanonicalEdge { vertices })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn arity(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

impl fmt::Display for CanonicalEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Colexicographic rank of a canonical edge: `sum_k C(e_k, k+1)` over
/// 0-indexed positions. This is a bijection between m-subsets and
/// `0..C(num_vertices, m)` and doubles as the random-stream counter of the
/// edge slot in the sampler. Overflow beyond u64 (astronomically large
/// vertex counts) is reported, never wrapped.
pub fn colex_rank(edge: &CanonicalEdge) -> Result<u64> {
    let mut acc: u128 = 0;
    for (k, &v) in edge.vertices().iter().enumerate() {
        acc += binom(v as u64, k as u64 + 1)? as u128;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow {
        op: "colex_rank",
        detail: "rank exceeds u64".into(),
    })
}

/// Inverse of [`colex_rank`]: the m-subset at a given colex position.
pub fn colex_unrank(mut rank: u64, arity: usize) -> Result<CanonicalEdge> {
    if arity < 2 {
        return Err(Error::domain("colex_unrank", format!("arity {arity} < 2")));
    }
    let mut vertices = vec![0u32; arity];
    for k in (1..=arity as u64).rev() {
        // Greedy digit of the combinatorial number system: the largest v
        // with C(v, k) <= rank, found by walking C(v+1, k) = C(v, k) (v+1)/(v+1-k)
        // upward (exact division, see binom).
        let mut v = k - 1;
        let mut c = 0u64; // C(k-1, k)
        loop {
            let next = if v + 1 == k {
                1
            } else {
                ((c as u128 * (v as u128 + 1)) / (v as u128 + 1 - k as u128)) as u64
            };
            if next > rank {
                break;
            }
            v += 1;
            c = next;
        }
        rank -= c;
        vertices[k as usize - 1] = v as u32;
    }
    CanonicalEdge::new(vertices)
}

/// A set of vertices in canonical form (strictly increasing ids). Used for
/// candidate subsets `D` and planted supports `S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct VertexSet {
    members: Vec<u32>,
}

impl VertexSet {
    /// Builds a set from ids in any order; duplicates are an error.
    pub fn new(mut members: Vec<u32>) -> Result<Self> {
        members.sort_unstable();
        for w in members.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidSet {
                    what: "vertex set",
                    detail: format!("duplicate vertex {}", w[0]),
                });
            }
        }
        Ok(VertexSet { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn contains(&self, v: u32) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.members.iter().all(|&v| other.contains(v))
    }

    /// Errors unless every member id is below `num_vertices`.
    pub fn check_range(&self, num_vertices: u32) -> Result<()> {
        match self.members.last() {
            Some(&v) if v >= num_vertices => Err(Error::VertexOutOfRange {
                id: v,
                num_vertices,
            }),
            _ => Ok(()),
        }
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<u32>::deserialize(d)?;
        VertexSet::new(raw).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// An m-uniform hypergraph: a fixed vertex range, a fixed arity, and a set
/// of canonical edges with an incidence index.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    num_vertices: u32,
    arity: usize,
    edges: Vec<CanonicalEdge>,
    edge_set: HashSet<CanonicalEdge>,
    incidence: Vec<Vec<u32>>,
}

impl Hypergraph {
    /// Builds a graph from edges. Every edge must have the declared arity,
    /// vertex ids below `num_vertices`, and appear at most once.
    pub fn from_edges(
        num_vertices: u32,
        arity: usize,
        edges: Vec<CanonicalEdge>,
    ) -> Result<Self> {
        if arity < 2 {
            return Err(Error::domain("hypergraph", format!("arity {arity} < 2")));
        }
        if (num_vertices as usize) < arity {
            return Err(Error::domain(
                "hypergraph",
                format!("{num_vertices} vertices cannot host arity-{arity} edges"),
            ));
        }
        let mut edge_set = HashSet::with_capacity(edges.len());
        let mut incidence = vec![Vec::new(); num_vertices as usize];
        for (idx, e) in edges.iter().enumerate() {
            if e.arity() != arity {
                return Err(Error::InvalidSet {
                    what: "edge",
                    detail: format!("{e} has arity {}, graph has {arity}", e.arity()),
                });
            }
            if let Some(&v) = e.vertices().last() {
                if v >= num_vertices {
                    return Err(Error::VertexOutOfRange {
                        id: v,
                        num_vertices,
                    });
                }
            }
            if !edge_set.insert(e.clone()) {
                return Err(Error::InvalidSet {
                    what: "edge",
                    detail: format!("duplicate edge {e}"),
                });
            }
            for &v in e.vertices() {
                incidence[v as usize].push(idx as u32);
            }
        }
        Ok(Hypergraph {
            num_vertices,
            arity,
            edges,
            edge_set,
            incidence,
        })
    }

    pub fn num_vertices(&self) -> u32 {
        self.num_vertices
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn num_edges(&self) -> u64 {
        self.edges.len() as u64
    }

    pub fn edges(&self) -> &[CanonicalEdge] {
        &self.edges
    }

    pub fn has_edge(&self, e: &CanonicalEdge) -> bool {
        self.edge_set.contains(e)
    }

    pub fn degree(&self, v: u32) -> Result<u64> {
        if v >= self.num_vertices {
            return Err(Error::VertexOutOfRange {
                id: v,
                num_vertices: self.num_vertices,
            });
        }
        Ok(self.incidence[v as usize].len() as u64)
    }

    pub(crate) fn incidence(&self) -> &[Vec<u32>] {
        &self.incidence
    }

    fn membership_mask(&self, d: &VertexSet) -> Result<Vec<bool>> {
        d.check_range(self.num_vertices)?;
        let mut mask = vec![false; self.num_vertices as usize];
        for &v in d.members() {
            mask[v as usize] = true;
        }
        Ok(mask)
    }

    /// Internal edge count `A_D`: edges entirely inside `d`.
    ///
    /// Each qualifying edge is counted at its first vertex (which lies in
    /// `d` by definition), so the sweep over incidence lists never double
    /// counts. Cost is the total degree of `d` times the arity.
    pub fn count_internal_edges(&self, d: &VertexSet) -> Result<u64> {
        let mask = self.membership_mask(d)?;
        let mut count = 0u64;
        for &v in d.members() {
            for &ei in &self.incidence[v as usize] {
                let e = &self.edges[ei as usize];
                if e.vertices()[0] == v && e.vertices().iter().all(|&u| mask[u as usize]) {
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// Crossing count `A_{D,D^c}`: edges `e` with `|e intersect D^c|` odd.
    ///
    /// `d` must be a nonempty proper subset of the vertex range. Edges not
    /// touching `d` at all contribute exactly when the arity is odd.
    pub fn count_odd_crossing(&self, d: &VertexSet) -> Result<u64> {
        if d.is_empty() || d.len() >= self.num_vertices as usize {
            return Err(Error::domain(
                "count_odd_crossing",
                format!(
                    "d has {} of {} vertices, need a nonempty proper subset",
                    d.len(),
                    self.num_vertices
                ),
            ));
        }
        let (touching, odd_outside) = self.crossing_sweep(d)?;
        let untouched = self.edges.len() as u64 - touching;
        Ok(odd_outside + if self.arity % 2 == 1 { untouched } else { 0 })
    }

    /// Edges `e` with `|e intersect D|` odd. Agrees with
    /// [`count_odd_crossing`] for even arity; for odd arity the two counts
    /// partition differently and this one feeds the edge-rate estimator.
    pub fn count_odd_inside(&self, d: &VertexSet) -> Result<u64> {
        if d.is_empty() {
            return Err(Error::domain("count_odd_inside", "d is empty"));
        }
        let mask = self.membership_mask(d)?;
        let mut count = 0u64;
        for &v in d.members() {
            for &ei in &self.incidence[v as usize] {
                let e = &self.edges[ei as usize];
                // Attribute each touching edge to its first vertex inside d.
                let mut inside = 0usize;
                let mut first_inside = u32::MAX;
                for &u in e.vertices() {
                    if mask[u as usize] {
                        inside += 1;
                        if first_inside == u32::MAX {
                            first_inside = u;
                        }
                    }
                }
                if first_inside == v && inside % 2 == 1 {
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// Shared sweep: (#edges touching d, #touching edges with odd outside part).
    fn crossing_sweep(&self, d: &VertexSet) -> Result<(u64, u64)> {
        let mask = self.membership_mask(d)?;
        let mut touching = 0u64;
        let mut odd_outside = 0u64;
        for &v in d.members() {
            for &ei in &self.incidence[v as usize] {
                let e = &self.edges[ei as usize];
                let mut inside = 0usize;
                let mut first_inside = u32::MAX;
                for &u in e.vertices() {
                    if mask[u as usize] {
                        inside += 1;
                        if first_inside == u32::MAX {
                            first_inside = u;
                        }
                    }
                }
                if first_inside == v {
                    touching += 1;
                    if (self.arity - inside) % 2 == 1 {
                        odd_outside += 1;
                    }
                }
            }
        }
        Ok((touching, odd_outside))
    }
}

/// Reads an edge list from CSV. The header must be `v1,...,vm`, which fixes
/// the arity; every row must be a strictly increasing tuple of vertex ids
/// below `num_vertices`, with no duplicate rows. Errors carry line numbers.
pub fn load_edge_csv(path: &Path, num_vertices: u32) -> Result<Hypergraph> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error_for(path, &e))?;
    let headers = reader.headers().map_err(|e| csv_error_for(path, &e))?.clone();
    let arity = headers.len();
    for (i, name) in headers.iter().enumerate() {
        let want = format!("v{}", i + 1);
        if name != want {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                detail: format!("header column {} is {name:?}, expected {want:?}", i + 1),
            });
        }
    }
    if arity < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            detail: format!("{arity} columns, need at least v1,v2"),
        });
    }
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error_for(path, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != arity {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("{} fields, expected {arity}", record.len()),
            });
        }
        let mut vertices = Vec::with_capacity(arity);
        for field in record.iter() {
            let v: u32 = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("{field:?} is not a vertex id"),
            })?;
            if v >= num_vertices {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    detail: format!("vertex {v} out of range for {num_vertices} vertices"),
                });
            }
            vertices.push(v);
        }
        let edge = CanonicalEdge::new(vertices).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            detail: e.to_string(),
        })?;
        if !seen.insert(edge.clone()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                detail: format!("duplicate edge {edge}"),
            });
        }
        edges.push(edge);
    }
    Hypergraph::from_edges(num_vertices, arity, edges)
}

/// Writes the edge list as CSV with the `v1,...,vm` header, edges in their
/// stored order. Inverse of [`load_edge_csv`] up to edge order.
pub fn write_edge_csv(g: &Hypergraph, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
    );
    let header: Vec<String> = (1..=g.arity()).map(|i| format!("v{i}")).collect();
    writeln!(out, "{}", header.join(",")).map_err(|e| Error::io(path, e))?;
    for e in g.edges() {
        let row: Vec<String> = e.vertices().iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(",")).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub(crate) fn csv_error_for(path: &Path, e: &csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            detail: e.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(v: &[u32]) -> CanonicalEdge {
        CanonicalEdge::new(v.to_vec()).unwrap()
    }

    fn vset(v: &[u32]) -> VertexSet {
        VertexSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn canonical_edge_validation() {
        assert!(CanonicalEdge::new(vec![0, 1, 2]).is_ok());
        assert!(CanonicalEdge::new(vec![2, 1]).is_err());
        assert!(CanonicalEdge::new(vec![1, 1]).is_err());
        assert!(CanonicalEdge::new(vec![3]).is_err());
        assert!(CanonicalEdge::new(vec![]).is_err());
    }

    #[test]
    fn vertex_set_sorts_and_rejects_duplicates() {
        assert_eq!(vset(&[3, 1, 2]).members(), &[1, 2, 3]);
        assert!(VertexSet::new(vec![1, 2, 1]).is_err());
        assert!(vset(&[0, 5]).check_range(6).is_ok());
        assert!(vset(&[0, 5]).check_range(5).is_err());
    }

    #[test]
    fn colex_rank_examples() {
        // Pairs over small ids, ranks in colex order:
        // {0,1}=0, {0,2}=1, {1,2}=2, {0,3}=3, {1,3}=4, {2,3}=5
        let want: &[(&[u32], u64)] = &[
            (&[0, 1], 0),
            (&[0, 2], 1),
            (&[1, 2], 2),
            (&[0, 3], 3),
            (&[1, 3], 4),
            (&[2, 3], 5),
            (&[0, 1, 2], 0),
            (&[0, 1, 3], 1),
            (&[0, 2, 3], 2),
            (&[1, 2, 3], 3),
            (&[0, 1, 4], 4),
            (&[1, 2, 4], 6),
        ];
        for &(vs, r) in want {
            assert_eq!(colex_rank(&edge(vs)).unwrap(), r, "edge {vs:?}");
        }
    }

    #[test]
    fn colex_rank_unrank_bijection() {
        for arity in [2usize, 3, 4] {
            let total = binom(8, arity as u64).unwrap();
            let mut seen = HashSet::new();
            for rank in 0..total {
                let e = colex_unrank(rank, arity).unwrap();
                assert!(e.vertices().iter().all(|&v| v < 8));
                assert_eq!(colex_rank(&e).unwrap(), rank);
                assert!(seen.insert(e));
            }
            assert_eq!(seen.len() as u64, total);
        }
    }

    #[test]
    fn graph_construction_rejects_bad_edges() {
        let ok = Hypergraph::from_edges(5, 2, vec![edge(&[0, 1]), edge(&[1, 4])]);
        assert!(ok.is_ok());
        assert!(Hypergraph::from_edges(5, 2, vec![edge(&[0, 1, 2])]).is_err());
        assert!(Hypergraph::from_edges(3, 2, vec![edge(&[0, 3])]).is_err());
        assert!(Hypergraph::from_edges(5, 2, vec![edge(&[0, 1]), edge(&[0, 1])]).is_err());
        assert!(Hypergraph::from_edges(2, 3, vec![]).is_err());
    }

    #[test]
    fn counts_on_a_worked_triangle_example() {
        // Pairs on 5 vertices: a triangle {0,1,2} plus spokes {0,3}, {2,4}.
        let g = Hypergraph::from_edges(
            5,
            2,
            vec![
                edge(&[0, 1]),
                edge(&[0, 2]),
                edge(&[1, 2]),
                edge(&[0, 3]),
                edge(&[2, 4]),
            ],
        )
        .unwrap();
        let d = vset(&[0, 1, 2]);
        assert_eq!(g.count_internal_edges(&d).unwrap(), 3);
        // Odd outside part = exactly the two spokes.
        assert_eq!(g.count_odd_crossing(&d).unwrap(), 2);
        // For pairs, odd inside = odd outside = the cut.
        assert_eq!(g.count_odd_inside(&d).unwrap(), 2);
        assert_eq!(g.degree(0).unwrap(), 3);
        assert_eq!(g.degree(4).unwrap(), 1);
        assert!(g.degree(5).is_err());
    }

    #[test]
    fn counts_on_a_worked_triple_example() {
        // Triples on 6 vertices.
        let g = Hypergraph::from_edges(
            6,
            3,
            vec![
                edge(&[0, 1, 2]), // inside D
                edge(&[0, 1, 3]), // 1 outside: odd crossing, even(2) inside? |e cap D|=2 even
                edge(&[0, 3, 4]), // 2 outside: even crossing, odd inside (1)
                edge(&[3, 4, 5]), // disjoint from D: |outside|=3 odd
            ],
        )
        .unwrap();
        let d = vset(&[0, 1, 2]);
        assert_eq!(g.count_internal_edges(&d).unwrap(), 1);
        // Odd |e cap D^c|: {0,1,3} (1 outside), {3,4,5} (3 outside).
        assert_eq!(g.count_odd_crossing(&d).unwrap(), 2);
        // Odd |e cap D|: {0,1,2} (3 inside), {0,3,4} (1 inside).
        assert_eq!(g.count_odd_inside(&d).unwrap(), 2);
    }

    #[test]
    fn crossing_requires_proper_nonempty_subset() {
        let g = Hypergraph::from_edges(4, 2, vec![edge(&[0, 1])]).unwrap();
        assert!(g.count_odd_crossing(&vset(&[])).is_err());
        assert!(g.count_odd_crossing(&vset(&[0, 1, 2, 3])).is_err());
        assert!(g.count_odd_inside(&vset(&[])).is_err());
        assert!(g.count_internal_edges(&vset(&[])).is_ok());
    }

    /// Brute-force oracles over the full edge list.
    fn oracle_counts(g: &Hypergraph, d: &VertexSet) -> (u64, u64, u64) {
        let mut internal = 0;
        let mut odd_cross = 0;
        let mut odd_in = 0;
        for e in g.edges() {
            let inside = e.vertices().iter().filter(|&&v| d.contains(v)).count();
            let outside = e.arity() - inside;
            if inside == e.arity() {
                internal += 1;
            }
            if outside % 2 == 1 {
                odd_cross += 1;
            }
            if inside % 2 == 1 {
                odd_in += 1;
            }
        }
        (internal, odd_cross, odd_in)
    }

    #[test]
    fn counts_match_bruteforce_on_random_graphs() {
        // Deterministic LCG-driven graphs, several arities and subsets.
        let mut state = 0x1234_5678_u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            state
        };
        for arity in [2usize, 3, 4] {
            for n in [6u32, 9] {
                let total = binom(n as u64, arity as u64).unwrap();
                let edges: Vec<CanonicalEdge> = (0..total)
                    .filter(|_| next() % 100 < 35)
                    .map(|r| colex_unrank(r, arity).unwrap())
                    .collect();
                // colex_unrank yields distinct edges for distinct ranks, but
                // the filter above drops ranks, so re-rank to stay canonical.
                let g = Hypergraph::from_edges(n, arity, edges).unwrap();
                for _ in 0..8 {
                    let size = 1 + (next() % (n as u64 - 1)) as usize;
                    let mut pool: Vec<u32> = (0..n).collect();
                    for i in 0..size {
                        let j = i + (next() % (n as usize - i) as u64) as usize;
                        pool.swap(i, j);
                    }
                    let d = VertexSet::new(pool[..size].to_vec()).unwrap();
                    let (internal, odd_cross, odd_in) = oracle_counts(&g, &d);
                    assert_eq!(g.count_internal_edges(&d).unwrap(), internal);
                    if d.len() < n as usize {
                        assert_eq!(g.count_odd_crossing(&d).unwrap(), odd_cross);
                    }
                    assert_eq!(g.count_odd_inside(&d).unwrap(), odd_in);
                    // Parity partition sanity: odd-in and even-in partition E.
                    let even_in = g.num_edges() - odd_in;
                    assert!(even_in <= g.num_edges());
                }
            }
        }
    }

    #[test]
    fn odd_counts_agree_for_even_arity() {
        let mut state = 99u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            state
        };
        for arity in [2usize, 4] {
            let n = 8u32;
            let total = binom(n as u64, arity as u64).unwrap();
            let edges: Vec<CanonicalEdge> = (0..total)
                .filter(|_| next() % 100 < 40)
                .map(|r| colex_unrank(r, arity).unwrap())
                .collect();
            let g = Hypergraph::from_edges(n, arity, edges).unwrap();
            for size in 1..n as usize {
                let d = VertexSet::new((0..size as u32).collect()).unwrap();
                assert_eq!(
                    g.count_odd_crossing(&d).unwrap(),
                    g.count_odd_inside(&d).unwrap(),
                    "arity {arity}, size {size}"
                );
            }
        }
    }

    #[test]
    fn edge_csv_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.csv");
        let g = Hypergraph::from_edges(
            6,
            3,
            vec![edge(&[0, 1, 2]), edge(&[1, 2, 5]), edge(&[0, 4, 5])],
        )
        .unwrap();
        write_edge_csv(&g, &path).unwrap();
        let back = load_edge_csv(&path, 6).unwrap();
        assert_eq!(back.num_vertices(), 6);
        assert_eq!(back.arity(), 3);
        assert_eq!(back.edges(), g.edges());

        std::fs::write(&path, "v1,v2\n0,1\n2,1\n").unwrap();
        let err = load_edge_csv(&path, 6).unwrap_err().to_string();
        assert!(err.contains(":3:"), "want line 3 in {err}");

        std::fs::write(&path, "v1,v2\n0,1\n0,1\n").unwrap();
        assert!(load_edge_csv(&path, 6)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));

        std::fs::write(&path, "a,b\n0,1\n").unwrap();
        assert!(load_edge_csv(&path, 6).is_err());

        std::fs::write(&path, "v1,v2\n0,9\n").unwrap();
        assert!(load_edge_csv(&path, 6).is_err());
    }
}
