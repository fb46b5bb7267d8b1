//! The 3-graph representation, degree queries, link graphs and the
//! validators every constructive routine is checked against.
//!
//! Vertices are the integers `1..=n`. The integer value of a vertex matters:
//! the Posa-type condition compares pair degrees with vertex labels, so any
//! relabelling (see [`Hypergraph3::induced_subhypergraph`]) preserves order.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::{words_for, Ones, VertexSet};

pub type Vertex = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypergraphError {
    #[error("a 3-graph needs at least 3 vertices, got n = {0}")]
    TooFewVertices(usize),
    #[error("vertex {vertex} is outside 1..={n}")]
    OutOfRange { vertex: Vertex, n: usize },
    #[error("degenerate triple {0:?}: repeated vertex")]
    DegenerateTriple([Vertex; 3]),
    #[error("({0}, {0}) is not a pair of distinct vertices")]
    SameVertex(Vertex),
    #[error("alpha must lie in (0, 1/2), got {0}")]
    InvalidAlpha(f64),
    #[error("a tight cycle needs at least 4 vertices, got {0}")]
    CycleTooShort(usize),
    #[error("need at least 3 kept vertices, got {0}")]
    KeepTooSmall(usize),
}

pub type Result<T> = std::result::Result<T, HypergraphError>;

/// `floor(x * n)` with a small tolerance so that decimal inputs such as
/// `0.3 * 10` do not drop to the integer below.
pub fn scaled_floor(x: f64, n: usize) -> usize {
    let v = x * n as f64 + 1e-9;
    if v <= 0.0 {
        0
    } else {
        v.floor() as usize
    }
}

/// Required pair degree `min(i, j, floor(n/2)) + floor(alpha n)`.
pub fn posa_requirement(i: Vertex, j: Vertex, n: usize, alpha: f64) -> usize {
    i.min(j).min(n / 2) + scaled_floor(alpha, n)
}

fn sort3(t: [Vertex; 3]) -> [Vertex; 3] {
    let mut t = t;
    t.sort_unstable();
    t
}

/// A 3-uniform hypergraph on `1..=n`, immutable after construction.
///
/// Besides the sorted edge list, every ordered pair `(i, j)` owns a bitset of
/// its common neighbours, so edge membership, pair degrees and candidate
/// extensions of a tight path are word operations.
#[derive(Clone)]
pub struct Hypergraph3 {
    n: usize,
    words: usize,
    edges: Vec<[Vertex; 3]>,
    pair_nbrs: Vec<u64>,
}

impl Hypergraph3 {
    /// Builds a 3-graph, collapsing duplicate triples.
    pub fn new<I>(n: usize, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = [Vertex; 3]>,
    {
        if n < 3 {
            return Err(HypergraphError::TooFewVertices(n));
        }
        let mut set = BTreeSet::new();
        for t in triples {
            for &v in &t {
                if v == 0 || v > n {
                    return Err(HypergraphError::OutOfRange { vertex: v, n });
                }
            }
            let s = sort3(t);
            if s[0] == s[1] || s[1] == s[2] {
                return Err(HypergraphError::DegenerateTriple(t));
            }
            set.insert(s);
        }
        Ok(Self::from_sorted_unique(n, set.into_iter().collect()))
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    /// `edges` must be sorted, duplicate-free, with each triple sorted and in range.
    pub(crate) fn from_sorted_unique(n: usize, edges: Vec<[Vertex; 3]>) -> Self {
        let words = words_for(n);
        let mut pair_nbrs = vec![0u64; (n + 1) * (n + 1) * words];
        let mut set = |i: usize, j: usize, v: usize| {
            let base = (i * (n + 1) + j) * words;
            pair_nbrs[base + v / 64] |= 1 << (v % 64);
        };
        for &[a, b, c] in &edges {
            set(a, b, c);
            set(b, a, c);
            set(a, c, b);
            set(c, a, b);
            set(b, c, a);
            set(c, b, a);
        }
        Hypergraph3 {
            n,
            words,
            edges,
            pair_nbrs,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted list of sorted triples.
    pub fn edges(&self) -> &[[Vertex; 3]] {
        &self.edges
    }

    pub fn vertices(&self) -> std::ops::RangeInclusive<Vertex> {
        1..=self.n
    }

    #[inline]
    fn in_range(&self, v: Vertex) -> bool {
        v >= 1 && v <= self.n
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if self.in_range(v) {
            Ok(())
        } else {
            Err(HypergraphError::OutOfRange { vertex: v, n: self.n })
        }
    }

    /// Common neighbours of `i` and `j` as a word slice (bit `x` set iff `ijx`
    /// is an edge). Both vertices must be in range.
    #[inline]
    pub fn neighbors(&self, i: Vertex, j: Vertex) -> &[u64] {
        let base = (i * (self.n + 1) + j) * self.words;
        &self.pair_nbrs[base..base + self.words]
    }

    pub fn neighbor_set(&self, i: Vertex, j: Vertex) -> VertexSet {
        VertexSet::from_words(self.neighbors(i, j))
    }

    pub fn neighbor_iter(&self, i: Vertex, j: Vertex) -> Ones<'_> {
        Ones::new(self.neighbors(i, j))
    }

    /// Edge membership; `false` for repeated or out-of-range vertices.
    #[inline]
    pub fn has_edge(&self, a: Vertex, b: Vertex, c: Vertex) -> bool {
        if !(self.in_range(a) && self.in_range(b) && self.in_range(c)) || a == b {
            return false;
        }
        self.neighbors(a, b)[c / 64] >> (c % 64) & 1 == 1
    }

    pub fn pair_degree(&self, i: Vertex, j: Vertex) -> Result<usize> {
        self.check(i)?;
        self.check(j)?;
        if i == j {
            return Err(HypergraphError::SameVertex(i));
        }
        Ok(self.codegree(i, j))
    }

    /// Unchecked pair degree for hot loops.
    #[inline]
    pub(crate) fn codegree(&self, i: Vertex, j: Vertex) -> usize {
        self.neighbors(i, j).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn vertex_degree(&self, v: Vertex) -> Result<usize> {
        self.check(v)?;
        Ok(self.edges.iter().filter(|e| e.contains(&v)).count())
    }

    pub fn link_graph(&self, v: Vertex) -> Result<LinkGraph> {
        self.check(v)?;
        let mut pairs = Vec::new();
        for x in 1..=self.n {
            if x == v {
                continue;
            }
            for y in self.neighbor_iter(v, x) {
                if y > x {
                    pairs.push((x, y));
                }
            }
        }
        Ok(LinkGraph { center: v, pairs })
    }

    pub fn degree_matrix(&self) -> DegreeMatrix {
        DegreeMatrix::from_fn(self.n, |i, j| self.codegree(i, j))
    }

    /// The subgraph induced on `keep`, relabelled to `1..=|keep|` in
    /// increasing order of the original labels.
    pub fn induced_subhypergraph<I>(&self, keep: I) -> Result<(Hypergraph3, LabelMap)>
    where
        I: IntoIterator<Item = Vertex>,
    {
        let mut kept: Vec<Vertex> = keep.into_iter().collect();
        for &v in &kept {
            self.check(v)?;
        }
        kept.sort_unstable();
        kept.dedup();
        if kept.len() < 3 {
            return Err(HypergraphError::KeepTooSmall(kept.len()));
        }
        let mut old_to_new = vec![0usize; self.n + 1];
        for (idx, &v) in kept.iter().enumerate() {
            old_to_new[v] = idx + 1;
        }
        // relabelling is monotone, so sorted input stays sorted
        let edges: Vec<[Vertex; 3]> = self
            .edges
            .iter()
            .filter_map(|&[a, b, c]| {
                let (x, y, z) = (old_to_new[a], old_to_new[b], old_to_new[c]);
                (x != 0 && y != 0 && z != 0).then_some([x, y, z])
            })
            .collect();
        let sub = Hypergraph3::from_sorted_unique(kept.len(), edges);
        Ok((
            sub,
            LabelMap {
                new_to_old: kept,
                old_to_new,
            },
        ))
    }
}

impl PartialEq for Hypergraph3 {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Hypergraph3 {}

impl fmt::Debug for Hypergraph3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hypergraph3 {{ n: {}, e: {} }}", self.n, self.edges.len())
    }
}

/// Old/new label correspondence produced by [`Hypergraph3::induced_subhypergraph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    new_to_old: Vec<Vertex>,
    old_to_new: Vec<Vertex>,
}

impl LabelMap {
    pub fn to_old(&self, new: Vertex) -> Vertex {
        self.new_to_old[new - 1]
    }

    pub fn to_new(&self, old: Vertex) -> Option<Vertex> {
        match self.old_to_new.get(old) {
            Some(&v) if v != 0 => Some(v),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.new_to_old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.new_to_old.is_empty()
    }
}

/// An ordered pair of distinct vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[Vertex; 2]", into = "[Vertex; 2]")]
pub struct OrderedPair {
    pub first: Vertex,
    pub second: Vertex,
}

impl OrderedPair {
    pub fn new(first: Vertex, second: Vertex) -> Result<Self> {
        if first == second {
            return Err(HypergraphError::SameVertex(first));
        }
        Ok(OrderedPair { first, second })
    }

    pub fn reversed(self) -> Self {
        OrderedPair {
            first: self.second,
            second: self.first,
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.first == v || self.second == v
    }

    pub fn is_disjoint(&self, other: &OrderedPair) -> bool {
        !other.contains(self.first) && !other.contains(self.second)
    }
}

impl TryFrom<[Vertex; 2]> for OrderedPair {
    type Error = HypergraphError;
    fn try_from(v: [Vertex; 2]) -> Result<Self> {
        OrderedPair::new(v[0], v[1])
    }
}

impl From<OrderedPair> for [Vertex; 2] {
    fn from(p: OrderedPair) -> Self {
        [p.first, p.second]
    }
}

impl fmt::Display for OrderedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

/// A vertex sequence meant to be a tight path. Validity against a host is
/// established only by [`validate_tight_path`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TightPath {
    vertices: Vec<Vertex>,
}

impl TightPath {
    pub fn new(vertices: Vec<Vertex>) -> Self {
        TightPath { vertices }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }

    /// Number of edges, i.e. vertex count minus two.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(2)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Panics on sequences shorter than two vertices.
    pub fn start_pair(&self) -> OrderedPair {
        OrderedPair {
            first: self.vertices[0],
            second: self.vertices[1],
        }
    }

    /// Panics on sequences shorter than two vertices.
    pub fn end_pair(&self) -> OrderedPair {
        let k = self.vertices.len();
        OrderedPair {
            first: self.vertices[k - 2],
            second: self.vertices[k - 1],
        }
    }

    pub fn internal(&self) -> &[Vertex] {
        let k = self.vertices.len();
        if k <= 4 {
            &[]
        } else {
            &self.vertices[2..k - 2]
        }
    }

    pub fn reversed(&self) -> TightPath {
        let mut v = self.vertices.clone();
        v.reverse();
        TightPath { vertices: v }
    }

    pub fn vertex_set(&self) -> BTreeSet<Vertex> {
        self.vertices.iter().copied().collect()
    }
}

/// A cyclic vertex sequence; rotations and reflections denote the same cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TightCycle {
    vertices: Vec<Vertex>,
}

impl TightCycle {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(HypergraphError::CycleTooShort(vertices.len()));
        }
        Ok(TightCycle { vertices })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Rotate so the minimum vertex comes first, then pick the direction
    /// whose second vertex is smaller.
    pub fn canonical(&self) -> TightCycle {
        let k = self.vertices.len();
        let (pos, _) = self
            .vertices
            .iter()
            .enumerate()
            .min_by_key(|&(_, v)| *v)
            .expect("cycle is nonempty");
        let next = self.vertices[(pos + 1) % k];
        let prev = self.vertices[(pos + k - 1) % k];
        let vertices = if next <= prev {
            (0..k).map(|t| self.vertices[(pos + t) % k]).collect()
        } else {
            (0..k).map(|t| self.vertices[(pos + k - t) % k]).collect()
        };
        TightCycle { vertices }
    }

    pub fn same_cycle(&self, other: &TightCycle) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn vertex_set(&self) -> BTreeSet<Vertex> {
        self.vertices.iter().copied().collect()
    }
}

/// A vertex sequence whose consecutive triples are edges; repeats allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TightWalk {
    vertices: Vec<Vertex>,
}

impl TightWalk {
    pub fn new(vertices: Vec<Vertex>) -> Self {
        TightWalk { vertices }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(2)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn is_path(&self) -> bool {
        let set: BTreeSet<_> = self.vertices.iter().collect();
        set.len() == self.vertices.len()
    }
}

/// Outcome of a validator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    MissingEdge([Vertex; 3]),
    RepeatedVertex(Vertex),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

fn first_repeat(h: &Hypergraph3, seq: &[Vertex]) -> Result<Option<Vertex>> {
    let mut seen = VertexSet::new(h.n());
    for &v in seq {
        h.check(v)?;
        if !seen.insert(v) {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// Checks that every three consecutive vertices form an edge and that all
/// vertices are distinct. Sequences of two vertices validate vacuously.
pub fn validate_tight_path(h: &Hypergraph3, p: &TightPath) -> Result<Verdict> {
    let seq = p.vertices();
    if let Some(v) = first_repeat(h, seq)? {
        return Ok(Verdict::RepeatedVertex(v));
    }
    for w in seq.windows(3) {
        if !h.has_edge(w[0], w[1], w[2]) {
            return Ok(Verdict::MissingEdge([w[0], w[1], w[2]]));
        }
    }
    Ok(Verdict::Valid)
}

/// Like [`validate_tight_path`] but without the distinctness requirement.
pub fn validate_tight_walk(h: &Hypergraph3, w: &TightWalk) -> Result<Verdict> {
    for &v in w.vertices() {
        h.check(v)?;
    }
    for t in w.vertices().windows(3) {
        if !h.has_edge(t[0], t[1], t[2]) {
            return Ok(Verdict::MissingEdge([t[0], t[1], t[2]]));
        }
    }
    Ok(Verdict::Valid)
}

/// Checks all cyclic consecutive triples, wrap-arounds included.
pub fn validate_tight_cycle(h: &Hypergraph3, c: &TightCycle) -> Result<Verdict> {
    let seq = c.vertices();
    let k = seq.len();
    if k < 4 {
        return Err(HypergraphError::CycleTooShort(k));
    }
    if let Some(v) = first_repeat(h, seq)? {
        return Ok(Verdict::RepeatedVertex(v));
    }
    for i in 0..k {
        let (a, b, c) = (seq[i], seq[(i + 1) % k], seq[(i + 2) % k]);
        if !h.has_edge(a, b, c) {
            return Ok(Verdict::MissingEdge([a, b, c]));
        }
    }
    Ok(Verdict::Valid)
}

/// True iff `c` is a tight cycle through every vertex of `h`.
pub fn is_hamiltonian_cycle(h: &Hypergraph3, c: &TightCycle) -> bool {
    c.len() == h.n() && matches!(validate_tight_cycle(h, c), Ok(Verdict::Valid))
}

/// Symmetric pair-indexed matrix; the diagonal is ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeMatrix {
    n: usize,
    entries: Vec<usize>,
}

impl DegreeMatrix {
    pub fn zeros(n: usize) -> Self {
        DegreeMatrix {
            n,
            entries: vec![0; (n + 1) * (n + 1)],
        }
    }

    pub fn from_fn<F: FnMut(Vertex, Vertex) -> usize>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 1..=n {
            for j in i + 1..=n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: Vertex, j: Vertex) -> usize {
        self.entries[i * (self.n + 1) + j]
    }

    pub fn set(&mut self, i: Vertex, j: Vertex, v: usize) {
        let n1 = self.n + 1;
        self.entries[i * n1 + j] = v;
        self.entries[j * n1 + i] = v;
    }

    /// Pairs `(i, j)` with `i < j` where `h` falls short of the matrix.
    pub fn shortfalls(&self, h: &Hypergraph3) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for i in 1..=self.n {
            for j in i + 1..=self.n {
                if h.codegree(i, j) < self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// True iff `d_h(i, j) >= d_ij` for all pairs.
    pub fn is_dominated_by(&self, h: &Hypergraph3) -> bool {
        h.n() == self.n && self.shortfalls(h).is_empty()
    }
}

/// The graph of pairs `xy` with `xyv` an edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkGraph {
    pub center: Vertex,
    pub pairs: Vec<(Vertex, Vertex)>,
}

impl LinkGraph {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, x: Vertex, y: Vertex) -> bool {
        let p = if x < y { (x, y) } else { (y, x) };
        self.pairs.binary_search(&p).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosaViolation {
    pub i: Vertex,
    pub j: Vertex,
    pub degree: usize,
    pub required: usize,
    pub deficit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosaReport {
    pub alpha: f64,
    pub holds: bool,
    pub violations: Vec<PosaViolation>,
}

/// Checks `d(i, j) >= min(i, j, floor(n/2)) + floor(alpha n)` for all pairs.
pub fn check_posa_condition(h: &Hypergraph3, alpha: f64) -> Result<PosaReport> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(HypergraphError::InvalidAlpha(alpha));
    }
    let n = h.n();
    let mut violations = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            let degree = h.codegree(i, j);
            let required = posa_requirement(i, j, n, alpha);
            if degree < required {
                violations.push(PosaViolation {
                    i,
                    j,
                    degree,
                    required,
                    deficit: required - degree,
                });
            }
        }
    }
    Ok(PosaReport {
        alpha,
        holds: violations.is_empty(),
        violations,
    })
}
