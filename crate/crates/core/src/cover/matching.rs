use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::hypergraph::{Hypergraph3, Vertex};

/// Unordered vertex pairs, stored as `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSet(BTreeSet<(Vertex, Vertex)>);

impl PairSet {
    pub fn new() -> Self {
        PairSet(BTreeSet::new())
    }

    pub fn insert(&mut self, a: Vertex, b: Vertex) -> bool {
        self.0.insert((a.min(b), a.max(b)))
    }

    pub fn contains(&self, a: Vertex, b: Vertex) -> bool {
        self.0.contains(&(a.min(b), a.max(b)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.0.iter().copied()
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = std::collections::HashMap::new();
        for &(a, b) in &self.0 {
            *deg.entry(a).or_insert(0usize) += 1;
            *deg.entry(b).or_insert(0usize) += 1;
        }
        deg.values().copied().max().unwrap_or(0)
    }
}

impl FromIterator<(Vertex, Vertex)> for PairSet {
    fn from_iter<I: IntoIterator<Item = (Vertex, Vertex)>>(iter: I) -> Self {
        let mut s = PairSet::new();
        for (a, b) in iter {
            s.insert(a, b);
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    /// Sorted triples, kept in increasing order.
    pub edges: Vec<[Vertex; 3]>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `v(M) = 3 |M|`.
    pub fn vertex_count(&self) -> usize {
        3 * self.edges.len()
    }

    pub fn vertex_set(&self, n: usize) -> VertexSet {
        VertexSet::from_iter_with(n, self.edges.iter().flatten().copied())
    }

    /// Every triple is an edge of `h` and the triples are pairwise disjoint.
    pub fn is_valid(&self, h: &Hypergraph3) -> bool {
        let mut seen = VertexSet::new(h.n());
        self.edges.iter().all(|&[a, b, c]| {
            [a, b, c].iter().all(|&v| v >= 1 && v <= h.n())
                && h.has_edge(a, b, c)
                && seen.insert(a)
                && seen.insert(b)
                && seen.insert(c)
        })
    }

    /// No edge of `h` avoids `V(M)`.
    pub fn is_maximal(&self, h: &Hypergraph3) -> bool {
        let used = self.vertex_set(h.n());
        h.edges().iter().all(|e| e.iter().any(|&v| used.contains(v)))
    }

    fn normalize(&mut self) {
        for e in &mut self.edges {
            e.sort_unstable();
        }
        self.edges.sort_unstable();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingReport {
    pub matching: Matching,
    /// `v(M)`.
    pub covered: usize,
    pub n: usize,
    pub max_excluded_degree: usize,
}

impl MatchingReport {
    pub fn coverage(&self) -> f64 {
        self.covered as f64 / self.n as f64
    }
}

/// A single improvement step of the local search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Move {
    /// An edge disjoint from the matching.
    Add { edge: [Vertex; 3] },
    /// Replace `old` by `x v w` and `y p q` where `v w`, `p q` are leftover
    /// non-excluded pairs.
    Augment {
        old: [Vertex; 3],
        first: [Vertex; 3],
        second: [Vertex; 3],
    },
    /// Replace `old` by `x v w` for a leftover non-excluded pair `v < w`
    /// with `v` below the two vertices of `old` that become free.
    Swap { old: [Vertex; 3], new: [Vertex; 3] },
}

fn sorted(mut t: [Vertex; 3]) -> [Vertex; 3] {
    t.sort_unstable();
    t
}

/// Leftover pairs `v < w` not in `excluded`, listed once.
fn true_pairs(leftover: &[Vertex], excluded: &PairSet) -> Vec<(Vertex, Vertex)> {
    let mut out = Vec::new();
    for (i, &v) in leftover.iter().enumerate() {
        for &w in &leftover[i + 1..] {
            if !excluded.contains(v, w) {
                out.push((v, w));
            }
        }
    }
    out
}

/// The first applicable move in the fixed order add, augment, swap, or
/// `None` if the matching is a local optimum.
pub fn find_improving_move(h: &Hypergraph3, m: &Matching, excluded: &PairSet) -> Option<Move> {
    let n = h.n();
    let used = m.vertex_set(n);
    if let Some(&e) = h.edges().iter().find(|e| e.iter().all(|&v| !used.contains(v))) {
        return Some(Move::Add { edge: e });
    }
    let leftover: Vec<Vertex> = (1..=n).filter(|&v| !used.contains(v)).collect();
    let pairs = true_pairs(&leftover, excluded);
    if pairs.is_empty() {
        return None;
    }
    for &old in &m.edges {
        // pairs completed to an edge by each vertex of `old`
        let hits: Vec<Vec<(Vertex, Vertex)>> = old
            .iter()
            .map(|&x| pairs.iter().copied().filter(|&(v, w)| h.has_edge(x, v, w)).collect())
            .collect();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                for &(v, w) in &hits[i] {
                    if let Some(&(p, q)) = hits[j].iter().find(|&&(p, q)| p != v && p != w && q != v && q != w) {
                        return Some(Move::Augment {
                            old,
                            first: sorted([old[i], v, w]),
                            second: sorted([old[j], p, q]),
                        });
                    }
                }
            }
        }
    }
    for &old in &m.edges {
        for i in 0..3 {
            let rest: Vec<Vertex> = (0..3).filter(|&k| k != i).map(|k| old[k]).collect();
            let low = rest[0].min(rest[1]);
            if let Some(&(v, w)) = pairs.iter().find(|&&(v, w)| v < low && h.has_edge(old[i], v, w)) {
                return Some(Move::Swap {
                    old,
                    new: sorted([old[i], v, w]),
                });
            }
        }
    }
    None
}

fn apply(m: &mut Matching, mv: &Move) {
    match mv {
        Move::Add { edge } => m.edges.push(*edge),
        Move::Augment { old, first, second } => {
            m.edges.retain(|e| e != old);
            m.edges.push(*first);
            m.edges.push(*second);
        }
        Move::Swap { old, new } => {
            m.edges.retain(|e| e != old);
            m.edges.push(*new);
        }
    }
    m.normalize();
}

/// Runs the improvement moves on `m` until none applies.
pub fn improve_matching(h: &Hypergraph3, mut m: Matching, excluded: &PairSet) -> Matching {
    m.normalize();
    while let Some(mv) = find_improving_move(h, &m, excluded) {
        log::trace!("matching move {mv:?}");
        apply(&mut m, &mv);
    }
    m
}

fn greedy(h: &Hypergraph3, order: &[usize]) -> Matching {
    let mut m = Matching::default();
    let mut used = VertexSet::new(h.n());
    for &k in order {
        let [a, b, c] = h.edges()[k];
        if !used.contains(a) && !used.contains(b) && !used.contains(c) {
            used.insert(a);
            used.insert(b);
            used.insert(c);
            m.edges.push([a, b, c]);
        }
    }
    m
}

/// Greedy starts tried by [`find_large_matching`]: edge order, then shuffles.
pub const MATCHING_STARTS: usize = 8;

/// A matching that is maximal and admits none of the improvement moves:
/// adding a disjoint edge, augmenting one edge into two through leftover
/// pairs, or swapping one edge for another so that the leftover set grows
/// lexicographically (the leftover set `A` beats `B` when
/// `min(A symmetric-difference B)` lies in `B`).
///
/// Pairs in `excluded` are never used by the augment and swap moves. Each
/// move strictly increases `(|M|, leftover)`, so every search terminates.
/// The search is run from [`MATCHING_STARTS`] greedy matchings (edge order
/// first, then fixed-seed shuffles) and the first largest result is kept.
pub fn find_large_matching(h: &Hypergraph3, excluded: &PairSet, alpha: f64, beta: f64) -> MatchingReport {
    let n = h.n();
    let max_excluded_degree = excluded.max_degree();
    if max_excluded_degree as f64 > beta * n as f64 {
        log::warn!(
            "excluded pairs have maximum degree {max_excluded_degree} > beta n = {:.2}",
            beta * n as f64
        );
    }
    log::debug!("matching search with alpha = {alpha}, beta = {beta} on n = {n}");
    let mut order: Vec<usize> = (0..h.edge_count()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let mut best = improve_matching(h, greedy(h, &order), excluded);
    for _ in 1..MATCHING_STARTS {
        if 3 * (best.len() + 1) > n {
            break;
        }
        order.shuffle(&mut rng);
        let m = improve_matching(h, greedy(h, &order), excluded);
        if m.len() > best.len() {
            best = m;
        }
    }
    MatchingReport {
        covered: best.vertex_count(),
        matching: best,
        n,
        max_excluded_degree,
    }
}
