use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CoverError, CoverParams};
use crate::bitset::VertexSet;
use crate::hypergraph::{Hypergraph3, TightPath, Vertex};

/// Three disjoint vertex classes of a host; only edges meeting each class
/// once ("crossing" edges) are seen through the view.
#[derive(Debug, Clone)]
pub struct TripartiteView<'a> {
    host: &'a Hypergraph3,
    parts: [Vec<Vertex>; 3],
    masks: [VertexSet; 3],
}

impl<'a> TripartiteView<'a> {
    pub fn new(host: &'a Hypergraph3, u: Vec<Vertex>, v: Vec<Vertex>, w: Vec<Vertex>) -> Result<Self, CoverError> {
        let n = host.n();
        let mut parts = [u, v, w];
        let mut all = VertexSet::new(n);
        for p in parts.iter_mut() {
            p.sort_unstable();
            if p.is_empty() {
                return Err(CoverError::BadParts);
            }
            for &x in p.iter() {
                if x == 0 || x > n || !all.insert(x) {
                    return Err(CoverError::BadParts);
                }
            }
        }
        let masks = parts.clone().map(|p| VertexSet::from_iter_with(n, p.iter().copied()));
        Ok(TripartiteView { host, parts, masks })
    }

    pub fn host(&self) -> &Hypergraph3 {
        self.host
    }

    pub fn parts(&self) -> &[Vec<Vertex>; 3] {
        &self.parts
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.parts[0].len(), self.parts[1].len(), self.parts[2].len()]
    }

    /// Crossing edges with one vertex in each of `a`, `b`, `c`
    /// (subsets of the three classes, in order).
    pub fn crossing_count(&self, a: &[Vertex], b: &[Vertex], c: &VertexSet) -> usize {
        let mut total = 0;
        for &x in a {
            for &y in b {
                total += crate::bitset::and_count(self.host.neighbors(x, y), c.words());
            }
        }
        total
    }

    /// All crossing edges.
    pub fn crossing_edges(&self) -> usize {
        self.crossing_count(&self.parts[0], &self.parts[1], &self.masks[2])
    }

    /// Crossing edges divided by the product of the class sizes.
    pub fn density(&self) -> f64 {
        let [a, b, c] = self.sizes();
        self.crossing_edges() as f64 / (a * b * c) as f64
    }

    fn class_of(&self, v: Vertex) -> Option<usize> {
        (0..3).find(|&k| self.masks[k].contains(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuasiMode {
    Exact,
    Sampled { k: usize, seed: u64 },
}

/// For subsets `U1`, `U2` the deviation is maximized over `U3` by taking
/// either all third-class vertices with positive excess or all with
/// negative excess.
fn best_over_third(excess: &[f64]) -> f64 {
    let pos: f64 = excess.iter().filter(|&&e| e > 0.0).sum();
    let neg: f64 = excess.iter().filter(|&&e| e < 0.0).sum();
    pos.max(-neg)
}

/// `max |e(U1,U2,U3) - d |U1||U2||U3|| / (|V1||V2||V3|)` over subset triples:
/// exactly in [`QuasiMode::Exact`], over sampled `(U1, U2)` (always
/// including the full classes) with the optimal `U3` in sampled mode.
pub fn quasirandomness_defect(view: &TripartiteView, d: f64, mode: QuasiMode) -> Result<f64, CoverError> {
    let [a, b, c] = view.sizes();
    let h = view.host;
    let [p1, p2, p3] = &view.parts;
    let norm = (a * b * c) as f64;
    match mode {
        QuasiMode::Exact => {
            let big = a.max(b).max(c);
            if big > 8 {
                return Err(CoverError::OversizedForExact(big));
            }
            // adj[i][k]: bitmask over class-2 indices j with p1[i] p2[j] p3[k] an edge
            let mut adj = vec![vec![0u32; c]; a];
            for (i, &x) in p1.iter().enumerate() {
                for (j, &y) in p2.iter().enumerate() {
                    for (k, &z) in p3.iter().enumerate() {
                        if h.has_edge(x, y, z) {
                            adj[i][k] |= 1 << j;
                        }
                    }
                }
            }
            let mut best = 0.0f64;
            let mut excess = vec![0.0; c];
            for s1 in 0u32..(1 << a) {
                let n1 = s1.count_ones() as f64;
                for s2 in 0u32..(1 << b) {
                    let base = d * n1 * s2.count_ones() as f64;
                    for (k, e) in excess.iter_mut().enumerate() {
                        let mut cnt = 0;
                        for (i, row) in adj.iter().enumerate() {
                            if s1 >> i & 1 == 1 {
                                cnt += (row[k] & s2).count_ones();
                            }
                        }
                        *e = cnt as f64 - base;
                    }
                    best = best.max(best_over_third(&excess));
                }
            }
            Ok(best / norm)
        }
        QuasiMode::Sampled { k, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = 0.0f64;
            let mut counts = vec![0usize; h.n() + 1];
            for draw in 0..k.max(1) {
                let (u1, u2): (Vec<Vertex>, Vec<Vertex>) = if draw == 0 {
                    (p1.clone(), p2.clone())
                } else {
                    (
                        p1.iter().copied().filter(|_| rng.gen_bool(0.5)).collect(),
                        p2.iter().copied().filter(|_| rng.gen_bool(0.5)).collect(),
                    )
                };
                for &z in p3 {
                    counts[z] = 0;
                }
                for &x in &u1 {
                    for &y in &u2 {
                        let mut hits = VertexSet::from_words(h.neighbors(x, y));
                        hits.intersect_with(view.masks[2].words());
                        for z in hits.iter() {
                            counts[z] += 1;
                        }
                    }
                }
                let base = d * (u1.len() * u2.len()) as f64;
                let excess: Vec<f64> = p3.iter().map(|&z| counts[z] as f64 - base).collect();
                best = best.max(best_over_third(&excess));
            }
            Ok(best / norm)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletCover {
    pub c: usize,
    pub paths: Vec<TightPath>,
    pub uncovered: Vec<Vertex>,
}

struct CoverState<'v, 'a> {
    view: &'v TripartiteView<'a>,
    alive: VertexSet,
    deleted: HashSet<[Vertex; 3]>,
}

fn key(a: Vertex, b: Vertex, c: Vertex) -> [Vertex; 3] {
    let mut t = [a, b, c];
    t.sort_unstable();
    t
}

impl CoverState<'_, '_> {
    /// Third-class candidates completing `x y` to a live crossing edge.
    fn completions(&self, x: Vertex, y: Vertex, third: usize) -> Vec<Vertex> {
        let mut s = VertexSet::from_words(self.view.host.neighbors(x, y));
        s.intersect_with(self.view.masks[third].words());
        s.intersect_with(self.alive.words());
        s.iter().filter(|&z| !self.deleted.contains(&key(x, y, z))).collect()
    }

    fn third(cx: usize, cy: usize) -> usize {
        3 - cx - cy
    }

    /// Repeatedly deletes all edges through a pair whose positive crossing
    /// degree is below `c`.
    fn prune(&mut self, c: usize) {
        loop {
            let mut changed = false;
            for (cx, cy) in [(0, 1), (0, 2), (1, 2)] {
                for &x in &self.view.parts[cx] {
                    if !self.alive.contains(x) {
                        continue;
                    }
                    for &y in &self.view.parts[cy] {
                        if !self.alive.contains(y) {
                            continue;
                        }
                        let zs = self.completions(x, y, Self::third(cx, cy));
                        if !zs.is_empty() && zs.len() < c {
                            for z in zs {
                                self.deleted.insert(key(x, y, z));
                            }
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn first_edge(&self) -> Option<[Vertex; 3]> {
        for &x in &self.view.parts[0] {
            if !self.alive.contains(x) {
                continue;
            }
            for &y in &self.view.parts[1] {
                if !self.alive.contains(y) {
                    continue;
                }
                if let Some(&z) = self.completions(x, y, 2).first() {
                    return Some([x, y, z]);
                }
            }
        }
        None
    }

    /// Maximal alternating extension of a starting edge in both directions.
    fn grow(&self, start: [Vertex; 3]) -> Vec<Vertex> {
        let mut path: Vec<Vertex> = start.to_vec();
        let mut on = VertexSet::from_iter_with(self.view.host.n(), start);
        let class = |v: Vertex| self.view.class_of(v).expect("view vertex");
        loop {
            let k = path.len();
            let (a, b) = (path[k - 2], path[k - 1]);
            let next = (class(b) + 1) % 3;
            match self.completions(a, b, next).into_iter().find(|&v| !on.contains(v)) {
                Some(v) => {
                    on.insert(v);
                    path.push(v);
                }
                None => break,
            }
        }
        loop {
            let (p, q) = (path[0], path[1]);
            let prev = (class(p) + 2) % 3;
            match self.completions(p, q, prev).into_iter().find(|&v| !on.contains(v)) {
                Some(v) => {
                    on.insert(v);
                    path.insert(0, v);
                }
                None => break,
            }
        }
        path
    }
}

/// Covers the view by vertex-disjoint class-alternating tight paths, each of
/// length at least `3c - 2` where `c = floor((d xi^3 - delta) n_part / 6)`
/// (at least 1).
pub fn cover_triplet_with_paths(view: &TripartiteView, params: &CoverParams) -> Result<TripletCover, CoverError> {
    let sizes = view.sizes();
    if sizes[0] != sizes[1] || sizes[1] != sizes[2] {
        return Err(CoverError::UnequalParts(sizes));
    }
    let m = sizes[0] as f64;
    let slack = params.d * params.xi.powi(3) - params.delta;
    if slack * m / 2.0 < 1.0 - 1e-12 {
        return Err(CoverError::HypothesisViolated { value: slack * m / 2.0 });
    }
    let c = ((slack * m / 6.0 + 1e-9).floor() as usize).max(1);
    let min_len = 3 * c - 2;
    let n = view.host.n();
    let mut state = CoverState {
        view,
        alive: VertexSet::from_iter_with(n, view.parts.iter().flatten().copied()),
        deleted: HashSet::new(),
    };
    let mut paths = Vec::new();
    state.prune(c);
    while let Some(e) = state.first_edge() {
        let p = state.grow(e);
        if p.len() - 2 >= min_len {
            for &v in &p {
                state.alive.remove(v);
            }
            paths.push(TightPath::new(p));
            state.prune(c);
        } else {
            let [x, y, z] = e;
            state.deleted.insert(key(x, y, z));
        }
    }
    let uncovered = view
        .parts
        .iter()
        .flatten()
        .copied()
        .filter(|&v| state.alive.contains(v))
        .collect::<Vec<_>>();
    let mut uncovered = uncovered;
    uncovered.sort_unstable();
    Ok(TripletCover { c, paths, uncovered })
}
