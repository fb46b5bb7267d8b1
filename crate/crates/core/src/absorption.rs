//! Absorbers, their wiring into a single path, the absorbing path and the
//! absorb operation.
//!
//! An absorber for `x` is a tuple `(v_1, w_1, y_1, z_1, ..., v_s, w_s, y_s, z_s)`
//! carrying two families of short tight paths ("segments") on the same
//! exposed pairs:
//!
//! * before: `v_i w_i y_{i+1} z_{i+1}` and `v_{i+1} w_{i+1} y_i z_i` for odd `i`;
//! * after: `v_1 w_1 x y_1 z_1`, the same crossed pairs for even `i < s`,
//!   and `v_s w_s y_s z_s`.
//!
//! Every segment runs from a "V node" (pair `v_i w_i`) to a "Y node" (pair
//! `y_j z_j`). A wiring is a set of connector paths between nodes such that
//! both families, glued by the same connectors, form one path with the same
//! two ends. Swapping a block from its before- to its after-traversal
//! therefore inserts `x` without touching the rest of the absorbing path.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::VertexSet;
use crate::connector::{connect_pairs, ConnectorError, ConnectorParams};
use crate::hypergraph::{scaled_floor, Hypergraph3, OrderedPair, TightPath, Vertex};
use crate::oracle::SearchBudget;
use crate::sub_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbsorptionError {
    #[error("malformed absorber: {0}")]
    Malformed(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("greedy absorber search for {x} stuck at stage {stage} in all {restarts} restarts")]
    Stuck { x: Vertex, stage: usize, restarts: usize },
    #[error("wiring not found: {0}")]
    WiringNotFound(String),
    #[error("capacity {reached} of {target} unreachable for vertex {vertex}: {reason}")]
    CapacityUnreachable {
        vertex: Vertex,
        reached: usize,
        target: usize,
        reason: String,
    },
    #[error("no unused absorber for vertex {0}")]
    NoAbsorberFor(Vertex),
    #[error("vertex {0} already lies on the absorbing path")]
    OnAbsorbingPath(Vertex),
}

type Result<T> = std::result::Result<T, AbsorptionError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorber {
    pub x: Vertex,
    pub s: usize,
    pub tuple: Vec<Vertex>,
}

impl Absorber {
    pub fn v(&self, i: usize) -> Vertex {
        self.tuple[4 * (i - 1)]
    }
    pub fn w(&self, i: usize) -> Vertex {
        self.tuple[4 * (i - 1) + 1]
    }
    pub fn y(&self, i: usize) -> Vertex {
        self.tuple[4 * (i - 1) + 2]
    }
    pub fn z(&self, i: usize) -> Vertex {
        self.tuple[4 * (i - 1) + 3]
    }

    fn check_shape(&self, n: usize, x: Vertex) -> Result<()> {
        if self.s < 2 || !self.s.is_multiple_of(2) {
            return Err(AbsorptionError::Malformed(format!(
                "s must be even and >= 2, got {}",
                self.s
            )));
        }
        if self.tuple.len() != 4 * self.s {
            return Err(AbsorptionError::Malformed(format!(
                "tuple has {} vertices, expected {}",
                self.tuple.len(),
                4 * self.s
            )));
        }
        let mut seen = VertexSet::new(n);
        for &v in &self.tuple {
            if v == 0 || v > n {
                return Err(AbsorptionError::Malformed(format!("vertex {v} out of range")));
            }
            if v == x {
                return Err(AbsorptionError::Malformed(format!("tuple contains x = {x}")));
            }
            if !seen.insert(v) {
                return Err(AbsorptionError::Malformed(format!("vertex {v} repeated")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorberCheck {
    pub valid: bool,
    pub missing: Vec<[Vertex; 3]>,
}

/// The three path families, as vertex sequences, that must all be tight paths.
fn required_paths(a: &Absorber, x: Vertex) -> Vec<Vec<Vertex>> {
    let s = a.s;
    let mut out = vec![vec![a.v(1), a.w(1), x, a.y(1), a.z(1)]];
    for i in 1..s {
        out.push(vec![a.v(i), a.w(i), a.y(i + 1), a.z(i + 1)]);
        out.push(vec![a.v(i + 1), a.w(i + 1), a.y(i), a.z(i)]);
    }
    out.push(vec![a.v(s), a.w(s), a.y(s), a.z(s)]);
    out
}

/// Checks whether `a`'s tuple absorbs `x` in `h` (the tuple's own `x` field
/// is ignored, so one tuple can be tested against many vertices).
pub fn is_absorber(h: &Hypergraph3, x: Vertex, a: &Absorber) -> Result<AbsorberCheck> {
    if x == 0 || x > h.n() {
        return Err(AbsorptionError::Malformed(format!("x = {x} out of range")));
    }
    a.check_shape(h.n(), x)?;
    let mut missing = Vec::new();
    for p in required_paths(a, x) {
        for t in p.windows(3) {
            if !h.has_edge(t[0], t[1], t[2]) {
                let e = [t[0], t[1], t[2]];
                if !missing.contains(&e) {
                    missing.push(e);
                }
            }
        }
    }
    Ok(AbsorberCheck {
        valid: missing.is_empty(),
        missing,
    })
}

fn absorbs(h: &Hypergraph3, x: Vertex, a: &Absorber) -> bool {
    is_absorber(h, x, a).is_ok_and(|c| c.valid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Greedy staged choice with rising label thresholds.
    Greedy,
    /// Uniformly random tuples, accepted when certified; `draws` caps the
    /// number of tuples tried per absorber.
    Random { draws: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorberParams {
    pub alpha: f64,
    pub seed: u64,
    pub restarts: usize,
    pub selection: Selection,
}

impl AbsorberParams {
    pub fn new(alpha: f64, seed: u64) -> Self {
        AbsorberParams {
            alpha,
            seed,
            restarts: 64,
            selection: Selection::Greedy,
        }
    }
}

fn check_s(s: usize) -> Result<()> {
    if s < 4 || !s.is_multiple_of(2) {
        return Err(AbsorptionError::InvalidParams(format!(
            "s must be even and >= 4, got {s}"
        )));
    }
    Ok(())
}

struct Greedy<'a> {
    h: &'a Hypergraph3,
    x: Vertex,
    alpha: f64,
    avail: VertexSet,
}

impl Greedy<'_> {
    /// Lowest label allowed at stage `j`: `min(x + floor(j alpha n / 2), floor(n/2))`.
    fn threshold(&self, j: usize) -> usize {
        let n = self.h.n();
        (self.x + scaled_floor(self.alpha * j as f64 / 2.0, n)).min(n / 2)
    }

    fn pick(&mut self, rng: &mut ChaCha8Rng, stage: usize, pairs: &[(Vertex, Vertex)]) -> Option<Vertex> {
        let mut cand = self.avail.clone();
        for &(a, b) in pairs {
            cand.intersect_with(self.h.neighbors(a, b));
        }
        let lo = self.threshold(stage);
        let cand: Vec<Vertex> = cand.iter().filter(|&v| v >= lo).collect();
        let v = *cand.choose(rng)?;
        self.avail.remove(v);
        Some(v)
    }

    fn run(&mut self, s: usize, rng: &mut ChaCha8Rng) -> std::result::Result<Vec<Vertex>, usize> {
        let x = self.x;
        let mut t = vec![0usize; 4 * s];
        let (v, w, y, z) = (0usize, 1usize, 2usize, 3usize);
        let at = |i: usize, k: usize| 4 * (i - 1) + k;

        // stage 1: w_1 with room for v_1 and y_1 in its link with x
        let lo = self.threshold(1);
        let firsts: Vec<Vertex> = self
            .avail
            .iter()
            .filter(|&c| c >= lo && self.h.codegree(c, x) >= 2)
            .collect();
        let w1 = *firsts.choose(rng).ok_or(1usize)?;
        self.avail.remove(w1);
        t[at(1, w)] = w1;
        t[at(1, v)] = self.pick(rng, 1, &[(w1, x)]).ok_or(1usize)?;
        t[at(1, y)] = self.pick(rng, 1, &[(w1, x)]).ok_or(1usize)?;
        t[at(1, z)] = self.pick(rng, 1, &[(x, t[at(1, y)])]).ok_or(1usize)?;

        for i in 1..s - 1 {
            let j = i + 1;
            let (vi, wi, yi, zi) = (t[at(i, v)], t[at(i, w)], t[at(i, y)], t[at(i, z)]);
            let wn = self.pick(rng, j, &[(yi, zi)]).ok_or(j)?;
            let vn = self.pick(rng, j, &[(wn, yi)]).ok_or(j)?;
            let yn = self.pick(rng, j, &[(vi, wi)]).ok_or(j)?;
            let zn = self.pick(rng, j, &[(wi, yn)]).ok_or(j)?;
            t[at(j, v)] = vn;
            t[at(j, w)] = wn;
            t[at(j, y)] = yn;
            t[at(j, z)] = zn;
        }

        let p = s - 1;
        let (vp, wp, yp, zp) = (t[at(p, v)], t[at(p, w)], t[at(p, y)], t[at(p, z)]);
        let ws = self.pick(rng, s, &[(yp, zp)]).ok_or(s)?;
        let ys = self.pick(rng, s, &[(vp, wp)]).ok_or(s)?;
        let vs = self.pick(rng, s, &[(ws, yp), (ws, ys)]).ok_or(s)?;
        let zs = self.pick(rng, s, &[(wp, ys), (ws, ys)]).ok_or(s)?;
        t[at(s, v)] = vs;
        t[at(s, w)] = ws;
        t[at(s, y)] = ys;
        t[at(s, z)] = zs;
        Ok(t)
    }
}

/// Searches for an absorber for `x` avoiding `forbidden`.
pub fn find_absorber(
    h: &Hypergraph3,
    x: Vertex,
    s: usize,
    forbidden: &VertexSet,
    params: &AbsorberParams,
) -> Result<Absorber> {
    check_s(s)?;
    let n = h.n();
    if x == 0 || x > n {
        return Err(AbsorptionError::InvalidParams(format!("x = {x} out of range")));
    }
    let mut avail = VertexSet::full(n);
    avail.difference_with(forbidden.words());
    avail.remove(x);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let restarts = params.restarts.max(1);
    match params.selection {
        Selection::Greedy => {
            let mut deepest = 0;
            for _ in 0..restarts {
                let mut g = Greedy {
                    h,
                    x,
                    alpha: params.alpha,
                    avail: avail.clone(),
                };
                match g.run(s, &mut rng) {
                    Ok(tuple) => {
                        let a = Absorber { x, s, tuple };
                        debug_assert!(absorbs(h, x, &a));
                        return Ok(a);
                    }
                    Err(stage) => deepest = deepest.max(stage),
                }
            }
            Err(AbsorptionError::Stuck {
                x,
                stage: deepest,
                restarts,
            })
        }
        Selection::Random { draws } => {
            let pool = avail.to_vec();
            if pool.len() < 4 * s {
                return Err(AbsorptionError::Stuck {
                    x,
                    stage: 1,
                    restarts: 0,
                });
            }
            for _ in 0..draws.max(1) {
                let tuple: Vec<Vertex> = pool.choose_multiple(&mut rng, 4 * s).copied().collect();
                let a = Absorber { x, s, tuple };
                if absorbs(h, x, &a) {
                    return Ok(a);
                }
            }
            Err(AbsorptionError::Stuck {
                x,
                stage: 0,
                restarts: draws,
            })
        }
    }
}

/// End of a segment: the pair `v_i w_i` or the pair `y_i z_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    V(usize),
    Y(usize),
}

impl Node {
    fn index(self) -> usize {
        match self {
            Node::V(i) => 2 * (i - 1),
            Node::Y(i) => 2 * (i - 1) + 1,
        }
    }

    fn from_index(k: usize) -> Node {
        if k.is_multiple_of(2) {
            Node::V(k / 2 + 1)
        } else {
            Node::Y(k / 2 + 1)
        }
    }

    /// Ordered pair through which a traversal enters the segment at this node.
    pub fn entry_pair(self, a: &Absorber) -> OrderedPair {
        let (p, q) = match self {
            Node::V(i) => (a.v(i), a.w(i)),
            Node::Y(i) => (a.z(i), a.y(i)),
        };
        OrderedPair { first: p, second: q }
    }

    /// Ordered pair with which a traversal leaves the segment at this node.
    pub fn exit_pair(self, a: &Absorber) -> OrderedPair {
        self.entry_pair(a).reversed()
    }
}

/// Which of the two segment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    Before,
    After,
}

/// Partner `Y` index of `V_i` in a configuration.
fn partner(conf: Configuration, s: usize, i: usize) -> usize {
    match conf {
        Configuration::Before => {
            if i % 2 == 1 {
                i + 1
            } else {
                i - 1
            }
        }
        Configuration::After => {
            if i == 1 || i == s {
                i
            } else if i.is_multiple_of(2) {
                i + 1
            } else {
                i - 1
            }
        }
    }
}

/// Segment from `V_i` to its partner, as a vertex sequence from the V end.
fn segment(a: &Absorber, conf: Configuration, i: usize, x: Vertex) -> Vec<Vertex> {
    let j = partner(conf, a.s, i);
    if conf == Configuration::After && i == 1 {
        vec![a.v(1), a.w(1), x, a.y(1), a.z(1)]
    } else {
        vec![a.v(i), a.w(i), a.y(j), a.z(j)]
    }
}

/// The segment family of a configuration (`x` only matters for `After`).
pub fn segments(a: &Absorber, conf: Configuration, x: Vertex) -> Vec<TightPath> {
    (1..=a.s).map(|i| TightPath::new(segment(a, conf, i, x))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireConnector {
    pub from: Node,
    pub to: Node,
    /// Runs from `from`'s exit pair to `to`'s entry pair.
    pub path: TightPath,
}

/// One step of a traversal: a segment entered at `entry`, or a connector,
/// possibly run backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Segment { entry: Node, exit: Node },
    Connector { index: usize, reversed: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wiring {
    pub start: Node,
    pub end: Node,
    pub connectors: Vec<WireConnector>,
    pub before: Vec<Placement>,
    pub after: Vec<Placement>,
}

fn plan_traversal(s: usize, conf: Configuration, conns: &[WireConnector], start: Node) -> Vec<Placement> {
    let other_end = |node: Node| match node {
        Node::V(i) => Node::Y(partner(conf, s, i)),
        Node::Y(j) => Node::V((1..=s).find(|&i| partner(conf, s, i) == j).expect("perfect matching")),
    };
    let mut out = Vec::with_capacity(2 * s - 1);
    let mut cur = start;
    loop {
        let exit = other_end(cur);
        out.push(Placement::Segment { entry: cur, exit });
        let next = conns.iter().enumerate().find_map(|(k, c)| {
            if c.from == exit {
                Some((k, false, c.to))
            } else if c.to == exit {
                Some((k, true, c.from))
            } else {
                None
            }
        });
        match next {
            Some((index, reversed, to)) => {
                out.push(Placement::Connector { index, reversed });
                cur = to;
            }
            None => break,
        }
    }
    out
}

impl Wiring {
    fn realize(&self, a: &Absorber, conf: Configuration, x: Vertex, plan: &[Placement]) -> Vec<Vertex> {
        let mut out = Vec::new();
        for p in plan {
            match *p {
                Placement::Segment { entry, .. } => {
                    let i = match entry {
                        Node::V(i) => i,
                        Node::Y(j) => (1..=a.s).find(|&i| partner(conf, a.s, i) == j).expect("matched"),
                    };
                    let mut seg = segment(a, conf, i, x);
                    if matches!(entry, Node::Y(_)) {
                        seg.reverse();
                    }
                    out.extend(seg);
                }
                Placement::Connector { index, reversed } => {
                    let inner = self.connectors[index].path.internal();
                    if reversed {
                        out.extend(inner.iter().rev());
                    } else {
                        out.extend(inner);
                    }
                }
            }
        }
        out
    }

    /// The block in its before configuration.
    pub fn before_path(&self, a: &Absorber) -> TightPath {
        TightPath::new(self.realize(a, Configuration::Before, a.x, &self.before))
    }

    /// The block in its after configuration, absorbing `x`.
    pub fn after_path(&self, a: &Absorber, x: Vertex) -> TightPath {
        TightPath::new(self.realize(a, Configuration::After, x, &self.after))
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&self, mut k: usize) -> usize {
        while self.0[k] != k {
            k = self.0[k];
        }
        k
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

fn matching_forest(s: usize, conf: Configuration) -> UnionFind {
    let mut uf = UnionFind((0..2 * s).collect());
    for i in 1..=s {
        uf.union(Node::V(i).index(), Node::Y(partner(conf, s, i)).index());
    }
    uf
}

/// Connector matchings under which both configurations become one path:
/// each node takes at most one connector, exactly two nodes stay free, and
/// neither union closes a cycle.
fn connector_layouts(s: usize, rng: &mut ChaCha8Rng, limit: usize) -> Vec<Vec<(Node, Node)>> {
    struct Ctx<'a> {
        s: usize,
        rng: &'a mut ChaCha8Rng,
        limit: usize,
        out: Vec<Vec<(Node, Node)>>,
        steps: usize,
    }
    fn rec(
        ctx: &mut Ctx,
        k: usize,
        taken: &mut Vec<bool>,
        free: usize,
        ub: &mut UnionFind,
        ua: &mut UnionFind,
        chosen: &mut Vec<(Node, Node)>,
    ) {
        ctx.steps += 1;
        if ctx.out.len() >= ctx.limit || ctx.steps > 200_000 {
            return;
        }
        let nodes = 2 * ctx.s;
        let mut k = k;
        while k < nodes && taken[k] {
            k += 1;
        }
        if k == nodes {
            if chosen.len() == ctx.s - 1 {
                ctx.out.push(chosen.clone());
            }
            return;
        }
        let mut options: Vec<usize> = (k + 1..nodes).filter(|&q| !taken[q]).collect();
        options.shuffle(ctx.rng);
        let leave_free_first = ctx.rng.gen_bool(0.5);
        if leave_free_first && free < 2 {
            taken[k] = true;
            rec(ctx, k + 1, taken, free + 1, ub, ua, chosen);
            taken[k] = false;
        }
        for q in options {
            let (sb, sa) = (ub.0.clone(), ua.0.clone());
            if ub.union(k, q) && ua.union(k, q) {
                taken[k] = true;
                taken[q] = true;
                chosen.push((Node::from_index(k), Node::from_index(q)));
                rec(ctx, k + 1, taken, free, ub, ua, chosen);
                chosen.pop();
                taken[k] = false;
                taken[q] = false;
            }
            ub.0 = sb;
            ua.0 = sa;
            if ctx.out.len() >= ctx.limit {
                return;
            }
        }
        if !leave_free_first && free < 2 {
            taken[k] = true;
            rec(ctx, k + 1, taken, free + 1, ub, ua, chosen);
            taken[k] = false;
        }
    }
    let mut ctx = Ctx {
        s,
        rng,
        limit,
        out: Vec::new(),
        steps: 0,
    };
    let mut ub = matching_forest(s, Configuration::Before);
    let mut ua = matching_forest(s, Configuration::After);
    rec(
        &mut ctx,
        0,
        &mut vec![false; 2 * s],
        0,
        &mut ub,
        &mut ua,
        &mut Vec::new(),
    );
    ctx.out
}

const LAYOUT_CANDIDATES: usize = 24;

/// Finds connectors of length `length` with internal vertices in `pool`
/// making both configurations of `a` a single tight path, and checks the
/// result against `h` before returning it.
pub fn wire_absorber(
    h: &Hypergraph3,
    a: &Absorber,
    pool: &VertexSet,
    length: usize,
    budget: SearchBudget,
    seed: u64,
) -> Result<Wiring> {
    check_s(a.s)?;
    a.check_shape(h.n(), a.x)?;
    let s = a.s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layouts = connector_layouts(s, &mut rng, LAYOUT_CANDIDATES);
    if layouts.is_empty() {
        return Err(AbsorptionError::WiringNotFound(format!(
            "no connector layout for s = {s}"
        )));
    }
    let mut last_err = String::new();
    'layout: for (li, layout) in layouts.iter().enumerate() {
        let mut free = pool.clone();
        for &v in &a.tuple {
            free.remove(v);
        }
        free.remove(a.x);
        let mut conns = Vec::with_capacity(s - 1);
        for (ci, &(p, q)) in layout.iter().enumerate() {
            let from = p.exit_pair(a);
            let to = q.entry_pair(a);
            let mut params = ConnectorParams::new(0.25, length, sub_seed(seed, (li * 64 + ci) as u64));
            params.budget = budget;
            match connect_pairs(h, from, to, length, &free, &params) {
                Ok(path) => {
                    for &v in path.internal() {
                        free.remove(v);
                    }
                    conns.push(WireConnector { from: p, to: q, path });
                }
                Err(ConnectorError::NotFound { .. }) => {
                    last_err = format!("no connector {from} -> {to}");
                    continue 'layout;
                }
                Err(e) => return Err(AbsorptionError::WiringNotFound(e.to_string())),
            }
        }
        let covered: Vec<bool> = {
            let mut c = vec![false; 2 * s];
            for &(p, q) in layout {
                c[p.index()] = true;
                c[q.index()] = true;
            }
            c
        };
        let ends: Vec<Node> = (0..2 * s).filter(|&k| !covered[k]).map(Node::from_index).collect();
        let (start, end) = (ends[0], ends[1]);
        let before = plan_traversal(s, Configuration::Before, &conns, start);
        let after = plan_traversal(s, Configuration::After, &conns, start);
        let wiring = Wiring {
            start,
            end,
            connectors: conns,
            before,
            after,
        };
        let b = wiring.before_path(a);
        let af = wiring.after_path(a, a.x);
        let ok = crate::hypergraph::validate_tight_path(h, &b).is_ok_and(|v| v.is_valid())
            && crate::hypergraph::validate_tight_path(h, &af).is_ok_and(|v| v.is_valid())
            && af.vertex_count() == b.vertex_count() + 1
            && b.start_pair() == af.start_pair()
            && b.end_pair() == af.end_pair();
        if ok {
            return Ok(wiring);
        }
        last_err = "wired configurations failed validation".into();
    }
    Err(AbsorptionError::WiringNotFound(last_err))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub absorber: Absorber,
    pub wiring: Wiring,
    /// Index of the block's first vertex in the absorbing path.
    pub start: usize,
    /// Vertex count of the block in its before configuration.
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingParams {
    pub theta: f64,
    pub alpha: f64,
    pub s: usize,
    #[serde(rename = "L")]
    pub length: usize,
    pub seed: u64,
    pub budget: SearchBudget,
    pub target_capacity: usize,
    /// Stop short of the target instead of failing when the size cap or the
    /// absorber search gets in the way.
    pub allow_partial: bool,
    pub selection: Selection,
}

impl AbsorbingParams {
    pub fn new(theta: f64, alpha: f64, s: usize, length: usize, target_capacity: usize, seed: u64) -> Self {
        AbsorbingParams {
            theta,
            alpha,
            s,
            length,
            seed,
            budget: SearchBudget::nodes(2_000_000),
            target_capacity,
            allow_partial: false,
            selection: Selection::Greedy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingPath {
    pub path: TightPath,
    pub registry: Vec<RegistryEntry>,
    /// Number of registered absorbers working for each vertex off the path.
    pub capacity: BTreeMap<Vertex, usize>,
    pub target_capacity: usize,
    /// False when a partial build stopped below the target.
    pub complete: bool,
}

impl AbsorbingPath {
    pub fn vertex_set(&self, n: usize) -> VertexSet {
        VertexSet::from_iter_with(n, self.path.vertices().iter().copied())
    }

    pub fn min_capacity(&self) -> usize {
        self.capacity.values().copied().min().unwrap_or(0)
    }

    /// Distinct registry indices for the vertices of `xs` (maximum bipartite
    /// matching), or the first vertex left without an absorber.
    pub fn assign_absorbers(&self, h: &Hypergraph3, xs: &[Vertex]) -> Result<Vec<(Vertex, usize)>> {
        let (assigned, missing) = self.assign_max(h, xs);
        match missing.first() {
            Some(&x) => Err(AbsorptionError::NoAbsorberFor(x)),
            None => Ok(assigned),
        }
    }

    /// A maximum assignment of distinct registry indices to vertices of
    /// `xs`, together with the vertices it leaves out.
    pub fn assign_max(&self, h: &Hypergraph3, xs: &[Vertex]) -> (Vec<(Vertex, usize)>, Vec<Vertex>) {
        let adj: Vec<Vec<usize>> = xs
            .iter()
            .map(|&x| {
                (0..self.registry.len())
                    .filter(|&k| absorbs(h, x, &self.registry[k].absorber))
                    .collect()
            })
            .collect();
        let mut owner: Vec<Option<usize>> = vec![None; self.registry.len()];
        fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
            for &k in &adj[u] {
                if seen[k] {
                    continue;
                }
                seen[k] = true;
                if owner[k].is_none_or(|o| augment(o, adj, seen, owner)) {
                    owner[k] = Some(u);
                    return true;
                }
            }
            false
        }
        let mut missing = Vec::new();
        for u in 0..xs.len() {
            let mut seen = vec![false; self.registry.len()];
            if !augment(u, &adj, &mut seen, &mut owner) {
                missing.push(xs[u]);
            }
        }
        let mut out: Vec<(Vertex, usize)> = owner
            .iter()
            .enumerate()
            .filter_map(|(k, o)| o.map(|u| (xs[u], k)))
            .collect();
        out.sort_unstable();
        (out, missing)
    }

    /// The path with block `k` swapped to its after configuration for
    /// `assigned[k]`, for all assigned blocks.
    pub fn swap_blocks(&self, assignment: &[(Vertex, usize)]) -> TightPath {
        let mut by_block: Vec<(usize, Vertex)> = assignment.iter().map(|&(x, k)| (k, x)).collect();
        by_block.sort_unstable();
        let old = self.path.vertices();
        let mut out = Vec::with_capacity(old.len() + assignment.len());
        let mut pos = 0;
        for (k, x) in by_block {
            let e = &self.registry[k];
            out.extend_from_slice(&old[pos..e.start]);
            out.extend_from_slice(e.wiring.after_path(&e.absorber, x).vertices());
            pos = e.start + e.len;
        }
        out.extend_from_slice(&old[pos..]);
        TightPath::new(out)
    }
}

fn capacity_of(h: &Hypergraph3, x: Vertex, registry: &[RegistryEntry]) -> usize {
    registry.iter().filter(|e| absorbs(h, x, &e.absorber)).count()
}

/// A shortest possible stand-in path: four vertices off `forbidden`.
fn trivial_path(h: &Hypergraph3, forbidden: &VertexSet) -> Option<TightPath> {
    for &[a, b, c] in h.edges() {
        if [a, b, c].iter().any(|&v| forbidden.contains(v)) {
            continue;
        }
        for (p, q, r) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
            let d = h.neighbor_iter(q, r).find(|&d| d != p && !forbidden.contains(d));
            if let Some(d) = d {
                return Some(TightPath::new(vec![p, q, r, d]));
            }
        }
    }
    None
}

/// Builds an absorbing path outside the reservoir in which every vertex off
/// the path has at least `target_capacity` registered absorbers, with at
/// most `floor(theta n)` vertices.
pub fn build_absorbing_path(h: &Hypergraph3, reservoir: &VertexSet, params: &AbsorbingParams) -> Result<AbsorbingPath> {
    check_s(params.s)?;
    if params.length < 2 {
        return Err(AbsorptionError::InvalidParams(format!(
            "connector length must be >= 2, got {}",
            params.length
        )));
    }
    let n = h.n();
    let s = params.s;
    let max_vertices = scaled_floor(params.theta, n);
    let gap = params.length - 2;
    let block_len = 4 * s + (s - 1) * gap;

    let mut used = VertexSet::new(n);
    let mut blocks: Vec<(Absorber, Wiring)> = Vec::new();
    let mut registry_view: Vec<RegistryEntry> = Vec::new();
    let mut total = 0usize;
    let mut complete = true;
    let mut attempt = 0u64;

    if params.target_capacity == 0 {
        let path = trivial_path(h, reservoir)
            .ok_or_else(|| AbsorptionError::WiringNotFound("no 4-vertex tight path off the reservoir".into()))?;
        return Ok(finish(h, path, Vec::new(), params.target_capacity, true));
    }

    'vertices: for x in 1..=n {
        if used.contains(x) {
            continue;
        }
        let mut cap = capacity_of(h, x, &registry_view);
        while cap < params.target_capacity {
            let projected = total + block_len + if blocks.is_empty() { 0 } else { gap };
            let fail = |reason: String| AbsorptionError::CapacityUnreachable {
                vertex: x,
                reached: cap,
                target: params.target_capacity,
                reason,
            };
            if projected > max_vertices {
                if params.allow_partial {
                    complete = false;
                    break 'vertices;
                }
                return Err(fail(format!(
                    "next block would grow the path to {projected} > floor(theta n) = {max_vertices} vertices"
                )));
            }
            let mut forbidden = reservoir.clone();
            forbidden.union_with(used.words());
            let mut found = None;
            let mut last = String::new();
            for _ in 0..4 {
                attempt += 1;
                let ap = AbsorberParams {
                    alpha: params.alpha,
                    seed: sub_seed(params.seed, attempt),
                    restarts: 64,
                    selection: params.selection,
                };
                let a = match find_absorber(h, x, s, &forbidden, &ap) {
                    Ok(a) => a,
                    Err(e) => {
                        last = e.to_string();
                        break;
                    }
                };
                let mut pool = VertexSet::full(n);
                pool.difference_with(forbidden.words());
                match wire_absorber(
                    h,
                    &a,
                    &pool,
                    params.length,
                    params.budget,
                    sub_seed(params.seed, 1 << 32 | attempt),
                ) {
                    Ok(w) => {
                        found = Some((a, w));
                        break;
                    }
                    Err(e) => last = e.to_string(),
                }
            }
            let Some((a, w)) = found else {
                if params.allow_partial {
                    complete = false;
                    continue 'vertices;
                }
                return Err(fail(last));
            };
            let before = w.before_path(&a);
            for &v in before.vertices() {
                used.insert(v);
            }
            total = projected;
            registry_view.push(RegistryEntry {
                absorber: a.clone(),
                wiring: w.clone(),
                start: 0,
                len: before.vertex_count(),
            });
            blocks.push((a, w));
            cap = capacity_of(h, x, &registry_view);
        }
    }

    if blocks.is_empty() {
        let mut forbidden = reservoir.clone();
        forbidden.union_with(used.words());
        let path = trivial_path(h, &forbidden)
            .ok_or_else(|| AbsorptionError::WiringNotFound("no 4-vertex tight path off the reservoir".into()))?;
        return Ok(finish(h, path, Vec::new(), params.target_capacity, complete));
    }

    // glue the blocks with connectors of the same length
    let mut pool = VertexSet::full(n);
    pool.difference_with(reservoir.words());
    pool.difference_with(used.words());
    let mut seq: Vec<Vertex> = Vec::with_capacity(total);
    let mut registry = Vec::with_capacity(blocks.len());
    for (k, (a, w)) in blocks.into_iter().enumerate() {
        let block = w.before_path(&a);
        if k > 0 {
            let from = OrderedPair::new(seq[seq.len() - 2], seq[seq.len() - 1]).expect("distinct");
            let mut cp = ConnectorParams::new(0.25, params.length, sub_seed(params.seed, 7 << 40 | k as u64));
            cp.budget = params.budget;
            let link = connect_pairs(h, from, block.start_pair(), params.length, &pool, &cp)
                .map_err(|e| AbsorptionError::WiringNotFound(format!("linking block {k}: {e}")))?;
            for &v in link.internal() {
                pool.remove(v);
                seq.push(v);
            }
        }
        registry.push(RegistryEntry {
            start: seq.len(),
            len: block.vertex_count(),
            absorber: a,
            wiring: w,
        });
        seq.extend_from_slice(block.vertices());
    }
    Ok(finish(
        h,
        TightPath::new(seq),
        registry,
        params.target_capacity,
        complete,
    ))
}

fn finish(
    h: &Hypergraph3,
    path: TightPath,
    registry: Vec<RegistryEntry>,
    target_capacity: usize,
    complete: bool,
) -> AbsorbingPath {
    let on_path = VertexSet::from_iter_with(h.n(), path.vertices().iter().copied());
    let capacity = (1..=h.n())
        .filter(|&x| !on_path.contains(x))
        .map(|x| (x, capacity_of(h, x, &registry)))
        .collect();
    AbsorbingPath {
        path,
        registry,
        capacity,
        target_capacity,
        complete,
    }
}

/// Inserts every vertex of `xs` into the absorbing path, each through its
/// own absorber. The result keeps both end pairs of `pa.path`.
pub fn absorb_set(pa: &AbsorbingPath, xs: &[Vertex], h: &Hypergraph3) -> Result<TightPath> {
    let on_path = pa.vertex_set(h.n());
    if let Some(&x) = xs.iter().find(|&&x| on_path.contains(x)) {
        return Err(AbsorptionError::OnAbsorbingPath(x));
    }
    if xs.is_empty() {
        return Ok(pa.path.clone());
    }
    let assignment = pa.assign_absorbers(h, xs)?;
    Ok(pa.swap_blocks(&assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::complete;
    use crate::hypergraph::validate_tight_path;

    fn k(n: usize) -> Hypergraph3 {
        complete(n).unwrap()
    }

    fn tuple_absorber(x: Vertex, s: usize, from: Vertex) -> Absorber {
        Absorber {
            x,
            s,
            tuple: (from..from + 4 * s).collect(),
        }
    }

    #[test]
    fn any_tuple_absorbs_in_complete_graph() {
        let h = k(30);
        let a = tuple_absorber(1, 4, 2);
        assert!(is_absorber(&h, 1, &a).unwrap().valid);
    }

    #[test]
    fn malformed_tuples_are_rejected() {
        let h = k(30);
        let mut a = tuple_absorber(1, 4, 2);
        a.tuple[3] = a.tuple[4];
        assert!(matches!(is_absorber(&h, 1, &a), Err(AbsorptionError::Malformed(_))));
        let a = tuple_absorber(5, 4, 2);
        assert!(is_absorber(&h, 5, &a).is_err());
    }

    #[test]
    fn missing_edge_is_reported() {
        let a = tuple_absorber(1, 4, 2);
        let (v1, w1) = (a.v(1), a.w(1));
        let edges: Vec<_> = k(30).edges().iter().copied().filter(|e| *e != [1, v1, w1]).collect();
        let h = Hypergraph3::new(30, edges).unwrap();
        let c = is_absorber(&h, 1, &a).unwrap();
        assert!(!c.valid);
        assert_eq!(c.missing, vec![[v1, w1, 1]]);
    }

    #[test]
    fn greedy_finds_absorber_and_respects_forbidden() {
        let h = k(40);
        let p = AbsorberParams::new(0.2, 1);
        let a = find_absorber(&h, 1, 4, &VertexSet::new(40), &p).unwrap();
        assert!(is_absorber(&h, 1, &a).unwrap().valid);
        let mut all = VertexSet::full(40);
        all.remove(1);
        assert!(matches!(
            find_absorber(&h, 1, 4, &all, &p),
            Err(AbsorptionError::Stuck { .. })
        ));
        assert!(find_absorber(&h, 1, 3, &VertexSet::new(40), &p).is_err());
    }

    #[test]
    fn layouts_exist_for_small_s() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for s in [2, 4, 6] {
            let l = connector_layouts(s, &mut rng, 4);
            assert!(!l.is_empty(), "s={s}");
            assert!(l.iter().all(|c| c.len() == s - 1));
        }
    }

    #[test]
    fn wiring_gives_two_valid_configurations() {
        let h = k(40);
        let a = find_absorber(&h, 1, 4, &VertexSet::new(40), &AbsorberParams::new(0.2, 3)).unwrap();
        let pool = VertexSet::full(40);
        let w = wire_absorber(&h, &a, &pool, 5, SearchBudget::nodes(100_000), 9).unwrap();
        let b = w.before_path(&a);
        let af = w.after_path(&a, 1);
        assert!(validate_tight_path(&h, &b).unwrap().is_valid());
        assert!(validate_tight_path(&h, &af).unwrap().is_valid());
        assert_eq!(b.vertex_count(), 16 + 3 * 3);
        let mut bs = b.vertex_set();
        bs.insert(1);
        assert_eq!(bs, af.vertex_set());
        assert_eq!(b.start_pair(), af.start_pair());
        assert_eq!(b.end_pair(), af.end_pair());
    }

    #[test]
    fn absorbing_path_on_complete_graph() {
        let h = k(200);
        let r = VertexSet::from_iter_with(200, 190..=200);
        let params = AbsorbingParams::new(0.3, 0.2, 4, 5, 2, 11);
        let pa = build_absorbing_path(&h, &r, &params).unwrap();
        assert!(validate_tight_path(&h, &pa.path).unwrap().is_valid());
        assert_eq!(pa.path.vertex_count(), 7 * (2 * 4 - 1) + 4);
        assert!(pa.path.vertices().iter().all(|&v| !r.contains(v)));
        assert!(pa.min_capacity() >= 2);
        let xs = [190, 195];
        let out = absorb_set(&pa, &xs, &h).unwrap();
        assert!(validate_tight_path(&h, &out).unwrap().is_valid());
        assert_eq!(out.vertex_count(), pa.path.vertex_count() + 2);
        assert_eq!(out.start_pair(), pa.path.start_pair());
        assert_eq!(out.end_pair(), pa.path.end_pair());
        assert_eq!(absorb_set(&pa, &[], &h).unwrap(), pa.path);
        let on = pa.path.vertices()[3];
        assert_eq!(
            absorb_set(&pa, &[on], &h).unwrap_err(),
            AbsorptionError::OnAbsorbingPath(on)
        );
        assert!(matches!(
            absorb_set(&pa, &[190, 191, 192], &h),
            Err(AbsorptionError::NoAbsorberFor(_))
        ));
    }

    #[test]
    fn zero_capacity_gives_trivial_path() {
        let h = k(20);
        let params = AbsorbingParams::new(0.3, 0.2, 4, 5, 0, 1);
        let pa = build_absorbing_path(&h, &VertexSet::new(20), &params).unwrap();
        assert_eq!(pa.path.vertex_count(), 4);
        assert!(pa.registry.is_empty());
    }

    #[test]
    fn empty_graph_cannot_build() {
        let h = Hypergraph3::empty(60).unwrap();
        let params = AbsorbingParams::new(0.5, 0.2, 4, 5, 1, 1);
        assert!(build_absorbing_path(&h, &VertexSet::new(60), &params).is_err());
    }
}
