//! Connecting ordered pairs by tight paths, climb-up walks and reservoirs.

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::{and_count, VertexSet};
use crate::hypergraph::{scaled_floor, Hypergraph3, OrderedPair, TightPath, TightWalk, Vertex};
use crate::oracle::{check_connection_input, Meter, OracleError, SearchBudget};
use crate::sub_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectorError {
    #[error(transparent)]
    Input(#[from] OracleError),
    #[error("climb-up needs at least one step")]
    ZeroSteps,
    #[error("climb-up stuck at index {index} after {} vertices", walk.vertices().len())]
    Stuck { index: usize, walk: TightWalk },
    #[error("no connecting path found ({} after {nodes} nodes)", if *exhausted_search { "search exhausted" } else { "budget spent" })]
    NotFound { exhausted_search: bool, nodes: u64 },
    #[error("structured mode needs length {expected}, got {got}")]
    StructuredLength { expected: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("theta^2 n = {value:.3} is below 8")]
    ReservoirTooSmall { value: f64 },
    #[error("reservoir size left [{lo:.2}, {hi:.2}] in all {attempts} attempts")]
    ResampleCapExceeded { lo: f64, hi: f64, attempts: usize },
}

type Result<T> = std::result::Result<T, ConnectorError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectMode {
    /// Randomized exhaustive backtracking over internal vertices.
    #[default]
    Plain,
    /// Climb up from both ends, then bridge through a middle pair.
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectorParams {
    pub alpha: f64,
    #[serde(rename = "L")]
    pub length: usize,
    pub m: usize,
    pub budget: SearchBudget,
    pub seed: u64,
    pub mode: ConnectMode,
}

/// Smallest even integer `>= 1/alpha + 1`.
pub fn middle_walk_parameter(alpha: f64) -> usize {
    let m = (1.0 / alpha + 1.0 - 1e-9).ceil() as usize;
    m + m % 2
}

impl ConnectorParams {
    pub fn new(alpha: f64, length: usize, seed: u64) -> Self {
        ConnectorParams {
            alpha,
            length,
            m: middle_walk_parameter(alpha),
            budget: SearchBudget::nodes(2_000_000),
            seed,
            mode: ConnectMode::Plain,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check_alpha(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(ConnectorError::InvalidParams(format!(
                "alpha must lie in (0, 1/2), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Length bookkeeping for the structured mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredPlan {
    pub climb_steps: usize,
    pub m: usize,
    pub length: usize,
    /// True when `2/alpha` is not an integer and was rounded up.
    pub rounded: bool,
}

pub fn structured_plan(alpha: f64, m: usize) -> StructuredPlan {
    let exact = 2.0 / alpha;
    let climb_steps = (exact - 1e-9).ceil() as usize;
    StructuredPlan {
        climb_steps,
        m,
        length: 2 * climb_steps + 3 * m + 6,
        rounded: (exact - exact.round()).abs() > 1e-9,
    }
}

/// Lower bound on the `i`-th walk vertex (1-based, `i >= 3`):
/// `min(floor(alpha n (i-2) / 4), floor(n/2)) + floor(alpha n / 4)`.
pub fn climb_bound(n: usize, alpha: f64, i: usize) -> usize {
    let rise = scaled_floor(alpha * (i - 2) as f64 / 4.0, n);
    rise.min(n / 2) + scaled_floor(alpha / 4.0, n)
}

fn climb(
    h: &Hypergraph3,
    start: OrderedPair,
    alpha: f64,
    steps: usize,
    restrict: Option<&VertexSet>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vertex>> {
    let n = h.n();
    let mut seq = vec![start.first, start.second];
    let mut used = VertexSet::from_iter_with(n, seq.iter().copied());
    for i in 3..=steps + 2 {
        let (a, b) = (seq[i - 3], seq[i - 2]);
        let lo = climb_bound(n, alpha, i);
        let cand: Vec<Vertex> = h
            .neighbor_iter(a, b)
            .filter(|&v| v >= lo)
            .filter(|&v| restrict.is_none_or(|r| r.contains(v) && !used.contains(v)))
            .collect();
        if cand.is_empty() {
            return Err(ConnectorError::Stuck {
                index: i,
                walk: TightWalk::new(seq),
            });
        }
        let v = cand[rng.gen_range(0..cand.len())];
        used.insert(v);
        seq.push(v);
    }
    Ok(seq)
}

/// Extends `start` by `steps` vertices, each chosen uniformly among the
/// common neighbours of the last two that respect [`climb_bound`].
pub fn climb_up_walk(h: &Hypergraph3, start: OrderedPair, params: &ConnectorParams, steps: usize) -> Result<TightWalk> {
    params.check_alpha()?;
    if steps == 0 {
        return Err(ConnectorError::ZeroSteps);
    }
    for v in [start.first, start.second] {
        if v == 0 || v > h.n() {
            return Err(OracleError::OutOfRange(v).into());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    climb(h, start, params.alpha, steps, None, &mut rng).map(TightWalk::new)
}

/// True iff every walk vertex from the third on respects [`climb_bound`].
pub fn satisfies_climb_bound(n: usize, alpha: f64, walk: &TightWalk) -> bool {
    walk.vertices()
        .iter()
        .enumerate()
        .skip(2)
        .all(|(idx, &v)| v >= climb_bound(n, alpha, idx + 1))
}

enum Step {
    Found,
    Exhausted,
    OutOfBudget,
}

/// Backtracking over internal positions, each with its own candidate set.
struct SlotSearch<'a> {
    h: &'a Hypergraph3,
    to: OrderedPair,
    slots: &'a [VertexSet],
    used: VertexSet,
    seq: Vec<Vertex>,
    meter: Meter,
    rng: ChaCha8Rng,
}

impl SlotSearch<'_> {
    fn rec(&mut self) -> Step {
        if !self.meter.tick() {
            return Step::OutOfBudget;
        }
        let k = self.seq.len();
        let (a, b) = (self.seq[k - 2], self.seq[k - 1]);
        let (w, z) = (self.to.first, self.to.second);
        let depth = k - 2;
        let r = self.slots.len();
        if depth == r {
            if self.h.has_edge(a, b, w) && self.h.has_edge(b, w, z) {
                return Step::Found;
            }
            return Step::Exhausted;
        }
        let mut cand = self.slots[depth].clone();
        cand.difference_with(self.used.words());
        cand.intersect_with(self.h.neighbors(a, b));
        if depth + 1 == r {
            cand.intersect_with(self.h.neighbors(b, w));
            cand.intersect_with(self.h.neighbors(w, z));
        } else {
            let mut last = self.slots[r - 1].clone();
            last.difference_with(self.used.words());
            if and_count(last.words(), self.h.neighbors(w, z)) == 0 {
                return Step::Exhausted;
            }
        }
        let mut order = cand.to_vec();
        order.shuffle(&mut self.rng);
        for c in order {
            self.seq.push(c);
            self.used.insert(c);
            match self.rec() {
                Step::Exhausted => {}
                other => return other,
            }
            self.used.remove(c);
            self.seq.pop();
        }
        Step::Exhausted
    }
}

fn slot_search(
    h: &Hypergraph3,
    from: OrderedPair,
    to: OrderedPair,
    slots: &[VertexSet],
    budget: SearchBudget,
    seed: u64,
) -> Result<TightPath> {
    let used = VertexSet::from_iter_with(h.n(), [from.first, from.second, to.first, to.second]);
    let mut s = SlotSearch {
        h,
        to,
        slots,
        used,
        seq: vec![from.first, from.second],
        meter: Meter::new(budget),
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    match s.rec() {
        Step::Found => {
            let mut v = s.seq;
            v.push(to.first);
            v.push(to.second);
            Ok(TightPath::new(v))
        }
        Step::Exhausted => Err(ConnectorError::NotFound {
            exhausted_search: true,
            nodes: s.meter.nodes,
        }),
        Step::OutOfBudget => Err(ConnectorError::NotFound {
            exhausted_search: false,
            nodes: s.meter.nodes,
        }),
    }
}

/// A tight path of length `length` from `from` to `to` whose internal
/// vertices lie in `allowed`.
///
/// In plain mode a failure with `exhausted_search` set proves that no such
/// path exists.
pub fn connect_pairs(
    h: &Hypergraph3,
    from: OrderedPair,
    to: OrderedPair,
    length: usize,
    allowed: &VertexSet,
    params: &ConnectorParams,
) -> Result<TightPath> {
    check_connection_input(h, from, to, length, allowed)?;
    params.budget.validate()?;
    match params.mode {
        ConnectMode::Plain => {
            let slots = vec![allowed.clone(); length - 2];
            slot_search(h, from, to, &slots, params.budget, params.seed)
        }
        ConnectMode::Structured => connect_structured(h, from, to, length, allowed, params),
    }
}

const STRUCTURED_ATTEMPTS: u64 = 32;
const MIDDLE_PAIR_SAMPLES: usize = 64;

fn connect_structured(
    h: &Hypergraph3,
    from: OrderedPair,
    to: OrderedPair,
    length: usize,
    allowed: &VertexSet,
    params: &ConnectorParams,
) -> Result<TightPath> {
    params.check_alpha()?;
    if !params.m.is_multiple_of(2) || params.m == 0 {
        return Err(ConnectorError::InvalidParams(format!(
            "m must be even and positive, got {}",
            params.m
        )));
    }
    let plan = structured_plan(params.alpha, params.m);
    if length != plan.length {
        return Err(ConnectorError::StructuredLength {
            expected: plan.length,
            got: length,
        });
    }
    let n = h.n();
    let half = n / 2;
    let mut nodes = 0u64;
    for attempt in 0..STRUCTURED_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(params.seed, attempt));
        let Ok(left) = climb(h, from, params.alpha, plan.climb_steps, Some(allowed), &mut rng) else {
            continue;
        };
        let mut rest = allowed.clone();
        for &v in &left[2..] {
            rest.remove(v);
        }
        let Ok(right) = climb(h, to.reversed(), params.alpha, plan.climb_steps, Some(&rest), &mut rng) else {
            continue;
        };
        for &v in &right[2..] {
            rest.remove(v);
        }
        let k = left.len();
        let x = OrderedPair::new(left[k - 2], left[k - 1]).expect("distinct");
        let y = OrderedPair::new(right[k - 1], right[k - 2]).expect("distinct");

        // vertices of the upper half in the link of each climbed pair
        let upper = |p: OrderedPair| {
            let mut s = h.neighbor_set(p.first, p.second);
            s.intersect_with(rest.words());
            for v in 1..half.min(n + 1) {
                s.remove(v);
            }
            s
        };
        let (u1, u2) = (upper(x), upper(y));
        if u1.is_empty() || u2.is_empty() {
            continue;
        }
        // middle pair maximizing the smaller of its two link intersections
        let pool = rest.to_vec();
        if pool.len() < 2 {
            break;
        }
        let mut best: Option<(usize, Vertex, Vertex)> = None;
        for _ in 0..MIDDLE_PAIR_SAMPLES {
            let a = pool[rng.gen_range(0..pool.len())];
            let b = pool[rng.gen_range(0..pool.len())];
            if a == b {
                continue;
            }
            let score = and_count(h.neighbors(a, b), u1.words()).min(and_count(h.neighbors(a, b), u2.words()));
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, a, b));
            }
        }
        let Some((_, a, b)) = best else { continue };
        let mut free = rest.clone();
        free.remove(a);
        free.remove(b);
        let only = |v: Vertex| VertexSet::from_iter_with(n, [v]);
        let mut slots = Vec::with_capacity(3 * params.m + 4);
        for _ in 0..params.m / 2 {
            slots.push(u1.clone());
            slots.push(free.clone());
            slots.push(free.clone());
        }
        slots.push(u1.clone());
        slots.push(only(a));
        slots.push(only(b));
        for _ in 0..params.m / 2 {
            slots.push(u2.clone());
            slots.push(free.clone());
            slots.push(free.clone());
        }
        slots.push(u2.clone());
        let budget = SearchBudget {
            max_nodes: params.budget.max_nodes.saturating_sub(nodes).max(1),
            ..params.budget
        };
        match slot_search(h, x, y, &slots, budget, rng.gen()) {
            Ok(mid) => {
                let mut v = left.clone();
                v.extend_from_slice(&mid.vertices()[2..mid.vertex_count() - 2]);
                v.extend(right.iter().rev());
                return Ok(TightPath::new(v));
            }
            Err(ConnectorError::NotFound { nodes: used, .. }) => {
                nodes += used;
                if nodes >= params.budget.max_nodes {
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    // the structured search never proves nonexistence
    Err(ConnectorError::NotFound {
        exhausted_search: false,
        nodes,
    })
}

/// A failed verification probe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub from: OrderedPair,
    pub to: OrderedPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub members: Vec<Vertex>,
    pub theta: f64,
    #[serde(rename = "L")]
    pub length: usize,
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed_probes: Vec<Probe>,
}

impl Reservoir {
    pub fn member_set(&self, n: usize) -> VertexSet {
        VertexSet::from_iter_with(n, self.members.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub const RESERVOIR_PROBES: usize = 20;
const RESAMPLE_ATTEMPTS: usize = 100;

/// Size window `[theta^2 n / 2, theta^2 n]` a reservoir must fall in.
pub fn reservoir_bounds(theta: f64, n: usize) -> (f64, f64) {
    let t = theta * theta * n as f64;
    (t / 2.0, t)
}

fn random_probe(n: usize, rng: &mut ChaCha8Rng) -> Probe {
    let picks = rand::seq::index::sample(rng, n, 4);
    let v: Vec<Vertex> = picks.iter().map(|i| i + 1).collect();
    Probe {
        from: OrderedPair::new(v[0], v[1]).expect("distinct"),
        to: OrderedPair::new(v[2], v[3]).expect("distinct"),
    }
}

/// Samples each vertex with probability `(1 - 1/(10L)) theta^2`, resampling
/// until the size lands in [`reservoir_bounds`], then probes the
/// connect-through property on random disjoint pair-pairs.
pub fn sample_reservoir(h: &Hypergraph3, theta: f64, length: usize, params: &ConnectorParams) -> Result<Reservoir> {
    let n = h.n();
    let (lo, hi) = reservoir_bounds(theta, n);
    if !(theta > 0.0 && theta < 1.0) {
        return Err(ConnectorError::InvalidParams(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    if hi < 8.0 - 1e-9 {
        return Err(ConnectorError::ReservoirTooSmall { value: hi });
    }
    if length < 3 {
        return Err(ConnectorError::InvalidParams(format!(
            "reservoir length must be >= 3, got {length}"
        )));
    }
    let p = (1.0 - 1.0 / (10.0 * length as f64)) * theta * theta;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut members = None;
    for _ in 0..RESAMPLE_ATTEMPTS {
        let r: Vec<Vertex> = (1..=n).filter(|_| rng.gen_bool(p)).collect();
        let size = r.len() as f64;
        if size >= lo - 1e-9 && size <= hi + 1e-9 {
            members = Some(r);
            break;
        }
    }
    let members = members.ok_or(ConnectorError::ResampleCapExceeded {
        lo,
        hi,
        attempts: RESAMPLE_ATTEMPTS,
    })?;
    let set = VertexSet::from_iter_with(n, members.iter().copied());
    let mut failed = Vec::new();
    for k in 0..RESERVOIR_PROBES {
        let probe = random_probe(n, &mut rng);
        let mut allowed = set.clone();
        for v in [probe.from.first, probe.from.second, probe.to.first, probe.to.second] {
            allowed.remove(v);
        }
        let pp = params.with_seed(sub_seed(params.seed, 1000 + k as u64));
        if connect_pairs(h, probe.from, probe.to, length, &allowed, &pp).is_err() {
            failed.push(probe);
        }
    }
    Ok(Reservoir {
        members,
        theta,
        length,
        verified: failed.is_empty(),
        failed_probes: failed,
    })
}

/// Connects through `r` avoiding `excluded`, with length `r.length`.
pub fn connect_through_reservoir(
    h: &Hypergraph3,
    from: OrderedPair,
    to: OrderedPair,
    r: &Reservoir,
    excluded: &VertexSet,
    params: &ConnectorParams,
) -> Result<TightPath> {
    let n = h.n();
    let warn_at = 2.0 * r.theta.powi(4) * n as f64;
    if excluded.len() as f64 > warn_at {
        warn!(
            "excluding {} reservoir vertices, above 2 theta^4 n = {warn_at:.2}",
            excluded.len()
        );
    }
    let mut allowed = r.member_set(n);
    allowed.difference_with(excluded.words());
    for v in [from.first, from.second, to.first, to.second] {
        allowed.remove(v);
    }
    connect_pairs(h, from, to, r.length, &allowed, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::complete;
    use crate::hypergraph::{validate_tight_path, validate_tight_walk};
    use crate::oracle::enumerate_connecting_paths;

    fn pair(a: usize, b: usize) -> OrderedPair {
        OrderedPair::new(a, b).unwrap()
    }

    #[test]
    fn climb_in_complete_graph_reaches_upper_half() {
        let h = complete(20).unwrap();
        let params = ConnectorParams::new(0.2, 5, 3);
        let w = climb_up_walk(&h, pair(1, 2), &params, 10).unwrap();
        assert_eq!(w.vertices().len(), 12);
        assert!(validate_tight_walk(&h, &w).unwrap().is_valid());
        assert!(satisfies_climb_bound(20, 0.2, &w));
        let v = w.vertices();
        assert!(v[10] >= 10 && v[11] >= 10, "{v:?}");
    }

    #[test]
    fn climb_errors() {
        let h = complete(20).unwrap();
        let params = ConnectorParams::new(0.2, 5, 3);
        assert_eq!(
            climb_up_walk(&h, pair(1, 2), &params, 0),
            Err(ConnectorError::ZeroSteps)
        );
        let e = Hypergraph3::empty(20).unwrap();
        match climb_up_walk(&e, pair(1, 2), &params, 4) {
            Err(ConnectorError::Stuck { index: 3, walk }) => {
                assert_eq!(walk.vertices(), &[1, 2])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plain_connection_is_in_oracle_list() {
        let h = complete(8).unwrap();
        let allowed = VertexSet::from_iter_with(8, [3, 4, 5, 6]);
        let params = ConnectorParams::new(0.2, 4, 9);
        let p = connect_pairs(&h, pair(1, 2), pair(7, 8), 4, &allowed, &params).unwrap();
        let all = enumerate_connecting_paths(&h, pair(1, 2), pair(7, 8), 4, &allowed).unwrap();
        assert!(all.contains(&p));
        assert!(matches!(
            connect_pairs(&h, pair(1, 2), pair(1, 3), 4, &allowed, &params),
            Err(ConnectorError::Input(OracleError::PairsNotDisjoint(..)))
        ));
    }

    #[test]
    fn exhausted_search_is_reported() {
        let h = Hypergraph3::empty(8).unwrap();
        let allowed = VertexSet::from_iter_with(8, [3, 4, 5, 6]);
        let params = ConnectorParams::new(0.2, 4, 0);
        assert!(matches!(
            connect_pairs(&h, pair(1, 2), pair(7, 8), 4, &allowed, &params),
            Err(ConnectorError::NotFound {
                exhausted_search: true,
                ..
            })
        ));
    }

    #[test]
    fn structured_mode_on_complete_graph() {
        let h = complete(60).unwrap();
        let mut params = ConnectorParams::new(0.25, 0, 5);
        params.mode = ConnectMode::Structured;
        let plan = structured_plan(0.25, params.m);
        assert_eq!(params.m, 6);
        assert_eq!(plan.length, 2 * 8 + 18 + 6);
        assert!(!plan.rounded);
        let mut allowed = VertexSet::full(60);
        for v in [1, 2, 3, 4] {
            allowed.remove(v);
        }
        let p = connect_pairs(&h, pair(1, 2), pair(3, 4), plan.length, &allowed, &params).unwrap();
        assert!(validate_tight_path(&h, &p).unwrap().is_valid());
        assert_eq!(p.len(), plan.length);
        assert_eq!(p.start_pair(), pair(1, 2));
        assert_eq!(p.end_pair(), pair(3, 4));
        assert!(matches!(
            connect_pairs(&h, pair(1, 2), pair(3, 4), 7, &allowed, &params),
            Err(ConnectorError::StructuredLength { .. })
        ));
        assert!(structured_plan(0.3, 6).rounded);
    }

    #[test]
    fn middle_parameter_is_even() {
        assert_eq!(middle_walk_parameter(0.2), 6);
        assert_eq!(middle_walk_parameter(0.25), 6);
        assert_eq!(middle_walk_parameter(0.15), 8);
        assert_eq!(middle_walk_parameter(0.1), 12);
    }

    #[test]
    fn reservoir_on_complete_and_empty() {
        let h = complete(200).unwrap();
        let params = ConnectorParams::new(0.2, 5, 1);
        let r = sample_reservoir(&h, 0.3, 5, &params).unwrap();
        assert!(r.verified);
        assert!((9..=18).contains(&r.len()), "{}", r.len());
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("L").is_some() && json.get("members").is_some());

        let e = Hypergraph3::empty(200).unwrap();
        let r = sample_reservoir(&e, 0.3, 5, &params).unwrap();
        assert!(!r.verified);
        assert_eq!(r.failed_probes.len(), RESERVOIR_PROBES);

        assert!(matches!(
            sample_reservoir(&h, 0.1, 5, &params),
            Err(ConnectorError::ReservoirTooSmall { .. })
        ));
    }

    #[test]
    fn excluding_whole_reservoir_blocks_connection() {
        let h = complete(100).unwrap();
        let params = ConnectorParams::new(0.2, 5, 2);
        let r = sample_reservoir(&h, 0.3, 5, &params).unwrap();
        let outside: Vec<_> = (1..=100).filter(|v| !r.members.contains(v)).take(4).collect();
        let (from, to) = (pair(outside[0], outside[1]), pair(outside[2], outside[3]));
        let ok = connect_through_reservoir(&h, from, to, &r, &VertexSet::new(100), &params).unwrap();
        assert!(ok.internal().iter().all(|v| r.members.contains(v)));
        let all = r.member_set(100);
        assert!(connect_through_reservoir(&h, from, to, &r, &all, &params).is_err());
    }
}
