//! Exhaustive reference searches.
//!
//! The cycle search extends a tight path anchored at vertex 1 and keeps the
//! last two vertices; candidates for the next vertex are the common
//! neighbourhood of that pair restricted to unvisited vertices. Reflections
//! are broken by requiring the second vertex to be smaller than the last, so
//! every cycle is met exactly once and the first witness found is the
//! lexicographically smallest canonical cycle.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::{Ones, VertexSet};
use crate::hypergraph::{Hypergraph3, OrderedPair, TightCycle, TightPath, Vertex};

/// Largest n the cycle search supports (vertex sets are single words).
pub const MAX_ORACLE_N: usize = 62;

const CHECK_EVERY: u64 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("cycle search needs n >= 4, got {0}")]
    TooSmall(usize),
    #[error("cycle search supports n <= {MAX_ORACLE_N}, got {0}")]
    TooLarge(usize),
    #[error("budget must allow at least one node")]
    EmptyBudget,
    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExhausted { nodes: u64 },
    #[error("pairs {0} and {1} are not disjoint")]
    PairsNotDisjoint(OrderedPair, OrderedPair),
    #[error("connecting path length must be >= 2, got {0}")]
    LengthTooShort(usize),
    #[error("allowed internal set contains endpoint {0}")]
    AllowedHitsEndpoint(Vertex),
    #[error("vertex {0} out of range")]
    OutOfRange(Vertex),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub time_limit: Option<f64>,
}

impl SearchBudget {
    pub fn nodes(max_nodes: u64) -> Self {
        SearchBudget {
            max_nodes,
            time_limit: None,
        }
    }

    pub fn unlimited() -> Self {
        Self::nodes(u64::MAX)
    }

    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = Some(seconds);
        self
    }

    pub(crate) fn validate(&self) -> Result<(), OracleError> {
        if self.max_nodes == 0 {
            Err(OracleError::EmptyBudget)
        } else {
            Ok(())
        }
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self::nodes(50_000_000)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "cycle", rename_all = "snake_case")]
pub enum CycleVerdict {
    Found(TightCycle),
    None,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSearch {
    pub verdict: CycleVerdict,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCount {
    pub count: u64,
    pub nodes: u64,
}

pub(crate) struct Meter {
    pub(crate) nodes: u64,
    budget: SearchBudget,
    start: Instant,
    pub(crate) out_of_budget: bool,
}

impl Meter {
    pub(crate) fn new(budget: SearchBudget) -> Self {
        Meter {
            nodes: 0,
            budget,
            start: Instant::now(),
            out_of_budget: false,
        }
    }

    /// Counts one expanded node; returns false once the budget is spent.
    #[inline]
    pub(crate) fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            self.out_of_budget = true;
        } else if self.nodes.is_multiple_of(CHECK_EVERY) {
            if let Some(t) = self.budget.time_limit {
                if self.start.elapsed().as_secs_f64() > t {
                    self.out_of_budget = true;
                }
            }
        }
        !self.out_of_budget
    }
}

struct CycleSearcher {
    n: usize,
    nb: Vec<u64>,
    path: Vec<Vertex>,
    meter: Meter,
    count: u64,
    stop_at_first: bool,
    found: Option<Vec<Vertex>>,
}

impl CycleSearcher {
    fn new(h: &Hypergraph3, budget: SearchBudget, stop_at_first: bool) -> Self {
        let n = h.n();
        let mut nb = vec![0u64; (n + 1) * (n + 1)];
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    nb[i * (n + 1) + j] = h.neighbors(i, j)[0];
                }
            }
        }
        CycleSearcher {
            n,
            nb,
            path: Vec::with_capacity(n),
            meter: Meter::new(budget),
            count: 0,
            stop_at_first,
            found: None,
        }
    }

    #[inline]
    fn nb(&self, i: Vertex, j: Vertex) -> u64 {
        self.nb[i * (self.n + 1) + j]
    }

    /// Every unvisited vertex must still be the middle of some edge whose
    /// other two vertices are available (unvisited, or a path end that can
    /// still be adjacent to it).
    fn feasible(&self, unvisited: u64, closing: u64) -> bool {
        let k = self.path.len();
        let ends =
            (1u64 << self.path[k - 1]) | (1u64 << self.path[k - 2]) | (1u64 << self.path[0]) | (1u64 << self.path[1]);
        let avail = unvisited | ends;
        // the final vertex must close back onto (1, x2)
        if unvisited & closing == 0 {
            return false;
        }
        for u in Ones::new(&[unvisited]) {
            let others = avail & !(1u64 << u);
            let mut ok = false;
            for w in Ones::new(&[others]) {
                if self.nb(u, w) & others & !(1u64 << w) != 0 {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return false;
            }
        }
        true
    }

    fn run(&mut self) {
        let n = self.n;
        let all: u64 = ((1u64 << (n + 1)) - 1) & !1;
        for x2 in 2..=n {
            if self.done() {
                return;
            }
            self.path.clear();
            self.path.push(1);
            self.path.push(x2);
            // last vertex: adjacent to (1, x2) and larger than x2
            let closing = self.nb(1, x2) & !((1u64 << (x2 + 1)) - 1);
            if closing == 0 {
                continue;
            }
            let unvisited = all & !(1 << 1) & !(1 << x2);
            self.extend(unvisited, closing);
        }
    }

    fn done(&self) -> bool {
        self.meter.out_of_budget || (self.stop_at_first && self.found.is_some())
    }

    fn extend(&mut self, unvisited: u64, closing: u64) {
        if !self.meter.tick() {
            return;
        }
        let k = self.path.len();
        let (a, b) = (self.path[k - 2], self.path[k - 1]);
        if unvisited == 0 {
            let (x1, x2) = (self.path[0], self.path[1]);
            if b > x2 && self.nb(a, b) >> x1 & 1 == 1 && self.nb(b, x1) >> x2 & 1 == 1 {
                self.count += 1;
                if self.found.is_none() {
                    self.found = Some(self.path.clone());
                }
            }
            return;
        }
        if k >= 3 && !self.feasible(unvisited, closing) {
            return;
        }
        let cand = self.nb(a, b) & unvisited;
        for c in Ones::new(&[cand]) {
            // only the final vertex may come from the closing set's constraint
            if unvisited == 1u64 << c && closing >> c & 1 == 0 {
                continue;
            }
            self.path.push(c);
            self.extend(unvisited & !(1u64 << c), closing);
            self.path.pop();
            if self.done() {
                return;
            }
        }
    }
}

fn check_cycle_input(h: &Hypergraph3, budget: &SearchBudget) -> Result<(), OracleError> {
    budget.validate()?;
    if h.n() < 4 {
        return Err(OracleError::TooSmall(h.n()));
    }
    if h.n() > MAX_ORACLE_N {
        return Err(OracleError::TooLarge(h.n()));
    }
    Ok(())
}

/// Decides tight Hamiltonicity exhaustively. `None` is returned only after
/// the whole search tree has been explored.
pub fn find_tight_hamiltonian_cycle(h: &Hypergraph3, budget: SearchBudget) -> Result<CycleSearch, OracleError> {
    check_cycle_input(h, &budget)?;
    let mut s = CycleSearcher::new(h, budget, true);
    s.run();
    let verdict = match s.found.take() {
        Some(v) => CycleVerdict::Found(TightCycle::new(v).expect("n >= 4").canonical()),
        None if s.meter.out_of_budget => CycleVerdict::BudgetExhausted,
        None => CycleVerdict::None,
    };
    Ok(CycleSearch {
        verdict,
        nodes: s.meter.nodes,
    })
}

/// Number of tight Hamiltonian cycles up to rotation and reflection.
pub fn count_tight_hamiltonian_cycles(h: &Hypergraph3, budget: SearchBudget) -> Result<CycleCount, OracleError> {
    check_cycle_input(h, &budget)?;
    let mut s = CycleSearcher::new(h, budget, false);
    s.run();
    if s.meter.out_of_budget {
        return Err(OracleError::BudgetExhausted { nodes: s.meter.nodes });
    }
    Ok(CycleCount {
        count: s.count,
        nodes: s.meter.nodes,
    })
}

pub(crate) fn check_connection_input(
    h: &Hypergraph3,
    from: OrderedPair,
    to: OrderedPair,
    length: usize,
    allowed: &VertexSet,
) -> Result<(), OracleError> {
    if length < 2 {
        return Err(OracleError::LengthTooShort(length));
    }
    let ends = [from.first, from.second, to.first, to.second];
    if let Some(&v) = ends.iter().find(|&&v| v == 0 || v > h.n()) {
        return Err(OracleError::OutOfRange(v));
    }
    if !from.is_disjoint(&to) {
        return Err(OracleError::PairsNotDisjoint(from, to));
    }
    if let Some(&v) = ends.iter().find(|&&v| allowed.contains(v)) {
        return Err(OracleError::AllowedHitsEndpoint(v));
    }
    if let Some(v) = allowed.iter().find(|&v| v == 0 || v > h.n()) {
        return Err(OracleError::OutOfRange(v));
    }
    Ok(())
}

/// All tight paths `x y u_1 .. u_{L-2} w z` of length `length` with internal
/// vertices drawn from `allowed`, in lexicographic order of the internals.
pub fn enumerate_connecting_paths(
    h: &Hypergraph3,
    from: OrderedPair,
    to: OrderedPair,
    length: usize,
    allowed: &VertexSet,
) -> Result<Vec<TightPath>, OracleError> {
    check_connection_input(h, from, to, length, allowed)?;
    let mut seq = vec![from.first, from.second];
    let mut out = Vec::new();
    let mut free = allowed.clone();
    enumerate_rec(h, to, length - 2, &mut seq, &mut free, &mut out);
    Ok(out)
}

fn enumerate_rec(
    h: &Hypergraph3,
    to: OrderedPair,
    remaining: usize,
    seq: &mut Vec<Vertex>,
    free: &mut VertexSet,
    out: &mut Vec<TightPath>,
) {
    let k = seq.len();
    let (a, b) = (seq[k - 2], seq[k - 1]);
    if remaining == 0 {
        if h.has_edge(a, b, to.first) && h.has_edge(b, to.first, to.second) {
            let mut v = seq.clone();
            v.push(to.first);
            v.push(to.second);
            out.push(TightPath::new(v));
        }
        return;
    }
    let mut cand = free.clone();
    cand.intersect_with(h.neighbors(a, b));
    for c in cand.iter() {
        seq.push(c);
        free.remove(c);
        enumerate_rec(h, to, remaining - 1, seq, free, out);
        free.insert(c);
        seq.pop();
    }
}
