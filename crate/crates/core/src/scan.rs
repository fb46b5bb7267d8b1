//! Search for counterexamples to pair-degree matrices: 3-graphs meeting the
//! matrix pointwise that have no tight Hamiltonian cycle.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{complete, example_half, example_one_third};
use crate::hypergraph::{DegreeMatrix, Hypergraph3, Vertex};
use crate::oracle::{find_tight_hamiltonian_cycle, CycleVerdict, SearchBudget, MAX_ORACLE_N};
use crate::sub_seed;

pub const MAX_SCAN_N: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("scan needs 4 <= n <= {MAX_SCAN_N}, got {0}")]
    BadN(usize),
    #[error("family {0} has an empty parameter grid")]
    EmptyFamily(&'static str),
}

/// A family of candidate matrices, enumerated over the given grids. Entries
/// are clamped to `[0, n - 2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MatrixFamily {
    /// `d_ij = value`.
    Constant { values: Vec<usize> },
    /// `d_ij = min(i, j, cap) + shift`.
    MinShift { caps: Vec<usize>, shifts: Vec<i64> },
    /// `d_ij = low` when `min(i, j) <= threshold`, else `high`.
    Step {
        thresholds: Vec<usize>,
        lows: Vec<usize>,
        highs: Vec<usize>,
    },
}

impl MatrixFamily {
    /// `(matrix_id, matrix)` for every grid point.
    pub fn enumerate(&self, n: usize) -> Result<Vec<(String, DegreeMatrix)>, ScanError> {
        let clamp = |v: i64| v.clamp(0, n as i64 - 2) as usize;
        let mut out = Vec::new();
        match self {
            MatrixFamily::Constant { values } => {
                for &v in values {
                    out.push((format!("const({v})"), DegreeMatrix::from_fn(n, |_, _| clamp(v as i64))));
                }
                if out.is_empty() {
                    return Err(ScanError::EmptyFamily("constant"));
                }
            }
            MatrixFamily::MinShift { caps, shifts } => {
                for &cap in caps {
                    for &shift in shifts {
                        let m = DegreeMatrix::from_fn(n, |i, j| clamp(i.min(j).min(cap) as i64 + shift));
                        out.push((format!("min_shift(cap={cap},shift={shift})"), m));
                    }
                }
                if out.is_empty() {
                    return Err(ScanError::EmptyFamily("min_shift"));
                }
            }
            MatrixFamily::Step {
                thresholds,
                lows,
                highs,
            } => {
                for &t in thresholds {
                    for &lo in lows {
                        for &hi in highs {
                            let m = DegreeMatrix::from_fn(n, |i, j| clamp(if i.min(j) <= t { lo } else { hi } as i64));
                            out.push((format!("step(threshold={t},low={lo},high={hi})"), m));
                        }
                    }
                }
                if out.is_empty() {
                    return Err(ScanError::EmptyFamily("step"));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanBudget {
    /// Per oracle call.
    pub oracle: SearchBudget,
    /// Randomized minimal dominating graphs tried per matrix.
    pub random_candidates: usize,
    pub seed: u64,
}

impl Default for ScanBudget {
    fn default() -> Self {
        ScanBudget {
            oracle: SearchBudget::nodes(5_000_000),
            random_candidates: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    CounterexampleFound,
    NoCounterexampleWithinBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub matrix_id: String,
    pub classification: Classification,
    /// Where the witness came from: a template name or `random#k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_source: Option<String>,
    #[serde(skip)]
    pub witness: Option<Hypergraph3>,
    /// Candidates whose oracle search ran out of budget.
    pub inconclusive: usize,
    pub oracle_nodes: u64,
    pub seconds: f64,
}

/// A minimal graph dominating `d`, obtained by deleting the triples of the
/// complete graph in random order whenever the matrix stays dominated.
pub fn random_minimal_dominating(d: &DegreeMatrix, seed: u64) -> Hypergraph3 {
    let n = d.n();
    let k = complete(n).expect("n >= 3");
    let mut triples: Vec<[Vertex; 3]> = k.edges().to_vec();
    let mut deg = DegreeMatrix::from_fn(n, |_, _| n - 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    triples.shuffle(&mut rng);
    let mut kept = Vec::new();
    for [a, b, c] in triples {
        let pairs = [(a, b), (a, c), (b, c)];
        if pairs.iter().all(|&(x, y)| deg.get(x, y) > d.get(x, y)) {
            for (x, y) in pairs {
                deg.set(x, y, deg.get(x, y) - 1);
            }
        } else {
            kept.push([a, b, c]);
        }
    }
    Hypergraph3::new(n, kept).expect("valid triples")
}

fn templates(n: usize) -> Vec<(&'static str, Hypergraph3)> {
    let mut out = vec![("empty", Hypergraph3::empty(n).expect("n >= 3"))];
    if let Ok(h) = example_one_third(n) {
        out.push(("example_one_third", h));
    }
    if let Ok(h) = example_half(n) {
        out.push(("example_half", h));
    }
    out.push(("complete", complete(n).expect("n >= 3")));
    out
}

/// Dominance plus an oracle `none` verdict, rechecked from scratch.
pub fn verify_witness(d: &DegreeMatrix, h: &Hypergraph3, budget: SearchBudget) -> bool {
    d.is_dominated_by(h)
        && matches!(
            find_tight_hamiltonian_cycle(h, budget).map(|s| s.verdict),
            Ok(CycleVerdict::None)
        )
}

fn scan_matrix(n: usize, id: String, d: &DegreeMatrix, budget: &ScanBudget, index: u64) -> ScanRow {
    let clock = Instant::now();
    let mut nodes = 0u64;
    let mut inconclusive = 0;
    let mut candidates: Vec<(String, Hypergraph3)> =
        templates(n).into_iter().map(|(s, h)| (s.to_string(), h)).collect();
    let base = sub_seed(budget.seed, index);
    for k in 0..budget.random_candidates {
        candidates.push((
            format!("random#{k}"),
            random_minimal_dominating(d, sub_seed(base, k as u64)),
        ));
    }
    let mut found = None;
    for (source, h) in candidates {
        if !d.is_dominated_by(&h) {
            continue;
        }
        match find_tight_hamiltonian_cycle(&h, budget.oracle) {
            Ok(s) => {
                nodes += s.nodes;
                match s.verdict {
                    CycleVerdict::None => {
                        if verify_witness(d, &h, budget.oracle) {
                            found = Some((source, h));
                            break;
                        }
                        log::error!("witness {source} for {id} failed re-verification");
                    }
                    CycleVerdict::BudgetExhausted => inconclusive += 1,
                    CycleVerdict::Found(_) => {}
                }
            }
            Err(e) => {
                log::warn!("oracle rejected candidate {source}: {e}");
                inconclusive += 1;
            }
        }
    }
    let (classification, witness_source, witness) = match found {
        Some((s, h)) => (Classification::CounterexampleFound, Some(s), Some(h)),
        None => (Classification::NoCounterexampleWithinBudget, None, None),
    };
    ScanRow {
        matrix_id: id,
        classification,
        witness_source,
        witness,
        inconclusive,
        oracle_nodes: nodes,
        seconds: clock.elapsed().as_secs_f64(),
    }
}

/// Classifies every matrix of `family`, trying the extremal templates and
/// then randomized minimal dominating graphs. Matrices are processed in
/// parallel; rows keep the enumeration order.
pub fn hamiltonian_matrix_scan(
    n: usize,
    family: &MatrixFamily,
    budget: &ScanBudget,
) -> Result<Vec<ScanRow>, ScanError> {
    if !(4..=MAX_SCAN_N.min(MAX_ORACLE_N)).contains(&n) {
        return Err(ScanError::BadN(n));
    }
    use rayon::prelude::*;
    let matrices = family.enumerate(n)?;
    Ok(matrices
        .into_par_iter()
        .enumerate()
        .map(|(k, (id, d))| scan_matrix(n, id, &d, budget, k as u64))
        .collect())
}
