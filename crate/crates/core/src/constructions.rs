//! Extremal examples and random instance generators.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{posa_requirement, scaled_floor, Hypergraph3, Vertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("{kind} needs n >= {min}, got {n}")]
    TooSmall { kind: &'static str, n: usize, min: usize },
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("alpha must lie in (0, 1/2), got {0}")]
    InvalidAlpha(f64),
    #[error("no 3-graph on {n} vertices meets the condition with alpha = {alpha}: floor(n/2) + floor(alpha n) = {need} > n - 2")]
    Infeasible { n: usize, alpha: f64, need: usize },
    #[error("repair loop exceeded {0} steps")]
    RepairCapExceeded(usize),
    #[error("generator {0} requires parameter {1}")]
    MissingParameter(&'static str, &'static str),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

type Result<T> = std::result::Result<T, ConstructionError>;

fn lex_triples(n: usize) -> impl Iterator<Item = [Vertex; 3]> {
    (1..=n).flat_map(move |a| (a + 1..=n).flat_map(move |b| (b + 1..=n).map(move |c| [a, b, c])))
}

fn at_least(kind: &'static str, n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(ConstructionError::TooSmall { kind, n, min })
    } else {
        Ok(())
    }
}

/// All triples on `[n]`.
pub fn complete(n: usize) -> Result<Hypergraph3> {
    at_least("complete", n, 3)?;
    Ok(Hypergraph3::from_sorted_unique(n, lex_triples(n).collect()))
}

/// With `X = [ceil((n+1)/3)]`, all triples meeting `X` in 0, 1 or 3 vertices.
pub fn example_one_third(n: usize) -> Result<Hypergraph3> {
    at_least("example_one_third", n, 6)?;
    let x = (n + 1).div_ceil(3);
    let edges = lex_triples(n)
        .filter(|e| e.iter().filter(|&&v| v <= x).count() != 2)
        .collect();
    let h = Hypergraph3::from_sorted_unique(n, edges);
    for i in 1..=n {
        for j in i + 1..=n {
            let need = i.min(j).min(n / 2).saturating_sub(1);
            if h.codegree(i, j) < need {
                return Err(ConstructionError::SelfCheck(format!(
                    "d({i},{j}) = {} < {need}",
                    h.codegree(i, j)
                )));
            }
        }
    }
    Ok(h)
}

/// With `X = [floor(n/2)]` and `Y` the rest, all triples meeting `Y` in
/// 0, 1 or 3 vertices.
pub fn example_half(n: usize) -> Result<Hypergraph3> {
    at_least("example_half", n, 6)?;
    let x = n / 2;
    let edges = lex_triples(n)
        .filter(|e| e.iter().filter(|&&v| v > x).count() != 2)
        .collect();
    let h = Hypergraph3::from_sorted_unique(n, edges);
    let need = n.div_ceil(2) - 2;
    for i in 1..=n {
        for j in i + 1..=n {
            if h.codegree(i, j) < need {
                return Err(ConstructionError::SelfCheck(format!(
                    "d({i},{j}) = {} < {need}",
                    h.codegree(i, j)
                )));
            }
        }
    }
    Ok(h)
}

/// Each triple independently with probability `p`, visiting triples in
/// lexicographic order.
pub fn random_uniform(n: usize, p: f64, seed: u64) -> Result<Hypergraph3> {
    at_least("random_uniform", n, 3)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(ConstructionError::InvalidProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = lex_triples(n).filter(|_| rng.gen_bool(p)).collect();
    Ok(Hypergraph3::from_sorted_unique(n, edges))
}

fn sorted(mut t: [Vertex; 3]) -> [Vertex; 3] {
    t.sort_unstable();
    t
}

/// A random 3-graph satisfying the Posa-type condition for `alpha`.
///
/// Starts from `random_uniform(n, 0.8)` and repairs deficient pairs by adding
/// random missing triples through them.
pub fn random_posa(n: usize, alpha: f64, seed: u64) -> Result<Hypergraph3> {
    at_least("random_posa", n, 4)?;
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(ConstructionError::InvalidAlpha(alpha));
    }
    let need = n / 2 + scaled_floor(alpha, n);
    if need > n - 2 {
        return Err(ConstructionError::Infeasible { n, alpha, need });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: HashSet<[Vertex; 3]> = lex_triples(n).filter(|_| rng.gen_bool(0.8)).collect();
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let mut deg = vec![0usize; (n + 1) * (n + 1)];
    for &[a, b, c] in &edges {
        for (x, y) in [(a, b), (a, c), (b, c)] {
            deg[idx(x, y)] += 1;
        }
    }
    let cap = 10 * n * n * n;
    let mut steps = 0usize;
    for i in 1..=n {
        for j in i + 1..=n {
            let req = posa_requirement(i, j, n, alpha);
            while deg[idx(i, j)] < req {
                steps += 1;
                if steps > cap {
                    return Err(ConstructionError::RepairCapExceeded(cap));
                }
                let missing: Vec<Vertex> = (1..=n)
                    .filter(|&k| k != i && k != j && !edges.contains(&sorted([i, j, k])))
                    .collect();
                let k = missing[rng.gen_range(0..missing.len())];
                let e = sorted([i, j, k]);
                edges.insert(e);
                let [a, b, c] = e;
                for (x, y) in [(a, b), (a, c), (b, c)] {
                    deg[idx(x, y)] += 1;
                }
            }
        }
    }
    let mut list: Vec<_> = edges.into_iter().collect();
    list.sort_unstable();
    Ok(Hypergraph3::from_sorted_unique(n, list))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    ExampleOneThird,
    ExampleHalf,
    Complete,
    RandomUniform,
    RandomPosa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Hypergraph3> {
        match self.kind {
            GeneratorKind::ExampleOneThird => example_one_third(self.n),
            GeneratorKind::ExampleHalf => example_half(self.n),
            GeneratorKind::Complete => complete(self.n),
            GeneratorKind::RandomUniform => {
                let p = self
                    .p
                    .ok_or(ConstructionError::MissingParameter("random_uniform", "p"))?;
                random_uniform(self.n, p, self.seed)
            }
            GeneratorKind::RandomPosa => {
                let a = self
                    .alpha
                    .ok_or(ConstructionError::MissingParameter("random_posa", "alpha"))?;
                random_posa(self.n, a, self.seed)
            }
        }
    }
}
