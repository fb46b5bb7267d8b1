use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matching::PairSet;
use super::quasi::{quasirandomness_defect, QuasiMode, TripartiteView};
use super::{CoverError, CoverParams};
use crate::hypergraph::{Hypergraph3, Vertex};
use crate::sub_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletStats {
    /// Part indices `i < j < k`, 1-based.
    pub triple: [usize; 3],
    pub crossing: usize,
    pub density: f64,
    /// Sampled defect measured against the triplet's own density.
    pub defect: f64,
    pub dense: bool,
    pub irregular: bool,
}

/// Interval partition of `[n]` with per-triplet flags and the cleaned
/// reduced graph `K` on the part indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedHypergraph {
    pub n: usize,
    pub t: usize,
    /// Part size `floor(n / t)`.
    pub m: usize,
    /// `parts[i - 1]` is part `i`, a run of consecutive vertices.
    pub parts: Vec<Vec<Vertex>>,
    /// Remainder vertices at the top of `[n]`.
    pub v0: Vec<Vertex>,
    pub dense_threshold: usize,
    pub triplets: Vec<TripletStats>,
    pub dense: Vec<[usize; 3]>,
    pub irregular: Vec<[usize; 3]>,
    pub malicious_pairs: PairSet,
    pub malicious_vertices: Vec<usize>,
    pub k_edges: Vec<[usize; 3]>,
}

impl ReducedHypergraph {
    /// `K` as a 3-graph on `[t]`.
    pub fn k_graph(&self) -> Hypergraph3 {
        Hypergraph3::new(self.t, self.k_edges.iter().copied()).expect("t >= 3 and edges in range")
    }

    pub fn part(&self, i: usize) -> &[Vertex] {
        &self.parts[i - 1]
    }
}

/// Number of `edges` containing both `i` and `j`.
fn pair_count(edges: &[[usize; 3]], i: usize, j: usize) -> usize {
    edges.iter().filter(|e| e.contains(&i) && e.contains(&j)).count()
}

/// Splits `[n]` into `t` consecutive parts of size `floor(n/t)` and flags
/// each part triplet: dense when its crossing edge count reaches
/// `max(1, floor(alpha' m^3 / 2))`, irregular when its sampled defect at its
/// own density exceeds `delta`. Pairs of parts lying in more than
/// `floor(sqrt(delta) t)` irregular triplets are malicious, and so is every
/// part in more than `floor(delta^(1/4) t)` malicious pairs. `K` keeps the
/// dense, regular triplets avoiding malicious parts.
pub fn reduce(h: &Hypergraph3, params: &CoverParams) -> Result<ReducedHypergraph, CoverError> {
    params.validate()?;
    let n = h.n();
    let t = params.t;
    if 3 * t > n {
        return Err(CoverError::InvalidParams(format!(
            "t = {t} exceeds n / 3 = {}",
            n as f64 / 3.0
        )));
    }
    let m = n / t;
    let parts: Vec<Vec<Vertex>> = (0..t).map(|i| (i * m + 1..=(i + 1) * m).collect()).collect();
    let v0: Vec<Vertex> = (t * m + 1..=n).collect();
    if v0.len() as f64 > params.delta * n as f64 {
        log::warn!(
            "remainder part has {} > delta n = {:.2} vertices",
            v0.len(),
            params.delta * n as f64
        );
    }
    let dense_threshold = ((params.alpha_prime * (m * m * m) as f64 / 2.0 + 1e-9).floor() as usize).max(1);

    let mut triples = Vec::new();
    for i in 1..=t {
        for j in i + 1..=t {
            for k in j + 1..=t {
                triples.push([i, j, k]);
            }
        }
    }
    let triplets: Vec<TripletStats> = triples
        .par_iter()
        .enumerate()
        .map(|(idx, &[i, j, k])| {
            let view = TripartiteView::new(h, parts[i - 1].clone(), parts[j - 1].clone(), parts[k - 1].clone())
                .expect("interval parts are disjoint and nonempty");
            let crossing = view.crossing_edges();
            let density = crossing as f64 / (m * m * m) as f64;
            let mode = QuasiMode::Sampled {
                k: params.quasi_samples,
                seed: sub_seed(params.seed, idx as u64),
            };
            let defect = quasirandomness_defect(&view, density, mode).expect("sampled mode has no size limit");
            TripletStats {
                triple: [i, j, k],
                crossing,
                density,
                defect,
                dense: crossing >= dense_threshold,
                irregular: defect > params.delta,
            }
        })
        .collect();

    let dense: Vec<[usize; 3]> = triplets.iter().filter(|s| s.dense).map(|s| s.triple).collect();
    let irregular: Vec<[usize; 3]> = triplets.iter().filter(|s| s.irregular).map(|s| s.triple).collect();
    let pair_cap = (params.delta.sqrt() * t as f64 + 1e-9).floor() as usize;
    let mut malicious_pairs = PairSet::new();
    for i in 1..=t {
        for j in i + 1..=t {
            if pair_count(&irregular, i, j) > pair_cap {
                malicious_pairs.insert(i, j);
            }
        }
    }
    let vertex_cap = (params.delta.powf(0.25) * t as f64 + 1e-9).floor() as usize;
    let malicious_vertices: Vec<usize> = (1..=t)
        .filter(|&i| malicious_pairs.iter().filter(|&(a, b)| a == i || b == i).count() > vertex_cap)
        .collect();
    let k_edges = triplets
        .iter()
        .filter(|s| s.dense && !s.irregular && s.triple.iter().all(|v| !malicious_vertices.contains(v)))
        .map(|s| s.triple)
        .collect();
    Ok(ReducedHypergraph {
        n,
        t,
        m,
        parts,
        v0,
        dense_threshold,
        triplets,
        dense,
        irregular,
        malicious_pairs,
        malicious_vertices,
        k_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete, example_half};

    fn params(t: usize) -> CoverParams {
        CoverParams {
            t,
            quasi_samples: 64,
            ..CoverParams::default()
        }
    }

    #[test]
    fn complete_thirty() {
        let h = complete(30).unwrap();
        let r = reduce(&h, &params(5)).unwrap();
        assert_eq!(r.m, 6);
        assert!(r.v0.is_empty());
        assert_eq!(r.dense.len(), 10);
        assert!(r.irregular.is_empty());
        assert_eq!(r.k_graph(), complete(5).unwrap());
        for s in &r.triplets {
            assert_eq!(s.crossing, 216);
            assert_eq!(s.defect, 0.0);
        }
    }

    #[test]
    fn empty_graph() {
        let h = Hypergraph3::empty(30).unwrap();
        let r = reduce(&h, &params(5)).unwrap();
        assert!(r.dense.is_empty());
        assert!(r.k_edges.is_empty());
    }

    #[test]
    fn half_example_dense_flags() {
        let h = example_half(30).unwrap();
        let r = reduce(&h, &params(6)).unwrap();
        // parts 1..3 lie in X = [15], parts 4..6 in Y
        for s in &r.triplets {
            let in_y = s.triple.iter().filter(|&&i| i > 3).count();
            assert_eq!(s.crossing == 0, in_y == 2, "{:?}", s.triple);
        }
    }

    #[test]
    fn too_many_parts() {
        let h = complete(12).unwrap();
        assert!(matches!(reduce(&h, &params(5)), Err(CoverError::InvalidParams(_))));
    }

    #[test]
    fn deterministic() {
        let h = crate::constructions::random_uniform(24, 0.6, 2).unwrap();
        assert_eq!(reduce(&h, &params(4)).unwrap(), reduce(&h, &params(4)).unwrap());
    }
}
