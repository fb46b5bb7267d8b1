use serde::{Deserialize, Serialize};

use super::matching::find_large_matching;
use super::quasi::{cover_triplet_with_paths, TripartiteView};
use super::reduce::reduce;
use super::{CoverError, CoverParams};
use crate::absorption::AbsorbingPath;
use crate::bitset::VertexSet;
use crate::connector::{connect_pairs, connect_through_reservoir, ConnectorParams, Reservoir};
use crate::hypergraph::{validate_tight_path, Hypergraph3, TightPath, Vertex};
use crate::oracle::SearchBudget;
use crate::splice::{extend_ends, insert_into_path};
use crate::sub_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongPathParams {
    pub cover: CoverParams,
    pub alpha: f64,
    /// Length of connections routed through the reservoir.
    #[serde(rename = "L")]
    pub length: usize,
    pub budget: SearchBudget,
    pub seed: u64,
}

impl LongPathParams {
    pub fn new(alpha: f64, length: usize, seed: u64) -> Self {
        LongPathParams {
            cover: CoverParams {
                seed,
                ..CoverParams::default()
            },
            alpha,
            length,
            budget: SearchBudget::nodes(200_000),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongPath {
    pub path: TightPath,
    /// Vertices outside the reservoir and the absorbing path.
    pub eligible: usize,
    /// Eligible vertices on the path.
    pub covered: usize,
    pub coverage: f64,
    pub reservoir_used: Vec<Vertex>,
    /// Part count actually used by the reduction.
    pub t: usize,
    pub k_edges: usize,
    pub matched_triplets: Vec<[usize; 3]>,
    pub pieces: usize,
    pub skipped_pieces: usize,
}

fn stage(stage: &'static str, reason: impl ToString) -> CoverError {
    CoverError::Stage {
        stage,
        reason: reason.to_string(),
    }
}

/// Pieces and their concatenation all live in the labels of `h`.
struct Linker<'a> {
    h: &'a Hypergraph3,
    reservoir: &'a Reservoir,
    free: VertexSet,
    reservoir_used: VertexSet,
    params: &'a LongPathParams,
    calls: u64,
}

impl Linker<'_> {
    fn concat_ok(&self, q: &[Vertex], p: &[Vertex]) -> bool {
        let k = q.len();
        self.h.has_edge(q[k - 2], q[k - 1], p[0]) && self.h.has_edge(q[k - 1], p[0], p[1])
    }

    fn connector(&mut self) -> ConnectorParams {
        self.calls += 1;
        let mut c = ConnectorParams::new(self.params.alpha.clamp(1e-3, 0.499), self.params.length, 0);
        c.budget = self.params.budget;
        c.with_seed(sub_seed(self.params.seed, 7000 + self.calls))
    }

    /// Internal vertices joining the end of `q` to the start of `p`, trying a
    /// direct join, then 1 to 3 free vertices, then the reservoir.
    fn bridge(&mut self, q: &[Vertex], p: &[Vertex]) -> Option<(Vec<Vertex>, bool)> {
        if self.concat_ok(q, p) {
            return Some((Vec::new(), false));
        }
        let from = TightPath::new(q.to_vec()).end_pair();
        let to = TightPath::new(p.to_vec()).start_pair();
        for length in 3..=5 {
            let cp = self.connector();
            if let Ok(path) = connect_pairs(self.h, from, to, length, &self.free, &cp) {
                return Some((path.internal().to_vec(), false));
            }
        }
        let cp = self.connector();
        connect_through_reservoir(self.h, from, to, self.reservoir, &self.reservoir_used, &cp)
            .ok()
            .map(|path| (path.internal().to_vec(), true))
    }
}

/// A long tight path on `[n]` minus the reservoir and the absorbing path,
/// assembled from path covers of the triplets matched in the reduced graph.
///
/// Consecutive pieces are joined directly when their ends already form a
/// tight path, otherwise through 1 to 3 vertices left uncovered, otherwise
/// through the reservoir; a piece that cannot be joined is dropped.
/// Remaining uncovered vertices are then added at the ends or inserted
/// between consecutive vertices where possible.
pub fn build_long_path(
    h: &Hypergraph3,
    reservoir: &Reservoir,
    pa: &AbsorbingPath,
    params: &LongPathParams,
) -> Result<LongPath, CoverError> {
    let n = h.n();
    let mut blocked = reservoir.member_set(n);
    blocked.union_with(pa.vertex_set(n).words());
    let eligible: Vec<Vertex> = (1..=n).filter(|&v| !blocked.contains(v)).collect();
    if eligible.len() < 9 {
        return Err(stage("reduce", format!("only {} eligible vertices", eligible.len())));
    }
    let (hp, map) = h
        .induced_subhypergraph(eligible.iter().copied())
        .map_err(|e| stage("reduce", e))?;
    let mut cover = params.cover;
    cover.t = cover.t.min(hp.n() / 3);
    let red = reduce(&hp, &cover).map_err(|e| stage("reduce", e))?;
    let k = red.k_graph();
    let matching = find_large_matching(&k, &red.malicious_pairs, cover.alpha_prime, cover.beta).matching;
    log::debug!(
        "reduced graph: t = {}, |K| = {}, matched {}",
        red.t,
        red.k_edges.len(),
        matching.len()
    );

    let mut pieces: Vec<Vec<Vertex>> = Vec::new();
    for &[i, j, l] in &matching.edges {
        let view = TripartiteView::new(&hp, red.part(i).to_vec(), red.part(j).to_vec(), red.part(l).to_vec())
            .map_err(|e| stage("cover", e))?;
        let tp = CoverParams {
            d: view.density().min(1.0),
            ..cover
        };
        match cover_triplet_with_paths(&view, &tp) {
            Ok(c) => pieces.extend(
                c.paths
                    .into_iter()
                    .map(|p| p.vertices().iter().map(|&v| map.to_old(v)).collect()),
            ),
            Err(CoverError::HypothesisViolated { value }) => {
                log::debug!("triplet {:?} skipped: hypothesis value {value:.3}", [i, j, l]);
            }
            Err(e) => return Err(stage("cover", e)),
        }
    }
    if pieces.is_empty() {
        return Err(stage("cover", "no triplet produced a path"));
    }
    pieces.sort_by_key(|p| std::cmp::Reverse(p.len()));

    let mut free = VertexSet::from_iter_with(n, eligible.iter().copied());
    for p in &pieces {
        for &v in p {
            free.remove(v);
        }
    }
    let mut linker = Linker {
        h,
        reservoir,
        free,
        reservoir_used: VertexSet::new(n),
        params,
        calls: 0,
    };
    let piece_count = pieces.len();
    let mut iter = pieces.into_iter();
    let mut q = iter.next().expect("nonempty");
    let mut skipped = 0;
    for p in iter {
        let rev: Vec<Vertex> = p.iter().rev().copied().collect();
        let joined = linker
            .bridge(&q, &p)
            .map(|b| (b, p.clone()))
            .or_else(|| linker.bridge(&q, &rev).map(|b| (b, rev)));
        match joined {
            Some(((internal, through_r), piece)) => {
                for &v in &internal {
                    if through_r {
                        linker.reservoir_used.insert(v);
                    } else {
                        linker.free.remove(v);
                    }
                }
                q.extend(internal);
                q.extend(piece);
            }
            None => {
                skipped += 1;
                for v in p {
                    linker.free.insert(v);
                }
            }
        }
    }
    let mut free = linker.free;
    extend_ends(h, &mut q, &mut free);
    for v in free.to_vec() {
        if insert_into_path(h, &mut q, v) {
            free.remove(v);
        }
    }
    let path = TightPath::new(q);
    let verdict = validate_tight_path(h, &path).map_err(|e| stage("connect", e))?;
    if !verdict.is_valid() {
        return Err(stage("connect", format!("assembled path is invalid: {verdict:?}")));
    }
    let covered = path.vertices().iter().filter(|&&v| !blocked.contains(v)).count();
    let reservoir_used = linker.reservoir_used.to_vec();
    Ok(LongPath {
        eligible: eligible.len(),
        covered,
        coverage: covered as f64 / eligible.len() as f64,
        reservoir_used,
        t: red.t,
        k_edges: red.k_edges.len(),
        matched_triplets: matching.edges,
        pieces: piece_count,
        skipped_pieces: skipped,
        path,
    })
}
