//! Tight Hamiltonian cycles in 3-uniform hypergraphs: a small 3-graph library,
//! an exact search oracle, extremal constructions and a constructive
//! absorption pipeline whose every output is checked against the definitions.

pub mod absorption;
pub mod bitset;
pub mod connector;
pub mod constructions;
pub mod cover;
pub mod hypergraph;
pub mod io;
pub mod oracle;
pub mod pipeline;
pub mod scan;
pub mod splice;

pub use bitset::VertexSet;
pub use hypergraph::{
    check_posa_condition, is_hamiltonian_cycle, validate_tight_cycle, validate_tight_path, validate_tight_walk,
    DegreeMatrix, Hypergraph3, HypergraphError, LinkGraph, OrderedPair, TightCycle, TightPath, TightWalk, Verdict,
    Vertex,
};

/// Derives an independent stream seed (splitmix64 of `seed` and `stream`).
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
