//! Long-path machinery: quasirandomness measurement, path covers of dense
//! tripartite triplets, the matching procedure on the reduced graph and the
//! assembly of one long path.

mod long_path;
mod matching;
mod quasi;
mod reduce;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use long_path::{build_long_path, LongPath, LongPathParams};
pub use matching::{
    find_improving_move, find_large_matching, improve_matching, Matching, MatchingReport, Move, PairSet,
    MATCHING_STARTS,
};
pub use quasi::{cover_triplet_with_paths, quasirandomness_defect, QuasiMode, TripartiteView, TripletCover};
pub use reduce::{reduce, ReducedHypergraph, TripletStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("parts must be pairwise disjoint and nonempty")]
    BadParts,
    #[error("exact defect needs parts of size <= 8, got {0}")]
    OversizedForExact(usize),
    #[error("parts must have equal size for the cover, got {0:?}")]
    UnequalParts([usize; 3]),
    #[error("(d xi^3 - delta) n_part / 2 = {value:.4} < 1")]
    HypothesisViolated { value: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("stage {stage} failed: {reason}")]
    Stage { stage: &'static str, reason: String },
}

/// Constants of the long-path stage, all explicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    pub xi: f64,
    pub delta: f64,
    /// Target density for a single triplet cover.
    pub d: f64,
    /// Number of parts of the interval partition.
    pub t: usize,
    pub alpha_prime: f64,
    /// Exception-degree warning level for the matching, as a fraction of n.
    pub beta: f64,
    pub quasi_samples: usize,
    pub seed: u64,
}

impl Default for CoverParams {
    fn default() -> Self {
        CoverParams {
            xi: 0.9,
            delta: 0.05,
            d: 1.0,
            t: 6,
            alpha_prime: 0.1,
            beta: 0.1,
            quasi_samples: 512,
            seed: 0,
        }
    }
}

impl CoverParams {
    pub fn validate(&self) -> Result<(), CoverError> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(CoverError::InvalidParams(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit("xi", self.xi)?;
        unit("delta", self.delta)?;
        unit("alpha_prime", self.alpha_prime)?;
        unit("beta", self.beta)?;
        if !(self.d > 0.0 && self.d <= 1.0) {
            return Err(CoverError::InvalidParams(format!(
                "d must lie in (0, 1], got {}",
                self.d
            )));
        }
        if self.t < 3 {
            return Err(CoverError::InvalidParams(format!("t must be >= 3, got {}", self.t)));
        }
        Ok(())
    }
}
