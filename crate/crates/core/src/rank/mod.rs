//! Generic-point rank of symbolic matrices and the column-elimination test.
//!
//! Every symbol is replaced by an independent pseudo-random value. Matrices
//! free of exp, ln and non-integer powers are ranked exactly over a large
//! prime field; others in double-double floating point by singular values.
//! Several points are tried and the largest rank wins, since special points
//! can only lower the rank.

mod modp;
mod svd;
mod tracker;

use serde::Serialize;

pub use modp::{rank_mod, Rref};
pub use svd::{equilibrate, rank_float, singular_values};
pub use tracker::{PushFailure, RankTracker};

use crate::budget::Deadline;
use crate::error::{Error, Result};
use crate::sym::{ExprMatrix, ModP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMethod {
    ExactModular,
    FloatingSvd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankConfig {
    /// Independent evaluation points.
    pub trials: usize,
    /// Modulus for the exact path.
    pub prime: u64,
    /// Singular values at or below `rel_tol * max` count as zero.
    pub rel_tol: f64,
    /// Base seed; trial points derive from it deterministically.
    pub seed: u64,
    /// Fresh points tried per trial when evaluation hits a singularity.
    pub max_attempts: usize,
    /// Force a method instead of choosing by matrix content.
    pub method: Option<RankMethod>,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            trials: 3,
            prime: ModP::MERSENNE61,
            rel_tol: 1e-9,
            seed: 0,
            max_attempts: 8,
            method: None,
        }
    }
}

impl RankConfig {
    pub fn method_for(&self, rational: bool) -> RankMethod {
        self.method.unwrap_or(if rational {
            RankMethod::ExactModular
        } else {
            RankMethod::FloatingSvd
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub method: RankMethod,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankResult {
    pub rank: usize,
    pub trials: Vec<TrialRecord>,
    pub method: RankMethod,
}

/// Seed of attempt `attempt` of trial slot `slot`.
pub(crate) fn trial_seed(base: u64, slot: usize, attempt: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = base
        .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(1 + slot as u64))
        .wrapping_add((attempt as u64) << 40);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Rank of `m` at generic points.
pub fn generic_rank(m: &ExprMatrix, cfg: &RankConfig) -> Result<RankResult> {
    let mut t = RankTracker::new(cfg.clone(), cfg.method_for(m.is_rational()));
    t.push_block(m, Deadline::NONE).map_err(|e| e.into_error())?;
    Ok(t.result())
}

/// True when deleting column `col` lowers the generic rank below
/// `base_rank`, i.e. the corresponding variable is observable.
pub fn column_elimination_test(m: &ExprMatrix, base_rank: usize, col: usize, cfg: &RankConfig) -> Result<bool> {
    if col >= m.cols() {
        return Err(Error::InvalidOptions(format!("column {col} out of range")));
    }
    let reduced = m.without_column(col);
    let mut cfg = cfg.clone();
    cfg.method.get_or_insert(cfg.method_for(m.is_rational()));
    Ok(generic_rank(&reduced, &cfg)?.rank < base_rank)
}
