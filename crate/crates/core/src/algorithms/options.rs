use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::PruneMode;
use crate::model::Model;
use crate::rank::RankConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Extended Lie derivatives of the augmented system; any model.
    #[default]
    Fispo,
    /// Drift/input-direction cascade; models affine in their inputs.
    Orcdf,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Fispo => "fispo",
            Algorithm::Orcdf => "orcdf",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fispo" => Ok(Algorithm::Fispo),
            "orcdf" | "orc-df" => Ok(Algorithm::Orcdf),
            _ => Err(format!("unknown algorithm `{s}` (expected fispo or orcdf)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub algorithm: Algorithm,
    /// Last stage index to compute; `None` picks a ceiling from the model
    /// size (see [`default_kmax`]).
    pub kmax: Option<u32>,
    pub stage_time_budget: Option<Duration>,
    pub total_time_budget: Option<Duration>,
    pub rank_config: RankConfig,
    /// Run column tests after every stage rather than only on the last one.
    pub classify_each_stage: bool,
    pub multiexp: usize,
    pub prune: PruneMode,
    /// Record per-stage wall-clock times in the report.
    pub record_timings: bool,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            algorithm: Algorithm::Fispo,
            kmax: None,
            stage_time_budget: None,
            total_time_budget: None,
            rank_config: RankConfig::default(),
            classify_each_stage: true,
            multiexp: 1,
            prune: PruneMode::NullBlocks,
            record_timings: false,
            threads: None,
        }
    }
}

impl AnalysisOptions {
    pub fn with_algorithm(mut self, a: Algorithm) -> Self {
        self.algorithm = a;
        self
    }

    pub fn with_kmax(mut self, k: u32) -> Self {
        self.kmax = Some(k);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rank_config.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kmax == Some(0) {
            return Err(Error::InvalidOptions("kmax must be at least 1".into()));
        }
        for b in [self.stage_time_budget, self.total_time_budget].into_iter().flatten() {
            if b.is_zero() {
                return Err(Error::InvalidOptions("time budgets must be positive".into()));
            }
        }
        if self.multiexp == 0 {
            return Err(Error::InvalidOptions("multiexp must be at least 1".into()));
        }
        if self.rank_config.trials == 0 {
            return Err(Error::InvalidOptions("at least one rank trial is needed".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidOptions("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// `2 * (n_x + n_theta + (s + 1) * n_w)` with `s` the largest unknown-input
/// derivative bound.
pub fn default_kmax(m: &Model) -> u32 {
    let n = m.states().len() + m.parameters().len() + (m.max_w_bound() as usize + 1) * m.unknown_inputs().len();
    (2 * n).max(1) as u32
}
