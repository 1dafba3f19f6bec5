use std::fmt::Write;

use indexmap::IndexMap;
use serde::Serialize;

use crate::algorithms::{Algorithm, AnalysisOptions};
use crate::lie::PruneMode;
use crate::model::Model;
use crate::rank::RankMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// A state that can be determined from the outputs.
    Observable,
    /// A parameter that can be determined from the outputs.
    Identifiable,
    /// An unknown input that can be reconstructed from the outputs.
    Invertible,
    Unobservable,
    /// The analysis stopped before the variable could be settled.
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Observable => "observable",
            Verdict::Identifiable => "identifiable",
            Verdict::Invertible => "invertible",
            Verdict::Unobservable => "unobservable",
            Verdict::Undecided => "undecided",
        }
    }

    /// Observable, identifiable or invertible.
    pub fn is_positive(self) -> bool {
        matches!(self, Verdict::Observable | Verdict::Identifiable | Verdict::Invertible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Termination {
    FullRank,
    RankStagnation,
    KmaxReached,
    TimeBudget,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::FullRank => "FullRank",
            Termination::RankStagnation => "RankStagnation",
            Termination::KmaxReached => "KmaxReached",
            Termination::TimeBudget => "TimeBudget",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: u32,
    /// Rows of the matrix after this stage.
    pub rows: usize,
    /// Rows pruned so far (ORC-DF); rows + pruned is the unpruned count.
    pub pruned: usize,
    pub rank: usize,
    /// Columns of the matrix: the augmented state dimension at this stage.
    pub n_k: usize,
    pub newly_classified: Vec<String>,
    pub stage_seconds: Option<f64>,
}

/// Options as recorded in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionsRecord {
    pub kmax: u32,
    pub stage_timeout: Option<f64>,
    pub timeout: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub multiexp: usize,
    pub prune: String,
    pub classify_each_stage: bool,
    pub u_deriv_bound: IndexMap<String, String>,
    pub w_deriv_bound: IndexMap<String, u32>,
    pub exclude: Vec<String>,
}

impl OptionsRecord {
    pub fn new(model: &Model, opts: &AnalysisOptions, kmax: u32) -> Self {
        OptionsRecord {
            kmax,
            stage_timeout: opts.stage_time_budget.map(|d| d.as_secs_f64()),
            timeout: opts.total_time_budget.map(|d| d.as_secs_f64()),
            seed: opts.rank_config.seed,
            trials: opts.rank_config.trials,
            multiexp: opts.multiexp,
            prune: match opts.prune {
                PruneMode::None => "none",
                PruneMode::NullBlocks => "null-blocks",
                PruneMode::ZeroRows => "zero-rows",
            }
            .into(),
            classify_each_stage: opts.classify_each_stage,
            u_deriv_bound: model
                .known_inputs()
                .iter()
                .zip(model.u_deriv_bounds())
                .map(|(u, b)| (u.name().to_string(), b.to_string()))
                .collect(),
            w_deriv_bound: model
                .unknown_inputs()
                .iter()
                .zip(model.w_deriv_bounds())
                .map(|(w, b)| (w.name().to_string(), *b))
                .collect(),
            exclude: model.excluded().iter().map(|s| s.name().to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub model: String,
    pub algorithm: Algorithm,
    pub rank_method: RankMethod,
    pub options: OptionsRecord,
    pub iterations: Vec<IterationRecord>,
    pub verdicts: IndexMap<String, Verdict>,
    pub termination: Termination,
}

impl Report {
    pub fn final_rank(&self) -> usize {
        self.iterations.last().map_or(0, |r| r.rank)
    }

    pub fn final_k(&self) -> u32 {
        self.iterations.last().map_or(0, |r| r.k)
    }

    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.verdicts.get(name).copied()
    }

    /// Names with a positive verdict, in basis order.
    pub fn observable(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|(_, v)| v.is_positive())
            .map(|(n, _)| n.as_str())
            .collect()
    }

    /// The stage at which `name` was classified, if it was.
    pub fn classified_at(&self, name: &str) -> Option<u32> {
        self.iterations
            .iter()
            .find(|r| r.newly_classified.iter().any(|n| n == name))
            .map(|r| r.k)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model:       {}", self.model);
        let _ = writeln!(out, "algorithm:   {}", self.algorithm);
        let _ = writeln!(
            out,
            "rank method: {}",
            match self.rank_method {
                RankMethod::ExactModular => "exact (prime field)",
                RankMethod::FloatingSvd => "floating point (SVD)",
            }
        );
        let _ = writeln!(out, "termination: {}", self.termination.as_str());
        out.push('\n');
        let timed = self.iterations.iter().any(|r| r.stage_seconds.is_some());
        let _ = write!(
            out,
            "{:>4} {:>8} {:>8} {:>6} {:>6}",
            "k", "rows", "pruned", "rank", "n_k"
        );
        if timed {
            let _ = write!(out, " {:>10}", "seconds");
        }
        out.push_str("  observable variables\n");
        for r in &self.iterations {
            let _ = write!(
                out,
                "{:>4} {:>8} {:>8} {:>6} {:>6}",
                r.k, r.rows, r.pruned, r.rank, r.n_k
            );
            if timed {
                let _ = write!(out, " {:>10.3}", r.stage_seconds.unwrap_or(0.0));
            }
            if r.newly_classified.is_empty() {
                out.push('\n');
            } else {
                let _ = writeln!(out, "  {}", r.newly_classified.join(", "));
            }
        }
        out.push('\n');
        let width = self.verdicts.keys().map(String::len).max().unwrap_or(0);
        for (name, v) in &self.verdicts {
            let _ = writeln!(out, "{name:<width$}  {}", v.as_str());
        }
        let positive = self.verdicts.values().filter(|v| v.is_positive()).count();
        let _ = writeln!(
            out,
            "\n{positive}/{} observable after {} iteration(s)",
            self.verdicts.len(),
            self.final_k()
        );
        out
    }
}
