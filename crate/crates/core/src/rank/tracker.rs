use rayon::prelude::*;
use twofloat::TwoFloat;

use super::modp::Rref;
use super::svd::rank_float;
use super::{trial_seed, RankConfig, RankMethod, RankResult, TrialRecord};
use crate::budget::{Deadline, Expired};
use crate::error::Error;
use crate::point;
use crate::sym::{DoubleDouble, Evaluator, Expr, ExprMatrix, ModP, SymError, Symbol};

type Lookup<V> = Box<dyn FnMut(&Symbol) -> Option<V> + Send + Sync>;

enum Numeric {
    Exact {
        eval: Evaluator<ModP, Lookup<u64>>,
        rref: Rref,
    },
    Float {
        eval: Evaluator<DoubleDouble, Lookup<TwoFloat>>,
        rows: Vec<Vec<TwoFloat>>,
        rank: usize,
    },
}

struct Trial {
    slot: usize,
    attempt: usize,
    seed: u64,
    state: Numeric,
    pushed: usize,
}

/// Why a push did not complete.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PushFailure {
    Degenerate,
    Expired,
}

impl PushFailure {
    pub fn into_error(self) -> Error {
        match self {
            PushFailure::Degenerate => Error::DegenerateEvaluation,
            PushFailure::Expired => Error::InvalidOptions("time budget exhausted".into()),
        }
    }
}

enum TrialFailure {
    Singular,
    Expired,
}

impl From<SymError> for TrialFailure {
    fn from(_: SymError) -> Self {
        TrialFailure::Singular
    }
}

impl From<Expired> for TrialFailure {
    fn from(_: Expired) -> Self {
        TrialFailure::Expired
    }
}

impl Trial {
    fn new(cfg: &RankConfig, method: RankMethod, slot: usize, attempt: usize, cols: usize) -> Trial {
        let seed = trial_seed(cfg.seed, slot, attempt);
        let state = match method {
            RankMethod::ExactModular => {
                let p = cfg.prime;
                let lookup: Lookup<u64> = Box::new(move |s| Some(point::residue(seed, s, p)));
                Numeric::Exact {
                    eval: Evaluator::new(ModP::new(p), lookup),
                    rref: Rref::new(ModP::new(p), cols),
                }
            }
            RankMethod::FloatingSvd => {
                let lookup: Lookup<TwoFloat> = Box::new(move |s| Some(point::real(seed, s)));
                Numeric::Float {
                    eval: Evaluator::new(DoubleDouble, lookup),
                    rows: Vec::new(),
                    rank: 0,
                }
            }
        };
        Trial {
            slot,
            attempt,
            seed,
            state,
            pushed: 0,
        }
    }

    fn rows_pushed(&self) -> usize {
        self.pushed
    }

    fn rank(&self) -> usize {
        match &self.state {
            Numeric::Exact { rref, .. } => rref.rank(),
            Numeric::Float { rank, .. } => *rank,
        }
    }

    /// Evaluate `rows` and append them. Nothing is committed unless every
    /// row evaluates, so a failed push leaves the trial as it was.
    fn push(&mut self, rows: &[&[Expr]], cols: usize, rel_tol: f64, deadline: Deadline) -> Result<(), TrialFailure> {
        match &mut self.state {
            Numeric::Exact { eval, rref } => {
                let mut values = Vec::with_capacity(rows.len());
                for r in rows {
                    deadline.check()?;
                    let mut v = r.iter().map(|e| eval.eval(e)).collect::<Result<Vec<u64>, _>>()?;
                    v.resize(cols, 0);
                    values.push(v);
                }
                rref.grow_cols(cols);
                for v in values {
                    rref.push(v);
                }
            }
            Numeric::Float {
                eval,
                rows: stored,
                rank,
            } => {
                let zero = TwoFloat::from(0.0);
                let mut values = Vec::with_capacity(rows.len());
                for r in rows {
                    deadline.check()?;
                    let mut v = r.iter().map(|e| eval.eval(e)).collect::<Result<Vec<TwoFloat>, _>>()?;
                    v.resize(cols, zero);
                    values.push(v);
                }
                for row in stored.iter_mut() {
                    row.resize(cols, zero);
                }
                stored.extend(values);
                *rank = rank_float(stored, cols, rel_tol);
            }
        }
        self.pushed += rows.len();
        Ok(())
    }

    /// Whether deleting `col` lowers this trial's rank.
    fn column_drops_rank(&self, col: usize, cols: usize, rel_tol: f64) -> bool {
        match &self.state {
            Numeric::Exact { rref, .. } => rref.unit_in_row_space(col),
            Numeric::Float { rows, rank, .. } => {
                let reduced: Vec<Vec<TwoFloat>> = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != col)
                            .map(|(_, x)| *x)
                            .collect()
                    })
                    .collect();
                rank_float(&reduced, cols - 1, rel_tol) < *rank
            }
        }
    }
}

/// Generic rank of a matrix that grows by blocks of rows (and by zero
/// columns on the right). Each trial keeps its evaluation cache and its
/// elimination state, so a new block costs only its own rows.
pub struct RankTracker {
    cfg: RankConfig,
    method: RankMethod,
    cols: usize,
    rows: Vec<Vec<Expr>>,
    trials: Vec<Trial>,
}

impl RankTracker {
    pub fn new(cfg: RankConfig, method: RankMethod) -> Self {
        let trials = (0..cfg.trials.max(1))
            .map(|slot| Trial::new(&cfg, method, slot, 0, 0))
            .collect();
        RankTracker {
            cfg,
            method,
            cols: 0,
            rows: Vec::new(),
            trials,
        }
    }

    pub fn method(&self) -> RankMethod {
        self.method
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Append `block` below the rows so far; narrower earlier rows gain
    /// zero columns. Returns the new generic rank.
    pub fn push_block(&mut self, block: &ExprMatrix, deadline: Deadline) -> Result<usize, PushFailure> {
        let cols = self.cols.max(block.cols());
        let new_rows: Vec<&[Expr]> = (0..block.rows()).map(|r| block.row(r)).collect();
        let cfg = &self.cfg;
        let method = self.method;
        let old_rows = &self.rows;
        // Each trial comes back either advanced, replaced by a fresh trial
        // at new points, dropped (None) or, on expiry, unchanged.
        let outcomes: Vec<(Option<Trial>, bool)> = std::mem::take(&mut self.trials)
            .into_par_iter()
            .map(|mut t| {
                match t.push(&new_rows, cols, cfg.rel_tol, deadline) {
                    Ok(()) => return (Some(t), false),
                    Err(TrialFailure::Expired) => return (Some(t), true),
                    Err(TrialFailure::Singular) => {}
                }
                let all: Vec<&[Expr]> = old_rows
                    .iter()
                    .map(|r| r.as_slice())
                    .chain(new_rows.iter().copied())
                    .collect();
                for attempt in t.attempt + 1..cfg.max_attempts.max(1) {
                    let mut fresh = Trial::new(cfg, method, t.slot, attempt, cols);
                    match fresh.push(&all, cols, cfg.rel_tol, deadline) {
                        Ok(()) => return (Some(fresh), false),
                        Err(TrialFailure::Expired) => return (Some(t), true),
                        Err(TrialFailure::Singular) => {}
                    }
                }
                (None, false)
            })
            .collect();
        if outcomes.iter().any(|(_, expired)| *expired) {
            // Keep only trials still consistent with the committed rows.
            let old_rank_rows = self.rows.len();
            self.trials = outcomes
                .into_iter()
                .filter_map(|(t, _)| t.filter(|t| t.rows_pushed() == old_rank_rows))
                .collect();
            return Err(PushFailure::Expired);
        }
        let trials: Vec<Trial> = outcomes.into_iter().filter_map(|(t, _)| t).collect();
        if trials.is_empty() {
            return Err(PushFailure::Degenerate);
        }
        self.trials = trials;
        self.cols = cols;
        for r in &mut self.rows {
            r.resize(cols, Expr::zero());
        }
        for r in new_rows {
            let mut v = r.to_vec();
            v.resize(cols, Expr::zero());
            self.rows.push(v);
        }
        Ok(self.rank())
    }

    /// Largest rank over the surviving trials.
    pub fn rank(&self) -> usize {
        self.trials.iter().map(Trial::rank).max().unwrap_or(0)
    }

    /// Columns among `candidates` whose deletion lowers the rank at every
    /// trial that attains the generic rank.
    pub fn rank_dropping_columns(&self, candidates: &[usize]) -> Vec<usize> {
        if self.trials.is_empty() {
            return Vec::new();
        }
        let top = self.rank();
        let best: Vec<&Trial> = self.trials.iter().filter(|t| t.rank() == top).collect();
        candidates
            .par_iter()
            .copied()
            .filter(|&c| c < self.cols && best.iter().all(|t| t.column_drops_rank(c, self.cols, self.cfg.rel_tol)))
            .collect()
    }

    pub fn result(&self) -> RankResult {
        RankResult {
            rank: self.rank(),
            trials: self
                .trials
                .iter()
                .map(|t| TrialRecord {
                    seed: t.seed,
                    method: self.method,
                    rank: t.rank(),
                })
                .collect(),
            method: self.method,
        }
    }
}
