//! FISPO and ORC-DF drivers: grow the observability matrix stage by stage,
//! track its generic rank, classify variables by column elimination and
//! decide when to stop.

mod classify;
mod options;

use std::collections::BTreeSet;
use std::time::Instant;

use indexmap::IndexMap;

pub use classify::classify_variables;
pub use options::{default_kmax, Algorithm, AnalysisOptions};

use crate::budget::{Deadline, Expired};
use crate::error::{Error, Result};
use crate::lie::{
    build_matrix_increment, build_matrix_increment_within, fispo_seed, fispo_stage, input_chain, orcdf_seed,
    orcdf_stage, LieStage, PruneMode,
};
use crate::model::{
    affine_decompose, augment, augment_affine, replicate_for_experiments, AffineDecomposition, Model, SymbolKind,
};
use crate::rank::{PushFailure, RankTracker};
use crate::report::{IterationRecord, OptionsRecord, Report, Termination, Verdict};
use crate::sym::ExprMatrix;

/// Stack size of analysis worker threads. Differentiation and
/// normalization recurse over expression depth, which grows with every
/// Lie derivative.
const WORKER_STACK: usize = 256 << 20;

/// Source of successive stages of rows.
trait Cascade {
    fn seed(&self) -> LieStage;
    fn next(&self, prev: &LieStage, deadline: Deadline) -> Result<LieStage, Expired>;
}

/// Augmentation level used at stage `k`.
fn level(m: &Model, k: u32) -> u32 {
    if m.unknown_inputs().is_empty() {
        0
    } else {
        k.min(m.max_w_bound())
    }
}

struct Fispo<'a> {
    model: &'a Model,
}

impl Cascade for Fispo<'_> {
    fn seed(&self) -> LieStage {
        fispo_seed(&augment(self.model, 0))
    }

    fn next(&self, prev: &LieStage, deadline: Deadline) -> Result<LieStage, Expired> {
        let k = prev.k + 1;
        let aug = augment(self.model, level(self.model, k));
        fispo_stage(prev, &aug, &input_chain(self.model, k), deadline)
    }
}

struct Orcdf<'a> {
    model: &'a Model,
    dec: AffineDecomposition,
    prune: PruneMode,
}

impl Cascade for Orcdf<'_> {
    fn seed(&self) -> LieStage {
        orcdf_seed(&augment_affine(self.model, 0, &self.dec), self.prune)
    }

    fn next(&self, prev: &LieStage, deadline: Deadline) -> Result<LieStage, Expired> {
        let k = prev.k + 1;
        orcdf_stage(
            prev,
            &augment_affine(self.model, level(self.model, k), &self.dec),
            self.prune,
            deadline,
        )
    }
}

fn is_rational(m: &Model) -> bool {
    m.dynamics().iter().chain(m.outputs()).all(|e| e.is_rational())
}

fn verdict_for(kind: Option<SymbolKind>) -> Verdict {
    match kind {
        Some(SymbolKind::Parameter) => Verdict::Identifiable,
        Some(SymbolKind::UnknownInput(_)) => Verdict::Invertible,
        _ => Verdict::Observable,
    }
}

fn drive(model: &Model, opts: &AnalysisOptions, cascade: &dyn Cascade) -> Result<Report> {
    let kmax = opts.kmax.unwrap_or_else(|| default_kmax(model));
    let total = Deadline::after(opts.total_time_budget);
    let method = opts.rank_config.method_for(is_rational(model));
    let mut tracker = RankTracker::new(opts.rank_config.clone(), method);

    let aug0 = augment(model, 0);
    let base: Vec<_> = aug0.basis()[..aug0.n_base()].to_vec();
    let mut unclassified: BTreeSet<usize> = (0..base.len())
        .filter(|&i| !model.excluded().contains(&base[i]))
        .collect();
    let mut classified: BTreeSet<usize> = BTreeSet::new();
    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut prev: Option<LieStage> = None;
    let mut last: Option<(usize, usize)> = None;

    let termination = loop {
        let started = Instant::now();
        let deadline = total.min(Deadline::after(opts.stage_time_budget));
        let stage = match &prev {
            None => cascade.seed(),
            Some(p) => match cascade.next(p, deadline) {
                Ok(s) => s,
                Err(Expired) => break Termination::TimeBudget,
            },
        };
        let block = match build_matrix_increment_within(&stage, deadline) {
            Ok(b) => b,
            Err(Expired) => break Termination::TimeBudget,
        };
        let rank = match tracker.push_block(&block, deadline) {
            Ok(r) => r,
            Err(PushFailure::Expired) => break Termination::TimeBudget,
            Err(PushFailure::Degenerate) => return Err(Error::DegenerateEvaluation),
        };
        let n_k = stage.basis.len();
        let full = rank == n_k;
        let stagnated = last == Some((rank, n_k));
        let at_kmax = stage.k >= kmax;
        let mut newly = Vec::new();
        if opts.classify_each_stage || full || stagnated || at_kmax {
            let candidates: Vec<usize> = unclassified.iter().copied().collect();
            for c in tracker.rank_dropping_columns(&candidates) {
                unclassified.remove(&c);
                classified.insert(c);
                newly.push(base[c].name().to_string());
            }
        }
        iterations.push(IterationRecord {
            k: stage.k,
            rows: stage.rows_total,
            pruned: iterations.last().map_or(0, |r| r.pruned) + stage.pruned,
            rank,
            n_k,
            newly_classified: newly,
            stage_seconds: opts.record_timings.then(|| started.elapsed().as_secs_f64()),
        });
        if full {
            break Termination::FullRank;
        }
        if stagnated {
            break Termination::RankStagnation;
        }
        if at_kmax {
            break Termination::KmaxReached;
        }
        last = Some((rank, n_k));
        prev = Some(stage);
    };

    // With deferred classification, an interrupted run still classifies
    // against the last completed matrix.
    if termination == Termination::TimeBudget && !opts.classify_each_stage && tracker.rows() > 0 {
        let candidates: Vec<usize> = unclassified.iter().copied().collect();
        let found = tracker.rank_dropping_columns(&candidates);
        if let Some(rec) = iterations.last_mut() {
            for c in found {
                unclassified.remove(&c);
                classified.insert(c);
                rec.newly_classified.push(base[c].name().to_string());
            }
        }
    }

    let mut verdicts = IndexMap::new();
    for (i, s) in base.iter().enumerate() {
        let v = if classified.contains(&i) {
            verdict_for(model.kind_of(s))
        } else if unclassified.contains(&i) {
            match termination {
                Termination::FullRank | Termination::RankStagnation => Verdict::Unobservable,
                Termination::KmaxReached | Termination::TimeBudget => Verdict::Undecided,
            }
        } else {
            continue;
        };
        verdicts.insert(s.name().to_string(), v);
    }

    Ok(Report {
        model: model.name().to_string(),
        algorithm: opts.algorithm,
        rank_method: method,
        options: OptionsRecord::new(model, opts, kmax),
        iterations,
        verdicts,
        termination,
    })
}

fn in_pool<T: Send>(opts: &AnalysisOptions, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .stack_size(WORKER_STACK)
        .build()
        .map_err(|e| Error::InvalidOptions(format!("cannot start worker threads: {e}")))?;
    pool.install(f)
}

fn fispo_inner(m: &Model, opts: &AnalysisOptions) -> Result<Report> {
    let mut opts = opts.clone();
    opts.algorithm = Algorithm::Fispo;
    drive(m, &opts, &Fispo { model: m })
}

fn orcdf_inner(m: &Model, opts: &AnalysisOptions) -> Result<Report> {
    let mut opts = opts.clone();
    opts.algorithm = Algorithm::Orcdf;
    let dec = affine_decompose(m)?;
    drive(
        m,
        &opts,
        &Orcdf {
            model: m,
            dec,
            prune: opts.prune,
        },
    )
}

/// FISPO: extended Lie derivatives of the augmented system.
pub fn run_fispo(m: &Model, opts: &AnalysisOptions) -> Result<Report> {
    opts.validate()?;
    in_pool(opts, || fispo_inner(m, opts))
}

/// ORC-DF: the drift/input-direction cascade. Fails with
/// [`Error::NotAffine`] before any stage when the model is not affine in
/// its inputs.
pub fn run_orcdf(m: &Model, opts: &AnalysisOptions) -> Result<Report> {
    opts.validate()?;
    in_pool(opts, || orcdf_inner(m, opts))
}

/// Replicate the model for `opts.multiexp` experiments when more than one
/// is requested, then run the selected algorithm.
pub fn analyze(m: &Model, opts: &AnalysisOptions) -> Result<Report> {
    opts.validate()?;
    in_pool(opts, || {
        let replicated;
        let model = if opts.multiexp > 1 {
            replicated = replicate_for_experiments(m, opts.multiexp)?;
            &replicated
        } else {
            m
        };
        match opts.algorithm {
            Algorithm::Fispo => fispo_inner(model, opts),
            Algorithm::Orcdf => orcdf_inner(model, opts),
        }
    })
}

/// The per-stage rows and Jacobian blocks of either algorithm for stages
/// `0..=kmax`, without any rank computation.
pub fn observability_blocks(
    m: &Model,
    algorithm: Algorithm,
    kmax: u32,
    prune: PruneMode,
) -> Result<Vec<(LieStage, ExprMatrix)>> {
    let opts = AnalysisOptions::default();
    in_pool(&opts, || {
        let cascade: Box<dyn Cascade + '_> = match algorithm {
            Algorithm::Fispo => Box::new(Fispo { model: m }),
            Algorithm::Orcdf => Box::new(Orcdf {
                model: m,
                dec: affine_decompose(m)?,
                prune,
            }),
        };
        let mut out: Vec<(LieStage, ExprMatrix)> = Vec::new();
        let mut stage = cascade.seed();
        loop {
            let block = build_matrix_increment(&stage);
            let k = stage.k;
            out.push((stage.clone(), block));
            if k >= kmax {
                break;
            }
            stage = cascade.next(&stage, Deadline::NONE).expect("no deadline");
        }
        Ok(out)
    })
}

/// Stack per-stage blocks into the full observability matrix.
pub fn stack_blocks(blocks: &[(LieStage, ExprMatrix)]) -> ExprMatrix {
    let mut it = blocks.iter().map(|(_, b)| b);
    let first = it.next().cloned().unwrap_or_else(|| ExprMatrix::zeros(0, 0));
    it.fold(first, |acc, b| acc.vstack(b))
}
