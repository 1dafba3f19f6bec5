//! Lie-derivative recursions producing the rows of the observability
//! matrices: extended Lie derivatives (FISPO) and the drift/input-direction
//! cascade (ORC-DF).

use std::fmt;

use rayon::prelude::*;

use crate::budget::{Deadline, Expired};
use crate::model::{AugmentedSystem, Model};
use crate::sym::{diff, directional, jacobian, Expr, ExprMatrix, Symbol};

/// Which vector field a row was differentiated along, or which output block
/// it was seeded from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `f_xw` (or `f` itself for FISPO); as a seed, `h_xw`.
    Drift,
    /// `f_ui` for known input `i`; as a seed, `h_ui`.
    Input(usize),
}

/// Provenance of a row: the output it derives from, the block it was
/// seeded in, and the directions applied since.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RowTag {
    pub output: usize,
    pub seed: Direction,
    pub path: Vec<Direction>,
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |d: &Direction, prefix: char| match d {
            Direction::Drift => format!("{prefix}_xw"),
            Direction::Input(i) => format!("{prefix}_u{}", i + 1),
        };
        write!(f, "{}[{}]", name(&self.seed, 'h'), self.output + 1)?;
        for d in &self.path {
            write!(f, " > {}", name(d, 'f'))?;
        }
        Ok(())
    }
}

/// Rows added at one stage.
#[derive(Debug, Clone)]
pub struct LieStage {
    pub k: u32,
    pub rows_new: Vec<Expr>,
    pub tags: Vec<RowTag>,
    /// Rows dropped by pruning at this stage, counted against the nominal
    /// row count.
    pub pruned: usize,
    /// Rows kept so far, this stage included.
    pub rows_total: usize,
    /// Symbols the Jacobian of this stage is taken against.
    pub basis: Vec<Symbol>,
}

/// Row pruning for the ORC-DF cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PruneMode {
    /// Keep every row.
    None,
    /// Drop seed blocks `h_ui` that vanish identically and never branch
    /// along an input direction `f_ui` that vanishes identically. Rows
    /// that happen to be zero inside a live block are kept.
    #[default]
    NullBlocks,
    /// Additionally drop every individual row that normalizes to zero.
    ZeroRows,
}

/// `(dphi/dbasis) * f`, row-wise.
pub fn lie_derivative(phi: &[Expr], f: &[Expr], basis: &[Symbol]) -> Vec<Expr> {
    assert_eq!(f.len(), basis.len(), "field and basis lengths differ");
    phi.par_iter().map(|p| directional(p, basis, f)).collect()
}

/// Known-input derivative symbols paired with their time derivative, up to
/// `order`. Past an input's bound the derivative is zero.
pub fn input_chain(m: &Model, order: u32) -> Vec<(Symbol, Expr)> {
    let mut out = Vec::new();
    for (u, &bound) in m.known_inputs().iter().zip(m.u_deriv_bounds()) {
        for j in 0..=order {
            if !bound.admits(j) {
                break;
            }
            let next = if bound.admits(j + 1) {
                Expr::sym(&u.derivative(j + 1))
            } else {
                Expr::zero()
            };
            out.push((u.derivative(j), next));
        }
    }
    out
}

/// One extended Lie derivative step: the Lie derivative along the augmented
/// dynamics plus the chain-rule terms of the known inputs.
pub fn extended_lie_step(prev: &[Expr], aug: &AugmentedSystem, inputs: &[(Symbol, Expr)]) -> Vec<Expr> {
    prev.par_iter().map(|p| extended_lie_row(p, aug, inputs)).collect()
}

fn extended_lie_row(p: &Expr, aug: &AugmentedSystem, inputs: &[(Symbol, Expr)]) -> Expr {
    let mut terms = vec![directional(p, aug.basis(), aug.dynamics())];
    for (s, next) in inputs {
        if !next.is_zero() && p.depends_on(s) {
            terms.push(diff(p, s) * next);
        }
    }
    Expr::sum(terms)
}

fn map_rows(rows: &[Expr], deadline: Deadline, f: impl Fn(&Expr) -> Expr + Sync) -> Result<Vec<Expr>, Expired> {
    rows.par_iter()
        .map(|r| {
            deadline.check()?;
            Ok(f(r))
        })
        .collect()
}

/// First FISPO stage: the outputs themselves.
pub fn fispo_seed(aug: &AugmentedSystem) -> LieStage {
    let rows: Vec<Expr> = aug.outputs().to_vec();
    let tags = (0..rows.len())
        .map(|i| RowTag {
            output: i,
            seed: Direction::Drift,
            path: Vec::new(),
        })
        .collect();
    LieStage {
        k: 0,
        rows_total: rows.len(),
        rows_new: rows,
        tags,
        pruned: 0,
        basis: aug.basis().to_vec(),
    }
}

/// FISPO stage `prev.k + 1`. `aug` is the system augmented to the level of
/// the new stage.
pub fn fispo_stage(
    prev: &LieStage,
    aug: &AugmentedSystem,
    inputs: &[(Symbol, Expr)],
    deadline: Deadline,
) -> Result<LieStage, Expired> {
    let rows = map_rows(&prev.rows_new, deadline, |p| extended_lie_row(p, aug, inputs))?;
    let tags = prev
        .tags
        .iter()
        .map(|t| {
            let mut t = t.clone();
            t.path.push(Direction::Drift);
            t
        })
        .collect();
    Ok(LieStage {
        k: prev.k + 1,
        rows_total: prev.rows_total + rows.len(),
        rows_new: rows,
        tags,
        pruned: 0,
        basis: aug.basis().to_vec(),
    })
}

fn nominal_rows(m: usize, n_u: usize, k: u32) -> usize {
    m * (1 + n_u).pow(k + 1)
}

fn keep(mode: PruneMode, rows: Vec<Expr>, tags: Vec<RowTag>) -> (Vec<Expr>, Vec<RowTag>) {
    if mode != PruneMode::ZeroRows {
        return (rows, tags);
    }
    rows.into_iter().zip(tags).filter(|(r, _)| !r.is_zero()).unzip()
}

/// Seed of the ORC-DF cascade: `h_xw` followed by each `h_ui`.
pub fn orcdf_seed(aug: &AugmentedSystem, mode: PruneMode) -> LieStage {
    let split = aug.affine().expect("ORC-DF needs the affine split");
    let m = split.output_drift.len();
    let mut rows = Vec::new();
    let mut tags = Vec::new();
    let blocks = std::iter::once((Direction::Drift, &split.output_drift)).chain(
        split
            .output_directions
            .iter()
            .enumerate()
            .map(|(i, h)| (Direction::Input(i), h)),
    );
    for (dir, block) in blocks {
        if mode != PruneMode::None && dir != Direction::Drift && block.iter().all(Expr::is_zero) {
            continue;
        }
        rows.extend(block.iter().cloned());
        tags.extend((0..m).map(|o| RowTag {
            output: o,
            seed: dir,
            path: Vec::new(),
        }));
    }
    let (rows, tags) = keep(mode, rows, tags);
    LieStage {
        k: 0,
        pruned: nominal_rows(m, split.directions.len(), 0) - rows.len(),
        rows_total: rows.len(),
        rows_new: rows,
        tags,
        basis: aug.basis().to_vec(),
    }
}

/// The next block of the cascade: the previous block differentiated along
/// the drift and along each input direction. `aug` is augmented to the
/// level of the new stage.
pub fn orcdf_stage(
    prev: &LieStage,
    aug: &AugmentedSystem,
    mode: PruneMode,
    deadline: Deadline,
) -> Result<LieStage, Expired> {
    let split = aug.affine().expect("ORC-DF needs the affine split");
    let m = split.output_drift.len();
    let n_u = split.directions.len();
    let fields = std::iter::once((Direction::Drift, &split.drift)).chain(
        split
            .directions
            .iter()
            .enumerate()
            .map(|(i, f)| (Direction::Input(i), f)),
    );
    let mut rows = Vec::new();
    let mut tags = Vec::new();
    for (dir, field) in fields {
        if mode != PruneMode::None && dir != Direction::Drift && field.iter().all(Expr::is_zero) {
            continue;
        }
        rows.extend(map_rows(&prev.rows_new, deadline, |p| {
            directional(p, aug.basis(), field)
        })?);
        tags.extend(prev.tags.iter().map(|t| {
            let mut t = t.clone();
            t.path.push(dir);
            t
        }));
    }
    let (rows, tags) = keep(mode, rows, tags);
    let k = prev.k + 1;
    Ok(LieStage {
        k,
        pruned: nominal_rows(m, n_u, k) - rows.len(),
        rows_total: prev.rows_total + rows.len(),
        rows_new: rows,
        tags,
        basis: aug.basis().to_vec(),
    })
}

/// Jacobian of the stage's new rows against its basis.
pub fn build_matrix_increment(stage: &LieStage) -> ExprMatrix {
    jacobian(&stage.rows_new, &stage.basis)
}

/// [`build_matrix_increment`] that gives up once `deadline` passes.
pub fn build_matrix_increment_within(stage: &LieStage, deadline: Deadline) -> Result<ExprMatrix, Expired> {
    let rows: Vec<Vec<Expr>> = stage
        .rows_new
        .par_iter()
        .map(|r| {
            deadline.check()?;
            Ok(stage.basis.iter().map(|s| diff(r, s)).collect())
        })
        .collect::<Result<_, Expired>>()?;
    Ok(ExprMatrix::from_rows(stage.basis.len(), rows))
}
