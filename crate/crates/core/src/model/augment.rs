use super::{AffineDecomposition, Model};
use crate::sym::{Expr, Symbol};

/// Drift and input directions of an augmented affine system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSplit {
    /// Drift field: `f_xw` on the states, zero on parameters, the shift
    /// `w^(j) -> w^(j+1)` on unknown-input derivatives.
    pub drift: Vec<Expr>,
    /// One field per known input: `f_ui` on the states, zero elsewhere.
    pub directions: Vec<Vec<Expr>>,
    /// Output drift `h_xw`.
    pub output_drift: Vec<Expr>,
    /// Output coefficient `h_ui` of each known input.
    pub output_directions: Vec<Vec<Expr>>,
}

/// A model with parameters and unknown-input derivatives appended to the
/// state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedSystem {
    level: u32,
    basis: Vec<Symbol>,
    dynamics: Vec<Expr>,
    outputs: Vec<Expr>,
    n_base: usize,
    affine: Option<AffineSplit>,
}

impl AugmentedSystem {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Ordered state of the augmented system: states, parameters, then
    /// unknown inputs grouped by derivative order.
    pub fn basis(&self) -> &[Symbol] {
        &self.basis
    }

    pub fn dynamics(&self) -> &[Expr] {
        &self.dynamics
    }

    pub fn outputs(&self) -> &[Expr] {
        &self.outputs
    }

    /// Number of leading basis entries that are states, parameters and
    /// undifferentiated unknown inputs.
    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn affine(&self) -> Option<&AffineSplit> {
        self.affine.as_ref()
    }
}

/// Unknown-input derivative slots `(input index, order)` present at `level`,
/// in basis order.
fn w_slots(m: &Model, level: u32) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    for j in 0..=level {
        for (i, &s) in m.w_deriv_bounds().iter().enumerate() {
            if j <= s {
                out.push((i, j));
            }
        }
    }
    out
}

/// Dynamics of `w_i^(j)`: the next derivative, or zero past the bound.
fn w_row(m: &Model, i: usize, j: u32) -> Expr {
    if j < m.w_deriv_bounds()[i] {
        Expr::sym(&m.unknown_inputs()[i].derivative(j + 1))
    } else {
        Expr::zero()
    }
}

fn base(m: &Model, level: u32) -> (Vec<Symbol>, Vec<(usize, u32)>) {
    let slots = w_slots(m, level);
    let mut basis: Vec<Symbol> = m.states().to_vec();
    basis.extend(m.parameters().iter().cloned());
    basis.extend(slots.iter().map(|&(i, j)| m.unknown_inputs()[i].derivative(j)));
    (basis, slots)
}

/// The `level`-augmented system. Unknown-input derivatives above an input's
/// bound are zero and are not appended.
pub fn augment(m: &Model, level: u32) -> AugmentedSystem {
    let (basis, slots) = base(m, level);
    let mut dynamics: Vec<Expr> = m.dynamics().to_vec();
    dynamics.extend(std::iter::repeat_n(Expr::zero(), m.parameters().len()));
    dynamics.extend(slots.iter().map(|&(i, j)| w_row(m, i, j)));
    AugmentedSystem {
        level,
        basis,
        dynamics,
        outputs: m.outputs().to_vec(),
        n_base: m.states().len() + m.parameters().len() + m.unknown_inputs().len(),
        affine: None,
    }
}

/// Like [`augment`], also carrying the augmented affine split.
pub fn augment_affine(m: &Model, level: u32, dec: &AffineDecomposition) -> AugmentedSystem {
    let mut aug = augment(m, level);
    let n = aug.basis.len();
    let nx = m.states().len();
    let mut drift = dec.f_xw.clone();
    drift.extend_from_slice(&aug.dynamics[nx..]);
    let directions = dec
        .f_u
        .iter()
        .map(|fu| {
            let mut d = fu.clone();
            d.resize(n, Expr::zero());
            d
        })
        .collect();
    aug.affine = Some(AffineSplit {
        drift,
        directions,
        output_drift: dec.h_xw.clone(),
        output_directions: dec.h_u.clone(),
    });
    aug
}
