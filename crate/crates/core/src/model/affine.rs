use std::collections::HashMap;

use super::Model;
use crate::error::{Error, Result};
use crate::point::probably_equal;
use crate::sym::{diff, substitute, Expr, Symbol};

/// Coefficients of a model that is affine in its inputs:
/// `f = f0 + sum f_u[i] u_i + sum f_w[i] w_i`, likewise for `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineDecomposition {
    pub f0: Vec<Expr>,
    pub f_u: Vec<Vec<Expr>>,
    pub f_w: Vec<Vec<Expr>>,
    pub h0: Vec<Expr>,
    pub h_u: Vec<Vec<Expr>>,
    pub h_w: Vec<Vec<Expr>>,
    /// `f` with the known inputs set to zero, i.e. `f0 + sum f_w[i] w_i`.
    pub f_xw: Vec<Expr>,
    /// `h` with the known inputs set to zero.
    pub h_xw: Vec<Expr>,
}

struct Split {
    constant: Vec<Expr>,
    coeffs: Vec<Vec<Expr>>,
    without_u: Vec<Expr>,
}

fn zero_map(syms: &[Symbol]) -> HashMap<Symbol, Expr> {
    syms.iter().map(|s| (s.clone(), Expr::zero())).collect()
}

fn split(exprs: &[Expr], inputs: &[Symbol], n_u: usize) -> Result<Split> {
    let all_zero = zero_map(inputs);
    let u_zero = zero_map(&inputs[..n_u]);
    let mut coeffs = vec![Vec::with_capacity(exprs.len()); inputs.len()];
    let mut constant = Vec::with_capacity(exprs.len());
    let mut without_u = Vec::with_capacity(exprs.len());
    for e in exprs {
        let not_affine = || Error::NotAffine(e.to_string());
        let e0 = substitute(e, &all_zero).map_err(|_| not_affine())?;
        let mut rebuilt = vec![e0.clone()];
        let mut structural = true;
        for (i, v) in inputs.iter().enumerate() {
            let c = diff(e, v);
            let c0 = substitute(&c, &all_zero).map_err(|_| not_affine())?;
            structural &= c == c0;
            rebuilt.push(&c0 * &Expr::sym(v));
            coeffs[i].push(c0);
        }
        let rebuilt = Expr::sum(rebuilt);
        // Structural normalization does not expand products, so a failed
        // syntactic match falls back to a randomized identity test.
        if !(structural && rebuilt == *e) && !probably_equal(&rebuilt, e) {
            return Err(not_affine());
        }
        constant.push(e0);
        without_u.push(substitute(e, &u_zero).map_err(|_| not_affine())?);
    }
    Ok(Split {
        constant,
        coeffs,
        without_u,
    })
}

/// Split dynamics and outputs into input-free coefficient fields.
/// Fails with [`Error::NotAffine`] naming the first offending expression.
pub fn affine_decompose(m: &Model) -> Result<AffineDecomposition> {
    let n_u = m.known_inputs().len();
    let mut inputs = m.known_inputs().to_vec();
    inputs.extend(m.unknown_inputs().iter().cloned());
    let f = split(m.dynamics(), &inputs, n_u)?;
    let h = split(m.outputs(), &inputs, n_u)?;
    let (f_u, f_w) = {
        let mut c = f.coeffs;
        let w = c.split_off(n_u);
        (c, w)
    };
    let (h_u, h_w) = {
        let mut c = h.coeffs;
        let w = c.split_off(n_u);
        (c, w)
    };
    Ok(AffineDecomposition {
        f0: f.constant,
        f_u,
        f_w,
        h0: h.constant,
        h_u,
        h_w,
        f_xw: f.without_u,
        h_xw: h.without_u,
    })
}
