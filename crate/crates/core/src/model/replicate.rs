use std::collections::HashMap;

use super::Model;
use crate::error::{Error, Result};
use crate::sym::{substitute, Expr, Symbol};

fn suffixed(s: &Symbol, k: usize) -> Symbol {
    Symbol::new(&format!("{}_e{k}", s.name()))
}

/// Stack `n_exp` copies of the model that share parameters. Replica `k`
/// (1-based) renames states, inputs and outputs with the suffix `_e<k>`.
pub fn replicate_for_experiments(m: &Model, n_exp: usize) -> Result<Model> {
    if n_exp == 0 {
        return Err(Error::InvalidOptions("number of experiments must be at least 1".into()));
    }
    let mut states = Vec::new();
    let mut known = Vec::new();
    let mut unknown = Vec::new();
    let mut dynamics = Vec::new();
    let mut outputs = Vec::new();
    let mut output_names = Vec::new();
    let mut u_bounds = Vec::new();
    let mut w_bounds = Vec::new();
    let mut excluded = Vec::new();
    for k in 1..=n_exp {
        let rename: HashMap<Symbol, Expr> = m
            .states()
            .iter()
            .chain(m.known_inputs())
            .chain(m.unknown_inputs())
            .map(|s| (s.clone(), Expr::sym(&suffixed(s, k))))
            .collect();
        states.extend(m.states().iter().map(|s| suffixed(s, k)));
        known.extend(m.known_inputs().iter().map(|s| suffixed(s, k)));
        unknown.extend(m.unknown_inputs().iter().map(|s| suffixed(s, k)));
        for f in m.dynamics() {
            dynamics.push(substitute(f, &rename)?);
        }
        for h in m.outputs() {
            outputs.push(substitute(h, &rename)?);
        }
        output_names.extend(m.output_names().iter().map(|n| format!("{n}_e{k}")));
        u_bounds.extend(m.u_deriv_bounds().iter().copied());
        w_bounds.extend(m.w_deriv_bounds().iter().copied());
        excluded.extend(m.excluded().iter().map(|s| {
            if m.parameters().contains(s) {
                s.name().to_string()
            } else {
                suffixed(s, k).name().to_string()
            }
        }));
    }
    // Model::new rejects any clash between suffixed names and parameters.
    let mut out = Model::new(states, m.parameters().to_vec(), known, unknown, dynamics, outputs)?
        .with_name(m.name())
        .with_constants(m.constants().to_vec())?
        .with_output_names(output_names)?;
    out.u_deriv_bound = u_bounds;
    out.w_deriv_bound = w_bounds;
    out.set_excluded(&excluded)?;
    Ok(out)
}
