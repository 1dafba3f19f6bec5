use std::collections::HashMap;

use super::expr::{Expr, Symbol};
use super::SymError;

/// Simultaneous substitution of symbols, followed by normalization.
/// Unbound symbols pass through.
pub fn substitute(e: &Expr, bindings: &HashMap<Symbol, Expr>) -> Result<Expr, SymError> {
    let mut memo = HashMap::new();
    substitute_memo(e, bindings, &mut memo)
}

/// Like [`substitute`], reusing `memo` across calls with the same bindings.
pub fn substitute_memo(
    e: &Expr,
    bindings: &HashMap<Symbol, Expr>,
    memo: &mut HashMap<u64, Expr>,
) -> Result<Expr, SymError> {
    if bindings.is_empty() {
        return Ok(e.clone());
    }
    rewrite(
        e,
        memo,
        &mut |x: &Expr| {
            if !x.free_symbols().iter().any(|s| bindings.contains_key(s)) {
                return Some(Ok(x.clone()));
            }
            x.as_symbol().map(|s| Ok(bindings[s].clone()))
        },
        |err| err,
    )
}

/// Memoized bottom-up rewrite shared by substitution-like passes.
pub(crate) fn rewrite<E>(
    e: &Expr,
    memo: &mut HashMap<u64, Expr>,
    leaf: &mut impl FnMut(&Expr) -> Option<Result<Expr, E>>,
    lift: impl Fn(super::SymError) -> E + Copy,
) -> Result<Expr, E> {
    if let Some(r) = memo.get(&e.id()) {
        return Ok(r.clone());
    }
    let out = if let Some(r) = leaf(e) {
        r?
    } else {
        let ops = e.operands();
        if ops.is_empty() {
            e.clone()
        } else {
            let mut changed = false;
            let mut new_ops = Vec::with_capacity(ops.len());
            for o in &ops {
                let n = rewrite(o, memo, leaf, lift)?;
                changed |= n != *o;
                new_ops.push(n);
            }
            if changed {
                e.rebuild(&new_ops).map_err(lift)?
            } else {
                e.clone()
            }
        }
    };
    memo.insert(e.id(), out.clone());
    Ok(out)
}
