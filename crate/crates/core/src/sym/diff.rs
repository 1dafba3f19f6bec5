use std::sync::LazyLock;

use dashmap::DashMap;

use super::expr::{Expr, Node, Symbol};

// Derivatives of interned nodes never change, so they are memoized for the
// lifetime of the process. Lie-derivative recursions revisit the same
// subterms at every stage.
static CACHE: LazyLock<DashMap<(u64, Symbol), Expr>> = LazyLock::new(DashMap::new);

/// Partial derivative of `e` with respect to `s`, normalized.
pub fn diff(e: &Expr, s: &Symbol) -> Expr {
    if !e.depends_on(s) {
        return Expr::zero();
    }
    let key = (e.id(), s.clone());
    if let Some(d) = CACHE.get(&key) {
        return d.clone();
    }
    let d = diff_uncached(e, s);
    CACHE.insert(key, d.clone());
    d
}

fn diff_uncached(e: &Expr, s: &Symbol) -> Expr {
    match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Sym(x) => {
            if x == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(ts) => Expr::sum(ts.iter().map(|t| diff(t, s))),
        Node::Mul(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                if !f.depends_on(s) {
                    continue;
                }
                let df = diff(f, s);
                let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                factors.extend(fs[..i].iter().cloned());
                factors.push(df);
                factors.extend(fs[i + 1..].iter().cloned());
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Node::Pow(base, exponent) => {
            let db = diff(base, s);
            if !exponent.depends_on(s) {
                // d(a^c) = c * a^(c-1) * a'
                let lowered = base
                    .pow(&(exponent - &Expr::one()))
                    .expect("base of an interned power is non-zero");
                Expr::product([exponent.clone(), lowered, db])
            } else {
                // d(a^b) = a^b * (b' ln a + b a' / a)
                let de = diff(exponent, s);
                let ln_base = Expr::ln(base).expect("base of an interned power is non-zero");
                let inv = base.recip().expect("base of an interned power is non-zero");
                let inner = Expr::sum([de * ln_base, Expr::product([exponent.clone(), db, inv])]);
                e * &inner
            }
        }
        Node::Exp(a) => e * &diff(a, s),
        Node::Ln(a) => {
            let inv = a.recip().expect("argument of an interned logarithm is non-zero");
            diff(a, s) * inv
        }
    }
}

/// Gradient of `e` along `syms`.
pub fn gradient(e: &Expr, syms: &[Symbol]) -> Vec<Expr> {
    syms.iter().map(|s| diff(e, s)).collect()
}

/// Total derivative along a vector field: sum over `basis[j]` of `de/dbasis[j] * field[j]`.
pub fn directional(e: &Expr, basis: &[Symbol], field: &[Expr]) -> Expr {
    debug_assert_eq!(basis.len(), field.len());
    Expr::sum(
        basis
            .iter()
            .zip(field)
            .filter(|(s, f)| !f.is_zero() && e.depends_on(s))
            .map(|(s, f)| diff(e, s) * f),
    )
}
