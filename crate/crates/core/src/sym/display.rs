use std::fmt::{self, Write};

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::expr::{Expr, Node};

const ADD: u8 = 0;
const MUL: u8 = 1;
const UNARY: u8 = 2;
const ATOM: u8 = 3;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, ADD)
    }
}

fn is_negative(e: &Expr) -> bool {
    match e.node() {
        Node::Num(r) => r.is_negative(),
        Node::Mul(fs) => fs[0].as_num().is_some_and(|c| c.is_negative()),
        _ => false,
    }
}

fn write_num(f: &mut impl Write, r: &BigRational, ctx: u8) -> fmt::Result {
    let needs_paren = (r.is_negative() && ctx > ADD) || (!r.is_integer() && ctx >= UNARY);
    if needs_paren {
        f.write_char('(')?;
    }
    if r.is_integer() {
        write!(f, "{}", r.numer())?;
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())?;
    }
    if needs_paren {
        f.write_char(')')?;
    }
    Ok(())
}

fn write_expr(f: &mut impl Write, e: &Expr, ctx: u8) -> fmt::Result {
    match e.node() {
        Node::Num(r) => write_num(f, r, ctx),
        Node::Sym(s) => f.write_str(s.name()),
        Node::Add(ts) => {
            if ctx > ADD {
                f.write_char('(')?;
            }
            // Constants sort first; print them last, as people write them.
            let mut order: Vec<&Expr> = ts.iter().filter(|t| t.as_num().is_none()).collect();
            order.extend(ts.iter().filter(|t| t.as_num().is_some()));
            for (i, t) in order.into_iter().enumerate() {
                if i == 0 {
                    write_expr(f, t, ADD)?;
                } else if is_negative(t) {
                    f.write_str(" - ")?;
                    write_expr(f, &-t, MUL)?;
                } else {
                    f.write_str(" + ")?;
                    write_expr(f, t, MUL)?;
                }
            }
            if ctx > ADD {
                f.write_char(')')?;
            }
            Ok(())
        }
        Node::Mul(fs) => write_mul(f, fs, ctx),
        Node::Pow(b, x) => {
            if let Some(r) = x.as_num() {
                if r.is_negative() {
                    return write_mul(f, std::slice::from_ref(e), ctx);
                }
            }
            if ctx > UNARY {
                f.write_char('(')?;
            }
            write_expr(f, b, ATOM)?;
            f.write_char('^')?;
            write_expr(f, x, ATOM)?;
            if ctx > UNARY {
                f.write_char(')')?;
            }
            Ok(())
        }
        Node::Exp(a) => {
            f.write_str("exp(")?;
            write_expr(f, a, ADD)?;
            f.write_char(')')
        }
        Node::Ln(a) => {
            f.write_str("ln(")?;
            write_expr(f, a, ADD)?;
            f.write_char(')')
        }
    }
}

fn write_mul(f: &mut impl Write, fs: &[Expr], ctx: u8) -> fmt::Result {
    let mut coeff = BigRational::one();
    let mut numer: Vec<Expr> = Vec::new();
    let mut denom: Vec<Expr> = Vec::new();
    for x in fs {
        match x.node() {
            Node::Num(r) => coeff *= r,
            Node::Pow(b, p) if p.as_num().is_some_and(|r| r.is_negative()) => {
                let flipped = -p;
                denom.push(b.pow(&flipped).expect("non-zero base"));
            }
            _ => numer.push(x.clone()),
        }
    }
    let negative = coeff.is_negative();
    let coeff = coeff.abs();
    let wrap = ctx > MUL || (negative && ctx > ADD);
    if wrap {
        f.write_char('(')?;
    }
    if negative {
        f.write_char('-')?;
    }
    let mut first = true;
    if !coeff.numer().is_one() || numer.is_empty() {
        write!(f, "{}", coeff.numer())?;
        first = false;
    }
    for x in &numer {
        if !first {
            f.write_char('*')?;
        }
        write_expr(f, x, MUL)?;
        first = false;
    }
    let dcoef = coeff.denom();
    let dcount = denom.len() + usize::from(!dcoef.is_one());
    if dcount > 0 {
        f.write_char('/')?;
        if dcount > 1 {
            f.write_char('(')?;
        }
        let mut first = true;
        if !dcoef.is_one() {
            write!(f, "{dcoef}")?;
            first = false;
        }
        for x in &denom {
            if !first {
                f.write_char('*')?;
            }
            write_expr(f, x, if dcount > 1 { MUL } else { UNARY })?;
            first = false;
        }
        if dcount > 1 {
            f.write_char(')')?;
        }
    }
    if wrap {
        f.write_char(')')?;
    }
    Ok(())
}
