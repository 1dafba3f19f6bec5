use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;

use super::expr::{Expr, Node, Symbol};
use super::SymError;

/// Arithmetic an expression can be evaluated in.
pub trait Domain {
    type Value: Clone;
    fn constant(&self, r: &BigRational) -> Result<Self::Value, SymError>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn powi(&self, a: &Self::Value, n: &BigInt) -> Result<Self::Value, SymError>;
    fn pow(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, SymError>;
    fn exp(&self, a: &Self::Value) -> Result<Self::Value, SymError>;
    fn ln(&self, a: &Self::Value) -> Result<Self::Value, SymError>;
}

/// Exact rational arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exact;

impl Domain for Exact {
    type Value = BigRational;

    fn constant(&self, r: &BigRational) -> Result<BigRational, SymError> {
        Ok(r.clone())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn powi(&self, a: &BigRational, n: &BigInt) -> Result<BigRational, SymError> {
        if a.is_zero() && n.is_negative() {
            return Err(SymError::DivisionByZero);
        }
        let k = n.abs().to_usize().ok_or(SymError::ExponentTooLarge)?;
        let base = if n.is_negative() { a.recip() } else { a.clone() };
        Ok(num_traits::pow(base, k))
    }
    fn pow(&self, _: &BigRational, _: &BigRational) -> Result<BigRational, SymError> {
        Err(SymError::NonRationalNode)
    }
    fn exp(&self, _: &BigRational) -> Result<BigRational, SymError> {
        Err(SymError::NonRationalNode)
    }
    fn ln(&self, _: &BigRational) -> Result<BigRational, SymError> {
        Err(SymError::NonRationalNode)
    }
}

/// Arithmetic in the prime field Z/pZ.
#[derive(Debug, Clone, Copy)]
pub struct ModP {
    pub p: u64,
}

impl ModP {
    /// The Mersenne prime 2^61 - 1.
    pub const MERSENNE61: u64 = (1 << 61) - 1;

    pub fn new(p: u64) -> Self {
        ModP { p }
    }

    pub fn mul_mod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn add_mod(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.p as u128) as u64
    }

    pub fn sub_mod(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }

    pub fn pow_mod(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_mod(acc, a);
            }
            a = self.mul_mod(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64, SymError> {
        if a.is_multiple_of(self.p) {
            return Err(SymError::DivisionByZero);
        }
        Ok(self.pow_mod(a, self.p - 2))
    }

    fn reduce(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.p)).to_u64().unwrap()
    }
}

impl Domain for ModP {
    type Value = u64;

    fn constant(&self, r: &BigRational) -> Result<u64, SymError> {
        let n = self.reduce(r.numer());
        let d = self.reduce(r.denom());
        Ok(self.mul_mod(n, self.inv(d)?))
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        self.add_mod(*a, *b)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.mul_mod(*a, *b)
    }
    fn powi(&self, a: &u64, n: &BigInt) -> Result<u64, SymError> {
        let base = if n.is_negative() { self.inv(*a)? } else { *a };
        if base == 0 {
            return Ok(if n.is_zero() { 1 } else { 0 });
        }
        let e = n.abs().mod_floor(&BigInt::from(self.p - 1)).to_u64().unwrap();
        Ok(self.pow_mod(base, e))
    }
    fn pow(&self, _: &u64, _: &u64) -> Result<u64, SymError> {
        Err(SymError::NonRationalNode)
    }
    fn exp(&self, _: &u64) -> Result<u64, SymError> {
        Err(SymError::NonRationalNode)
    }
    fn ln(&self, _: &u64) -> Result<u64, SymError> {
        Err(SymError::NonRationalNode)
    }
}

/// Double-double floating arithmetic (about 106 bits of significand).
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleDouble;

fn checked(v: TwoFloat) -> Result<TwoFloat, SymError> {
    if v.hi().is_finite() {
        Ok(v)
    } else {
        Err(SymError::DivisionByZero)
    }
}

// The transcendental functions of `twofloat` are only accurate to about
// 1e-14, so exp and ln are done here.

fn dd_ln2() -> TwoFloat {
    TwoFloat::from(std::f64::consts::LN_2) + 2.319_046_813_846_299_6e-17
}

/// `exp` by reduction to `|r| <= ln(2)/2048` and a Taylor series.
fn dd_exp(x: TwoFloat) -> TwoFloat {
    if x.hi() > 709.8 {
        return TwoFloat::from(f64::INFINITY);
    }
    if x.hi() < -745.0 {
        return TwoFloat::from(0.0);
    }
    let k = (x.hi() / std::f64::consts::LN_2).round();
    let r = (x - dd_ln2() * k) * (1.0 / 1024.0);
    let mut term = TwoFloat::from(1.0);
    let mut sum = TwoFloat::from(1.0);
    for n in 1..=12 {
        term = term * r / n as f64;
        sum += term;
    }
    for _ in 0..10 {
        sum = sum * sum;
    }
    // Scale in two steps so that 2^k never overflows on its own.
    let half = (k / 2.0).trunc();
    sum * 2f64.powi(half as i32) * 2f64.powi((k - half) as i32)
}

/// `ln` by Newton iteration on [`dd_exp`].
fn dd_ln(a: TwoFloat) -> TwoFloat {
    let mut y = TwoFloat::from(a.hi().ln());
    for _ in 0..2 {
        y = y + a * dd_exp(-y) - 1.0;
    }
    y
}

pub(crate) fn rational_to_twofloat(r: &BigRational) -> TwoFloat {
    let n = r.numer();
    let d = r.denom();
    let to_tf = |x: &BigInt| -> TwoFloat {
        let hi = x.to_f64().unwrap_or(f64::INFINITY);
        let rest = x - BigInt::from_f64_exact(hi);
        TwoFloat::new_add(hi, rest.to_f64().unwrap_or(0.0))
    };
    if d.is_one() {
        to_tf(n)
    } else {
        to_tf(n) / to_tf(d)
    }
}

trait FromF64Exact {
    fn from_f64_exact(v: f64) -> BigInt;
}

impl FromF64Exact for BigInt {
    fn from_f64_exact(v: f64) -> BigInt {
        num_traits::FromPrimitive::from_f64(v).unwrap_or_default()
    }
}

impl Domain for DoubleDouble {
    type Value = TwoFloat;

    fn constant(&self, r: &BigRational) -> Result<TwoFloat, SymError> {
        checked(rational_to_twofloat(r))
    }
    fn add(&self, a: &TwoFloat, b: &TwoFloat) -> TwoFloat {
        *a + *b
    }
    fn mul(&self, a: &TwoFloat, b: &TwoFloat) -> TwoFloat {
        *a * *b
    }
    fn powi(&self, a: &TwoFloat, n: &BigInt) -> Result<TwoFloat, SymError> {
        if *a == TwoFloat::from(0.0) && n.is_negative() {
            return Err(SymError::DivisionByZero);
        }
        let k = n.to_i32().ok_or(SymError::ExponentTooLarge)?;
        checked(a.powi(k))
    }
    fn pow(&self, a: &TwoFloat, b: &TwoFloat) -> Result<TwoFloat, SymError> {
        if a.hi() <= 0.0 {
            return Err(SymError::DivisionByZero);
        }
        checked(dd_exp(dd_ln(*a) * *b))
    }
    fn exp(&self, a: &TwoFloat) -> Result<TwoFloat, SymError> {
        checked(dd_exp(*a))
    }
    fn ln(&self, a: &TwoFloat) -> Result<TwoFloat, SymError> {
        if a.hi() <= 0.0 {
            return Err(SymError::LogOfZero);
        }
        checked(dd_ln(*a))
    }
}

/// Memoizing DAG evaluator. Symbol values come from `lookup`; shared
/// subterms are evaluated once per evaluator.
pub struct Evaluator<D: Domain, F> {
    domain: D,
    lookup: F,
    memo: HashMap<u64, D::Value>,
}

impl<D, F> Evaluator<D, F>
where
    D: Domain,
    F: FnMut(&Symbol) -> Option<D::Value>,
{
    pub fn new(domain: D, lookup: F) -> Self {
        Evaluator {
            domain,
            lookup,
            memo: HashMap::new(),
        }
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn eval(&mut self, root: &Expr) -> Result<D::Value, SymError> {
        if let Some(v) = self.memo.get(&root.id()) {
            return Ok(v.clone());
        }
        // Explicit post-order walk; Lie derivatives produce deep DAGs.
        let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
        while let Some((e, expanded)) = stack.pop() {
            if self.memo.contains_key(&e.id()) {
                continue;
            }
            if !expanded {
                let ops = e.operands();
                if ops.is_empty() {
                    let v = self.leaf(&e)?;
                    self.memo.insert(e.id(), v);
                } else {
                    stack.push((e.clone(), true));
                    for o in ops {
                        if !self.memo.contains_key(&o.id()) {
                            stack.push((o, false));
                        }
                    }
                }
                continue;
            }
            let v = self.combine(&e)?;
            self.memo.insert(e.id(), v);
        }
        Ok(self.memo[&root.id()].clone())
    }

    fn leaf(&mut self, e: &Expr) -> Result<D::Value, SymError> {
        match e.node() {
            Node::Num(r) => self.domain.constant(r),
            Node::Sym(s) => (self.lookup)(s).ok_or_else(|| SymError::Unbound(s.name().to_string())),
            _ => unreachable!("leaf nodes have no operands"),
        }
    }

    fn combine(&self, e: &Expr) -> Result<D::Value, SymError> {
        let get = |x: &Expr| &self.memo[&x.id()];
        let d = &self.domain;
        match e.node() {
            Node::Add(ts) => {
                let mut acc = get(&ts[0]).clone();
                for t in &ts[1..] {
                    acc = d.add(&acc, get(t));
                }
                Ok(acc)
            }
            Node::Mul(fs) => {
                let mut acc = get(&fs[0]).clone();
                for f in &fs[1..] {
                    acc = d.mul(&acc, get(f));
                }
                Ok(acc)
            }
            Node::Pow(b, x) => match x.as_num() {
                Some(r) if r.is_integer() => d.powi(get(b), &r.to_integer()),
                _ => d.pow(get(b), get(x)),
            },
            Node::Exp(a) => d.exp(get(a)),
            Node::Ln(a) => d.ln(get(a)),
            Node::Num(_) | Node::Sym(_) => unreachable!("handled as leaves"),
        }
    }
}

/// Exact rational value of `e` at `point`.
pub fn eval_exact(e: &Expr, point: &HashMap<Symbol, BigRational>) -> Result<BigRational, SymError> {
    if !e.is_rational() {
        return Err(SymError::NonRationalNode);
    }
    Evaluator::new(Exact, |s: &Symbol| point.get(s).cloned()).eval(e)
}

/// Floating value of `e` at `point`, computed in double-double and rounded to `f64`.
pub fn eval_float(e: &Expr, point: &HashMap<Symbol, f64>) -> Result<f64, SymError> {
    let v = Evaluator::new(DoubleDouble, |s: &Symbol| point.get(s).map(|&x| TwoFloat::from(x))).eval(e)?;
    Ok(v.hi() + v.lo())
}
