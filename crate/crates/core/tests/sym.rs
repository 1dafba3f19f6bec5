use std::collections::HashMap;

use num_rational::BigRational;
use obskit_core::sym::{diff, eval_exact, eval_float, jacobian, parse_expr, substitute, Expr, Node, SymError, Symbol};
use proptest::prelude::*;

fn e(src: &str) -> Expr {
    parse_expr(src).unwrap()
}

fn s(name: &str) -> Symbol {
    Symbol::new(name)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn structural_folding() {
    assert_eq!(e("2*x + 3*x - 5*x"), Expr::zero());
    assert_eq!(e("x^0"), Expr::one());
    assert_eq!(e("x^1"), e("x"));
    assert_eq!(e("0*a"), Expr::zero());
    assert_eq!(e("1*a"), e("a"));
    assert_eq!(e("exp(ln(x))"), e("x"));
    assert_eq!(e("x*y"), e("y*x"));
    assert_eq!(e("(a + b) + c"), e("a + (b + c)"));
    assert_eq!(e("2/4"), Expr::rational(1, 2));
}

#[test]
fn equal_expressions_share_identity() {
    let a = e("k1*x1 + k2*x2^2");
    let b = e("k2*x2^2 + x1*k1");
    assert_eq!(a.id(), b.id());
}

#[test]
fn power_rule() {
    assert_eq!(diff(&e("x^2"), &s("x")), e("2*x"));
}

#[test]
fn derivative_of_compartment_rate() {
    let f = e("-(k1e + k12)*x1 + k21*x2 + b*u");
    assert_eq!(diff(&f, &s("x1")), e("-(k1e + k12)"));
}

#[test]
fn general_power_rule() {
    assert_eq!(diff(&e("x^eta"), &s("eta")), e("x^eta*ln(x)"));
}

#[test]
fn exp_and_ln_rules() {
    assert_eq!(diff(&e("exp(a*x)"), &s("x")), e("a*exp(a*x)"));
    assert_eq!(diff(&e("ln(x^2 + 1)"), &s("x")), e("2*x/(x^2 + 1)"));
}

#[test]
fn jacobian_examples() {
    let j = jacobian(&[e("x1")], &[s("x1"), s("x2")]);
    assert_eq!(j.entries(), &[Expr::one(), Expr::zero()]);

    let basis: Vec<Symbol> = ["x1", "x2", "k1e", "k12", "k21", "b"].iter().map(|n| s(n)).collect();
    let j = jacobian(&[e("x1")], &basis);
    let expect: Vec<Expr> = (0..6)
        .map(|i| if i == 0 { Expr::one() } else { Expr::zero() })
        .collect();
    assert_eq!(j.entries(), expect.as_slice());

    let j = jacobian(&[e("x*y"), e("x + y")], &[s("x"), s("y")]);
    assert_eq!((j.rows(), j.cols()), (2, 2));
    assert_eq!(j.entries(), &[e("y"), e("x"), Expr::one(), Expr::one()]);
}

#[test]
fn substitution_examples() {
    let zero = |name: &str| HashMap::from([(s(name), Expr::zero())]);
    assert_eq!(substitute(&e("x + y"), &zero("x")).unwrap(), e("y"));
    assert_eq!(substitute(&e("b*u"), &zero("u")).unwrap(), Expr::zero());
    assert_eq!(substitute(&e("x/y"), &zero("y")), Err(SymError::DivisionByZero));
}

#[test]
fn substitution_is_simultaneous() {
    let b = HashMap::from([(s("x"), e("y")), (s("y"), e("x"))]);
    assert_eq!(substitute(&e("x - 2*y"), &b).unwrap(), e("y - 2*x"));
}

#[test]
fn exact_evaluation() {
    let p = HashMap::from([(s("x"), q(3, 1))]);
    assert_eq!(eval_exact(&e("(x + 1)/(x - 1)"), &p).unwrap(), q(2, 1));
    let p = HashMap::from([(s("x"), q(2, 1)), (s("y"), q(5, 1))]);
    assert_eq!(eval_exact(&e("x^2*y"), &p).unwrap(), q(20, 1));
}

#[test]
fn exact_evaluation_errors() {
    let p = HashMap::from([(s("x"), q(1, 1))]);
    assert_eq!(eval_exact(&e("1/(x - 1)"), &p), Err(SymError::DivisionByZero));
    assert_eq!(eval_exact(&e("exp(x)"), &p), Err(SymError::NonRationalNode));
    assert_eq!(eval_exact(&e("y"), &p), Err(SymError::Unbound("y".into())));
}

#[test]
fn float_evaluation() {
    assert_eq!(eval_float(&Expr::exp(&Expr::zero()), &HashMap::new()).unwrap(), 1.0);
    let p = HashMap::from([(s("x"), 2.0)]);
    let v = eval_float(&e("x^(1/2)*ln(x)"), &p).unwrap();
    assert!((v - 2f64.sqrt() * 2f64.ln()).abs() < 1e-15);
}

#[test]
fn parse_errors() {
    assert!(parse_expr("x +").is_err());
    assert!(parse_expr("(x").is_err());
    assert!(parse_expr("x $ y").is_err());
}

#[test]
fn display_is_parseable() {
    for src in [
        "-(k1e + k12)*x1 + k21*x2 + b*u",
        "k1/(1 + (x2/(1 + (aTc/theta)^eta))^n) - x1",
        "exp(-a*t)*ln(1 + x^2) - 3/7",
        "x^(-2)*y^(1/3)",
    ] {
        let a = e(src);
        assert_eq!(e(&a.to_string()), a, "{src} printed as {a}");
    }
}

fn renormalize(x: &Expr) -> Expr {
    match x.node() {
        Node::Num(_) | Node::Sym(_) => x.clone(),
        Node::Add(ts) => Expr::sum(ts.iter().map(renormalize)),
        Node::Mul(fs) => Expr::product(fs.iter().map(renormalize)),
        Node::Pow(b, p) => renormalize(b).pow(&renormalize(p)).unwrap(),
        Node::Exp(a) => Expr::exp(&renormalize(a)),
        Node::Ln(a) => Expr::ln(&renormalize(a)).unwrap(),
    }
}

const VARS: [&str; 3] = ["x", "y", "z"];

/// Random rational expressions whose denominators are bounded away from
/// zero on positive points.
fn rational_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..3usize).prop_map(|i| Expr::var(VARS[i])),
        (-4i64..=4).prop_map(Expr::int),
        (1i64..=5, 2i64..=7).prop_map(|(n, d)| Expr::rational(n, d)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 2i64..=3).prop_map(|(a, n)| a.powi(n).unwrap()),
            (inner.clone(), inner).prop_map(|(a, b)| a * (Expr::one() + b.powi(2).unwrap()).recip().unwrap()),
        ]
    })
}

/// Rational expressions plus exp and ln of positive arguments.
fn general_expr() -> impl Strategy<Value = Expr> {
    rational_expr().prop_recursive(2, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| Expr::exp(&(a * Expr::rational(1, 10)))),
            inner.prop_map(|a| Expr::ln(&(Expr::one() + a.powi(2).unwrap())).unwrap()),
        ]
    })
}

proptest! {
    #[test]
    fn normalization_is_idempotent(a in general_expr()) {
        prop_assert_eq!(renormalize(&a), a.clone());
        prop_assert_eq!(e(&a.to_string()), a);
    }

    #[test]
    fn diff_is_linear(a in general_expr(), b in general_expr(), i in 0..3usize) {
        let v = s(VARS[i]);
        prop_assert_eq!(diff(&(&a + &b), &v), diff(&a, &v) + diff(&b, &v));
    }

    #[test]
    fn diff_matches_central_difference(
        a in rational_expr(),
        i in 0..3usize,
        p in proptest::array::uniform3(1.0f64..2.0),
    ) {
        let v = s(VARS[i]);
        let point = |shift: f64| -> HashMap<Symbol, f64> {
            VARS.iter().enumerate().map(|(j, n)| (s(n), p[j] + if j == i { shift } else { 0.0 })).collect()
        };
        let h = 1e-6;
        let d = eval_float(&diff(&a, &v), &point(0.0)).unwrap();
        let fd = (eval_float(&a, &point(h)).unwrap() - eval_float(&a, &point(-h)).unwrap()) / (2.0 * h);
        // Cancellation error of the difference quotient grows with |a| / h.
        let size = eval_float(&a, &point(0.0)).unwrap().abs();
        prop_assume!(size < 1e3);
        prop_assert!((d - fd).abs() <= 1e-6 * (1.0 + d.abs()), "d = {d}, fd = {fd} for {a}");
    }

    #[test]
    fn substitution_commutes_with_diff(a in general_expr(), c in (1i64..=9, 1i64..=9)) {
        let x = s("x");
        let bind = HashMap::from([(s("y"), Expr::rational(c.0, c.1))]);
        let lhs = diff(&substitute(&a, &bind).unwrap(), &x);
        let rhs = substitute(&diff(&a, &x), &bind).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
