#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::Zero;
use obskit_core::sym::{Expr, Symbol};
use obskit_core::{parse_model, Algorithm, Model, Report, Termination};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FIXTURES: [&str; 6] = ["c2m", "bolie", "2dof", "hiv_known", "hiv_unknown", "ts"];

pub fn fixture(name: &str) -> Model {
    let path = format!("{}/../../models/{name}.txt", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_model(&text)
        .unwrap_or_else(|e| panic!("{name}: {e}"))
        .with_name(name)
}

fn symbols(prefix: &str, n: usize) -> Vec<Symbol> {
    (0..n).map(|i| Symbol::new(&format!("{prefix}{i}"))).collect()
}

/// Random polynomial of degree at most 2 in `vars`, with up to three terms.
fn poly(rng: &mut ChaCha8Rng, vars: &[Symbol]) -> Expr {
    let terms = rng.gen_range(1..=3);
    Expr::sum((0..terms).map(|_| {
        let mut t = Expr::int(rng.gen_range(-3..=3));
        for _ in 0..rng.gen_range(0..=2) {
            t = t * Expr::sym(&vars[rng.gen_range(0..vars.len())]);
        }
        t
    }))
}

/// Random model affine in its inputs: `nx` states, two parameters, `nu`
/// known and `nw` unknown inputs, polynomial coefficients of degree <= 2.
pub fn random_affine(rng: &mut ChaCha8Rng, nx: usize, nu: usize, nw: usize) -> Model {
    let xs = symbols("x", nx);
    let ps = symbols("p", 2);
    let us = symbols("u", nu);
    let ws = symbols("w", nw);
    let vars: Vec<Symbol> = xs.iter().chain(&ps).cloned().collect();
    let entry = |rng: &mut ChaCha8Rng| {
        let mut terms = vec![poly(rng, &vars)];
        for v in us.iter().chain(&ws) {
            if rng.gen_bool(0.6) {
                terms.push(poly(rng, &vars) * Expr::sym(v));
            }
        }
        Expr::sum(terms)
    };
    let f: Vec<Expr> = (0..nx).map(|_| entry(rng)).collect();
    let h = vec![entry(rng)];
    let mut m = Model::new(xs, ps, us, ws, f, h).unwrap();
    for j in 0..nw {
        m.set_w_deriv_bound(&format!("w{j}"), rng.gen_range(0..=2)).unwrap();
    }
    m
}

/// Rank by fraction-exact Gaussian elimination.
pub fn rational_rank(mut a: Vec<Vec<BigRational>>) -> usize {
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][c].clone();
        for r in 0..a.len() {
            if r != rank && !a[r][c].is_zero() {
                let f = &a[r][c] / &pivot;
                for j in c..cols {
                    let d = &f * &a[rank][j];
                    a[r][j] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(BigRational::zero(), |s, (x, brow)| s + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

/// Rank of `(C; CA; ...; CA^(n-1))`.
pub fn kalman_rank(a: &[Vec<BigRational>], c: &[Vec<BigRational>]) -> usize {
    let mut blocks = Vec::new();
    let mut power = c.to_vec();
    for _ in 0..a.len() {
        blocks.extend(power.iter().cloned());
        power = mat_mul(&power, a);
    }
    rational_rank(blocks)
}

pub fn linear_model(a: &[Vec<BigRational>], c: &[Vec<BigRational>]) -> Model {
    let n = a.len();
    let xs: Vec<Symbol> = (0..n).map(|i| Symbol::new(&format!("x{i}"))).collect();
    let lin = |row: &[BigRational]| Expr::sum(row.iter().zip(&xs).map(|(k, x)| Expr::num(k.clone()) * Expr::sym(x)));
    Model::new(
        xs.clone(),
        vec![],
        vec![],
        vec![],
        a.iter().map(|r| lin(r)).collect(),
        c.iter().map(|r| lin(r)).collect(),
    )
    .unwrap()
}

/// Random sparse `(A, C)` with `n <= 4` states and one or two outputs.
pub fn random_lti(rng: &mut ChaCha8Rng) -> (Vec<Vec<BigRational>>, Vec<Vec<BigRational>>) {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=2);
    let mut entry = |density: f64| {
        if rng.gen_bool(density) {
            BigRational::new(rng.gen_range(-5i64..=5).into(), rng.gen_range(1i64..=3).into())
        } else {
            BigRational::zero()
        }
    };
    let a = (0..n).map(|_| (0..n).map(|_| entry(0.4)).collect()).collect();
    let c = (0..m).map(|_| (0..n).map(|_| entry(0.5)).collect()).collect();
    (a, c)
}

/// Checks every report must pass.
pub fn check_invariants(m: &Model, r: &Report) {
    let outputs = m.outputs().len();
    let mut seen = BTreeSet::new();
    let mut prev: Option<(usize, usize)> = None;
    for it in &r.iterations {
        for n in &it.newly_classified {
            assert!(seen.insert(n.clone()), "{} classified twice", n);
        }
        assert!(it.rank <= it.n_k.min(it.rows));
        let (prev_rows, prev_rank) = prev.unwrap_or((0, 0));
        assert!(it.rank >= prev_rank, "{}: rank fell", r.model);
        let new_rows = it.rows - prev_rows;
        match r.algorithm {
            Algorithm::Fispo => {
                assert_eq!(new_rows, outputs);
                assert!(it.rank - prev_rank <= outputs);
            }
            Algorithm::Orcdf => {
                assert!(it.rank - prev_rank <= new_rows);
                let n_u = m.known_inputs().len();
                let nominal: usize = (0..=it.k).map(|i| outputs * (1 + n_u).pow(i + 1)).sum();
                assert_eq!(it.rows + it.pruned, nominal, "{}", r.model);
            }
        }
        prev = Some((it.rows, it.rank));
    }
    // Verdicts agree with the iteration log.
    for (name, v) in &r.verdicts {
        assert_eq!(v.is_positive(), seen.contains(name), "{} {name}", r.model);
    }
    if r.termination == Termination::FullRank {
        assert!(r.verdicts.values().all(|v| v.is_positive()), "{}", r.model);
    }
    if m.unknown_inputs().is_empty() && r.algorithm == Algorithm::Fispo {
        assert!(r.final_k() as usize <= m.states().len() + m.parameters().len());
    }
}
