mod common;

use std::collections::HashMap;

use common::{fixture, random_affine};
use num_rational::BigRational;
use obskit_core::algorithms::{observability_blocks, stack_blocks};
use obskit_core::lie::{
    build_matrix_increment, extended_lie_step, fispo_seed, input_chain, lie_derivative, Direction, LieStage, PruneMode,
};
use obskit_core::model::{affine_decompose, augment, augment_affine, DerivBound};
use obskit_core::rank::{generic_rank, RankConfig};
use obskit_core::sym::{eval_exact, parse_expr, Expr, ExprMatrix, Symbol};
use obskit_core::{parse_model, Algorithm, Model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn e(src: &str) -> Expr {
    parse_expr(src).unwrap()
}

fn stage(m: &Model, algorithm: Algorithm, k: u32, prune: PruneMode) -> LieStage {
    observability_blocks(m, algorithm, k, prune).unwrap().pop().unwrap().0
}

/// Rows of `s` reached from output `o` of the drift seed along `path`.
fn rows_along(s: &LieStage, o: usize, path: &[Direction]) -> Vec<Expr> {
    s.rows_new
        .iter()
        .zip(&s.tags)
        .filter(|(_, t)| t.output == o && t.seed == Direction::Drift && t.path == path)
        .map(|(r, _)| r.clone())
        .collect()
}

#[test]
fn c2m_drift_derivative() {
    let m = fixture("c2m");
    let aug = augment_affine(&m, 0, &affine_decompose(&m).unwrap());
    let drift = &aug.affine().unwrap().drift;
    assert_eq!(
        lie_derivative(&[e("x1")], drift, aug.basis()),
        [e("-(k1e + k12)*x1 + k21*x2")]
    );
}

#[test]
fn constant_has_zero_derivative() {
    let m = fixture("bolie");
    let aug = augment(&m, 0);
    assert_eq!(lie_derivative(&[e("7/3")], aug.dynamics(), aug.basis()), [Expr::zero()]);
}

#[test]
fn input_direction_derivatives() {
    let s = stage(&fixture("c2m"), Algorithm::Orcdf, 1, PruneMode::NullBlocks);
    assert_eq!(rows_along(&s, 0, &[Direction::Input(0)]), [e("b")]);

    let s = stage(&fixture("bolie"), Algorithm::Orcdf, 1, PruneMode::NullBlocks);
    assert_eq!(rows_along(&s, 0, &[Direction::Input(0)]), [e("1/Vp")]);

    let s = stage(&fixture("hiv_known"), Algorithm::Orcdf, 1, PruneMode::NullBlocks);
    let along_u: Vec<Expr> = (0..2).flat_map(|o| rows_along(&s, o, &[Direction::Input(0)])).collect();
    assert_eq!(along_u, [Expr::zero(), Expr::zero()]);
}

#[test]
fn two_dof_force_coefficient() {
    // c2/(m1*m2) with c2 = 5/4 and m1 = 3/2.
    let s = stage(&fixture("2dof"), Algorithm::Orcdf, 1, PruneMode::NullBlocks);
    assert_eq!(rows_along(&s, 1, &[Direction::Input(0)]), [e("5/(6*m2)")]);
}

#[test]
fn input_derivative_term_depends_on_bound() {
    let mut m = fixture("c2m");
    let unbounded = stage(&m, Algorithm::Fispo, 2, PruneMode::NullBlocks).rows_new;
    m.set_u_deriv_bound("u", DerivBound::Finite(0)).unwrap();
    let constant = stage(&m, Algorithm::Fispo, 2, PruneMode::NullBlocks).rows_new;
    let u1 = Expr::sym(&Symbol::new("u").derivative(1));
    assert_eq!(&unbounded[0] - &constant[0], e("b") * u1);
    let y2 = e("(k1e + k12)^2*x1 - (k1e + k12)*k21*x2 - (k1e + k12)*b*u + k21*k12*x1 - k21^2*x2");
    assert!(same_function(&constant[0], &y2));
}

/// Equality as rational functions, checked exactly at a few rational points.
fn same_function(a: &Expr, b: &Expr) -> bool {
    let mut syms = a.free_symbols().to_vec();
    syms.extend(b.free_symbols().iter().cloned());
    (1..=3i64).all(|t| {
        let point: HashMap<Symbol, BigRational> = syms
            .iter()
            .enumerate()
            .map(|(i, s)| {
                (
                    s.clone(),
                    BigRational::new((7 * t + 3 * i as i64).into(), (i as i64 + 2).into()),
                )
            })
            .collect();
        eval_exact(a, &point) == eval_exact(b, &point)
    })
}

#[test]
fn zero_rows_stay_zero() {
    let m = fixture("c2m");
    let aug = augment(&m, 0);
    let zeros = vec![Expr::zero(); 3];
    assert_eq!(extended_lie_step(&zeros, &aug, &input_chain(&m, 3)), zeros);
}

#[test]
fn first_block_of_c2m() {
    let m = fixture("c2m");
    let block = build_matrix_increment(&fispo_seed(&augment(&m, 0)));
    assert_eq!(block.rows(), 1);
    let ones: Vec<Expr> = (0..6)
        .map(|i| if i == 0 { Expr::one() } else { Expr::zero() })
        .collect();
    assert_eq!(block.row(0), ones.as_slice());
}

#[test]
fn constant_rows_give_zero_block() {
    let mut s = fispo_seed(&augment(&fixture("bolie"), 0));
    s.rows_new = vec![e("3"), e("-1/2")];
    let block = build_matrix_increment(&s);
    assert!(block.entries().iter().all(Expr::is_zero));
}

#[test]
fn constant_inputs_reduce_to_plain_lie_derivatives() {
    for name in ["c2m", "bolie", "hiv_known"] {
        let mut m = fixture(name);
        m.set_all_u_deriv_bounds(DerivBound::Finite(0));
        let aug = augment(&m, 0);
        let mut prev = aug.outputs().to_vec();
        for k in 1..=3 {
            let ext = extended_lie_step(&prev, &aug, &input_chain(&m, k));
            assert_eq!(ext, lie_derivative(&prev, aug.dynamics(), aug.basis()), "{name} k={k}");
            prev = ext;
        }
    }
}

#[test]
fn row_counts_follow_growth_formulas() {
    for name in ["c2m", "bolie", "2dof", "hiv_known", "hiv_unknown"] {
        let m = fixture(name);
        let out = m.outputs().len();
        let n_u = m.known_inputs().len();
        for (s, _) in observability_blocks(&m, Algorithm::Fispo, 4, PruneMode::NullBlocks).unwrap() {
            assert_eq!(s.rows_new.len(), out, "{name}");
            assert_eq!(s.rows_total, out * (s.k as usize + 1), "{name}");
        }
        let mut nominal = 0;
        let mut pruned = 0;
        for (s, _) in observability_blocks(&m, Algorithm::Orcdf, 3, PruneMode::None).unwrap() {
            nominal += out * (1 + n_u).pow(s.k + 1);
            assert_eq!(s.rows_total, nominal, "{name}");
            assert_eq!(s.pruned, 0);
        }
        for (s, _) in observability_blocks(&m, Algorithm::Orcdf, 3, PruneMode::ZeroRows).unwrap() {
            pruned += s.pruned;
            assert!(s.rows_new.iter().all(|r| !r.is_zero()));
        }
        let last = stage(&m, Algorithm::Orcdf, 3, PruneMode::ZeroRows);
        assert_eq!(last.rows_total + pruned, nominal, "{name}");
    }
}

#[test]
fn hiv_known_input_keeps_fourteen_rows() {
    let s = stage(&fixture("hiv_known"), Algorithm::Orcdf, 2, PruneMode::NullBlocks);
    assert_eq!(s.rows_total, 14);
}

#[test]
fn algorithms_coincide_without_known_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let nx = rng.gen_range(1..=3);
        let nw = rng.gen_range(0..=1);
        let m = random_affine(&mut rng, nx, 0, nw);
        let f = observability_blocks(&m, Algorithm::Fispo, 3, PruneMode::NullBlocks).unwrap();
        let o = observability_blocks(&m, Algorithm::Orcdf, 3, PruneMode::NullBlocks).unwrap();
        for ((fs, fb), (os, ob)) in f.iter().zip(&o) {
            assert_eq!(fs.basis, os.basis);
            assert_eq!(fb, ob, "k={} for {}", fs.k, m.to_text());
        }
    }
}

fn without_direction(s: &LieStage, block: &ExprMatrix, dir: Direction) -> ExprMatrix {
    let rows = (0..block.rows())
        .filter(|&r| s.tags[r].path.last() != Some(&dir))
        .map(|r| block.row(r).to_vec())
        .collect();
    ExprMatrix::from_rows(block.cols(), rows)
}

#[test]
fn dependent_input_direction_is_redundant() {
    // f_u2 = 2*f_u1.
    let m = parse_model(
        "states: x1, x2, x3
         parameters: p1, p2
         known_inputs: u1, u2
         dynamics:
           x1' = -p1*x1 + x2*u1 + 2*x2*u2
           x2' = p2*x3 + u1 + 2*u2
           x3' = x1*x2 - x3
         outputs:
           y1 = x1",
    )
    .unwrap();
    let cfg = RankConfig::default();
    for k in 1..=3 {
        let mut blocks = observability_blocks(&m, Algorithm::Orcdf, k, PruneMode::None).unwrap();
        let full = generic_rank(&stack_blocks(&blocks), &cfg).unwrap().rank;
        let (s, b) = blocks.pop().unwrap();
        let reduced = without_direction(&s, &b, Direction::Input(1));
        assert!(reduced.rows() < b.rows());
        let head = stack_blocks(&blocks);
        let trimmed = if head.rows() == 0 {
            reduced
        } else {
            head.vstack(&reduced)
        };
        assert_eq!(generic_rank(&trimmed, &cfg).unwrap().rank, full, "k={k}");
    }
}
