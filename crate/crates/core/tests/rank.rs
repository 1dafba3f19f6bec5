mod common;

use common::{fixture, kalman_rank, linear_model, random_lti};
use num_rational::BigRational;
use obskit_core::algorithms::{observability_blocks, stack_blocks};
use obskit_core::lie::PruneMode;
use obskit_core::rank::{column_elimination_test, generic_rank, RankConfig, RankMethod};
use obskit_core::sym::{parse_expr, Expr, ExprMatrix};
use obskit_core::Algorithm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matrix(rows: &[&[&str]]) -> ExprMatrix {
    let cols = rows[0].len();
    ExprMatrix::from_rows(
        cols,
        rows.iter()
            .map(|r| r.iter().map(|s| parse_expr(s).unwrap()).collect())
            .collect(),
    )
}

fn with_method(method: RankMethod) -> RankConfig {
    RankConfig {
        method: Some(method),
        ..RankConfig::default()
    }
}

#[test]
fn oracle_agrees_on_a_known_case() {
    let q = |v: i64| BigRational::from_integer(v.into());
    // Chain x0 <- x1 <- x2 observed at x0 is observable; cutting the chain is not.
    let chain = vec![vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)], vec![q(0), q(0), q(0)]];
    let c = vec![vec![q(1), q(0), q(0)]];
    assert_eq!(kalman_rank(&chain, &c), 3);
    let cut = vec![vec![q(0), q(1), q(0)], vec![q(0), q(0), q(0)], vec![q(0), q(0), q(0)]];
    assert_eq!(kalman_rank(&cut, &c), 2);
}

#[test]
fn fispo_rank_matches_kalman_rank_on_random_linear_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut deficient = 0;
    for _ in 0..100 {
        let (a, c) = random_lti(&mut rng);
        let n = a.len();
        let model = linear_model(&a, &c);
        let blocks = observability_blocks(&model, Algorithm::Fispo, (n - 1) as u32, PruneMode::NullBlocks).unwrap();
        let got = generic_rank(&stack_blocks(&blocks), &RankConfig::default())
            .unwrap()
            .rank;
        let want = kalman_rank(&a, &c);
        assert_eq!(got, want, "A = {a:?}, C = {c:?}");
        deficient += usize::from(want < n);
    }
    // Make sure the sample exercised both outcomes.
    assert!(deficient > 10 && deficient < 90, "{deficient} deficient systems");
}

#[test]
fn small_examples() {
    let cfg = RankConfig::default();
    assert_eq!(
        generic_rank(&matrix(&[&["1", "0"], &["0", "1"]]), &cfg).unwrap().rank,
        2
    );
    assert_eq!(
        generic_rank(&matrix(&[&["x", "x"], &["1", "1"]]), &cfg).unwrap().rank,
        1
    );
    assert_eq!(
        generic_rank(&matrix(&[&["x", "y"], &["y", "x"]]), &cfg).unwrap().rank,
        2
    );
    assert_eq!(generic_rank(&ExprMatrix::zeros(3, 2), &cfg).unwrap().rank, 0);
}

#[test]
fn symbolic_dependence_is_detected() {
    // Third row = x * first + second.
    let m = matrix(&[
        &["x", "y^2", "1"],
        &["1/y", "x", "exp(x)"],
        &["x^2 + 1/y", "x*y^2 + x", "x + exp(x)"],
    ]);
    for method in [RankMethod::FloatingSvd] {
        assert_eq!(generic_rank(&m, &with_method(method)).unwrap().rank, 2);
    }
    let m = matrix(&[
        &["x", "y^2", "1"],
        &["1/y", "x", "x*y"],
        &["x^2 + 1/y", "x*y^2 + x", "x + x*y"],
    ]);
    for method in [RankMethod::ExactModular, RankMethod::FloatingSvd] {
        assert_eq!(generic_rank(&m, &with_method(method)).unwrap().rank, 2, "{method:?}");
    }
}

#[test]
fn result_reports_trials() {
    let m = matrix(&[&["x", "y"], &["y", "x"]]);
    let r = generic_rank(&m, &RankConfig::default()).unwrap();
    assert_eq!(r.method, RankMethod::ExactModular);
    assert!(r.trials.len() >= 3);
    assert_eq!(r.rank, r.trials.iter().map(|t| t.rank).max().unwrap());
    let f = generic_rank(&matrix(&[&["exp(x)", "y"]]), &RankConfig::default()).unwrap();
    assert_eq!(f.method, RankMethod::FloatingSvd);
}

#[test]
fn rank_is_deterministic_for_a_seed() {
    let m = stack_blocks(&observability_blocks(&fixture("ts"), Algorithm::Fispo, 4, PruneMode::NullBlocks).unwrap());
    let cfg = RankConfig {
        seed: 42,
        ..RankConfig::default()
    };
    assert_eq!(generic_rank(&m, &cfg).unwrap(), generic_rank(&m, &cfg).unwrap());
}

/// Random polynomial in `x, y, z` with small integer coefficients.
fn polynomial(rng: &mut ChaCha8Rng) -> Expr {
    let vars = ["x", "y", "z"];
    let terms = rng.gen_range(1..=3);
    Expr::sum((0..terms).map(|_| {
        let mut t = Expr::int(rng.gen_range(-3..=3));
        for _ in 0..rng.gen_range(0..=2) {
            t = t * Expr::var(vars[rng.gen_range(0..3)]);
        }
        t
    }))
}

#[test]
fn exact_and_float_ranks_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..120 {
        let rows = rng.gen_range(1..=6);
        let cols = rng.gen_range(1..=6);
        let inner = rng.gen_range(1..=6);
        // Products of random factors give rank-deficient matrices often.
        let left: Vec<Vec<Expr>> = (0..rows)
            .map(|_| (0..inner).map(|_| polynomial(&mut rng)).collect())
            .collect();
        let right: Vec<Vec<Expr>> = (0..inner)
            .map(|_| (0..cols).map(|_| polynomial(&mut rng)).collect())
            .collect();
        let entries: Vec<Vec<Expr>> = left
            .iter()
            .map(|l| {
                (0..cols)
                    .map(|j| Expr::sum(l.iter().zip(&right).map(|(a, r)| a * &r[j])))
                    .collect()
            })
            .collect();
        let m = ExprMatrix::from_rows(cols, entries);
        let exact = generic_rank(&m, &with_method(RankMethod::ExactModular)).unwrap().rank;
        let float = generic_rank(&m, &with_method(RankMethod::FloatingSvd)).unwrap().rank;
        assert_eq!(exact, float, "{m}");
        assert!(exact <= rows.min(cols).min(inner));
    }
}

#[test]
fn column_of_b_is_decisive_for_c2m() {
    let blocks = observability_blocks(&fixture("c2m"), Algorithm::Orcdf, 3, PruneMode::NullBlocks).unwrap();
    let m = stack_blocks(&blocks);
    let cfg = RankConfig::default();
    let rank = generic_rank(&m, &cfg).unwrap().rank;
    assert_eq!(rank, 6);
    assert!(column_elimination_test(&m, rank, 5, &cfg).unwrap());
}

#[test]
fn column_of_q2_is_not_decisive_for_bolie() {
    let cfg = RankConfig::default();
    for (algorithm, k) in [(Algorithm::Orcdf, 4), (Algorithm::Fispo, 6)] {
        let m = stack_blocks(&observability_blocks(&fixture("bolie"), algorithm, k, PruneMode::NullBlocks).unwrap());
        let rank = generic_rank(&m, &cfg).unwrap().rank;
        assert_eq!(rank, 6);
        assert!(!column_elimination_test(&m, rank, 1, &cfg).unwrap(), "{algorithm}");
    }
}

#[test]
fn zero_column_is_never_decisive() {
    let m = matrix(&[&["x", "0", "1"], &["y", "0", "x"]]);
    let cfg = RankConfig::default();
    assert!(!column_elimination_test(&m, 2, 1, &cfg).unwrap());
    assert!(column_elimination_test(&matrix(&[&["1", "0"], &["0", "1"]]), 2, 0, &cfg).unwrap());
}
