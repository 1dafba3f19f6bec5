//! Deterministic pseudo-random evaluation points. The value of a symbol
//! depends only on the seed and the symbol's name, so the same point is
//! reproduced whatever order symbols are visited in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

use crate::sym::Symbol;

fn rng_for(seed: u64, s: &Symbol) -> ChaCha8Rng {
    // FNV-1a over the name, folded into the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.name().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed.rotate_left(17) ^ h)
}

/// Residue in `[2, p - 2]`.
pub fn residue(seed: u64, s: &Symbol, p: u64) -> u64 {
    rng_for(seed, s).gen_range(2..=p - 2)
}

/// Float in `[1, 2)`.
pub fn real(seed: u64, s: &Symbol) -> TwoFloat {
    TwoFloat::from(rng_for(seed, s).gen_range(1.0..2.0))
}

/// Randomized identity test: `a` and `b` agree at several generic points.
/// Exact in a prime field when both are rational, double-double otherwise.
/// Points where either side cannot be evaluated are skipped; with no usable
/// point the answer is `false`.
pub fn probably_equal(a: &crate::sym::Expr, b: &crate::sym::Expr) -> bool {
    use crate::sym::{DoubleDouble, Evaluator, ModP};
    if a == b {
        return true;
    }
    const SEEDS: [u64; 3] = [0x5eed_0001, 0x5eed_0002, 0x5eed_0003];
    let mut usable = 0;
    for seed in SEEDS {
        let agree = if a.is_rational() && b.is_rational() {
            let p = ModP::MERSENNE61;
            let mut ev = Evaluator::new(ModP::new(p), |s: &Symbol| Some(residue(seed, s, p)));
            match (ev.eval(a), ev.eval(b)) {
                (Ok(x), Ok(y)) => x == y,
                _ => continue,
            }
        } else {
            let mut ev = Evaluator::new(DoubleDouble, |s: &Symbol| Some(real(seed, s)));
            match (ev.eval(a), ev.eval(b)) {
                (Ok(x), Ok(y)) => {
                    let scale = 1.0 + x.hi().abs().max(y.hi().abs());
                    (x - y).hi().abs() <= 1e-20 * scale
                }
                _ => continue,
            }
        };
        if !agree {
            return false;
        }
        usable += 1;
    }
    usable > 0
}
