//! Shared fixtures: seeded measure corpora and small exact oracles.
#![allow(dead_code)]

use momentkit::scalar::{self, Rational};
use momentkit::DiscreteMeasure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0x5EED_0C0F_FEE0;

fn rational_in(rng: &mut ChaCha8Rng, lo: i64, hi: i64, max_den: i64) -> Rational {
    let den = rng.gen_range(1..=max_den);
    let num = rng.gen_range(lo * den..=hi * den);
    scalar::ratio(num, den)
}

/// A measure with `atoms` distinct rational atoms in `[lo, hi]` and weights in `[1/4, 4]`.
pub fn random_measure(rng: &mut ChaCha8Rng, atoms: usize, lo: i64, hi: i64) -> DiscreteMeasure {
    let mut positions: Vec<Rational> = Vec::with_capacity(atoms);
    while positions.len() < atoms {
        let x = rational_in(rng, lo, hi, 4);
        if !positions.contains(&x) {
            positions.push(x);
        }
    }
    let pairs = positions.into_iter().map(|x| {
        let w = scalar::ratio(rng.gen_range(1..=4), rng.gen_range(1..=4));
        (x, w)
    });
    DiscreteMeasure::new(pairs).expect("positive weights")
}

/// The fixed 200-case corpus: up to four rational atoms in `[-4, 4]`.
/// Even-numbered cases have strictly positive atoms only.
pub fn corpus() -> Vec<DiscreteMeasure> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..200)
        .map(|i| {
            let atoms = rng.gen_range(1..=4);
            if i % 2 == 0 {
                loop {
                    let mu = random_measure(&mut rng, atoms, 0, 4);
                    if mu
                        .atoms()
                        .iter()
                        .all(|a| a.position > Rational::from_integer(0.into()))
                    {
                        break mu;
                    }
                }
            } else {
                random_measure(&mut rng, atoms, -4, 4)
            }
        })
        .collect()
}

/// Cofactor-expansion determinant, an independent oracle for small matrices.
pub fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::from_integer(1.into());
    }
    let mut total = Rational::from_integer(0.into());
    for j in 0..n {
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * cofactor_det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

pub fn hankel_block(terms: &[Rational], m: usize, shift: usize) -> Vec<Vec<Rational>> {
    (0..=m)
        .map(|i| (0..=m).map(|j| terms[i + j + shift].clone()).collect())
        .collect()
}

/// Proptest strategy: 1..=`max_atoms` distinct atoms `num/den` in `[lo, hi]`, weights in `[1/4, 4]`.
pub fn measure_strategy(
    max_atoms: usize,
    lo: i64,
    hi: i64,
) -> impl proptest::strategy::Strategy<Value = DiscreteMeasure> {
    use proptest::prelude::*;
    proptest::collection::vec((lo * 4..=hi * 4, 1i64..=4, 1i64..=4), 1..=max_atoms).prop_map(
        |raw| {
            let mut pairs: Vec<(Rational, Rational)> = Vec::new();
            for (num, wp, wq) in raw {
                let x = scalar::ratio(num, 4);
                if !pairs.iter().any(|(y, _)| *y == x) {
                    pairs.push((x, scalar::ratio(wp, wq)));
                }
            }
            DiscreteMeasure::new(pairs).expect("positive weights")
        },
    )
}
