use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Method, Problem, Verdict};
use crate::error::{Error, Result};
use crate::vectorspace::{SignVector, UnitVectorFamily};

/// Draws `trials` non-trivial sign vectors uniformly (seeded) and returns the
/// first witness, canonicalized. Without a witness the answer is
/// `Inconclusive(trials, trials)`: sampling never proves non-balancing.
pub fn sample_random(family: &UnitVectorFamily, trials: u64, seed: u64) -> Result<Verdict> {
    if trials == 0 {
        return Err(Error::contract("sampling needs at least one trial"));
    }
    let problem = Problem::new(family)?;
    let m = problem.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0i64; problem.active];
    let mut coeffs = vec![0i8; m];
    for trial in 1..=trials {
        loop {
            for c in coeffs.iter_mut() {
                *c = rng.random_range(-1i8..=1);
            }
            if coeffs.iter().any(|&c| c != 0) {
                break;
            }
        }
        let mut norm = 0i128;
        for (row, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                norm += problem.apply(&mut sum, row, c as i64);
            }
        }
        if norm < problem.radius_sq {
            return Ok(Verdict::Balancing {
                witness: SignVector::new(coeffs).expect("signs").canonical(),
                norm_sq_scaled: norm,
                method: Method::Sample,
                explored: trial,
            });
        }
        for (row, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                problem.apply(&mut sum, row, -(c as i64));
            }
        }
    }
    Ok(Verdict::Inconclusive {
        explored: trials,
        budget: trials,
        method: Method::Sample,
    })
}
