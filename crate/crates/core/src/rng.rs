//! Seeded RNG streams.
//!
//! Every stochastic operation takes an explicit `u64` seed. Parallel sweeps
//! derive one independent stream per task from a master seed via the ChaCha
//! stream counter, so results do not depend on worker count or scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The RNG used throughout the crate.
pub type SimRng = ChaCha12Rng;

/// Root stream for a seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Independent stream `task` under a master seed.
///
/// Streams with different `task` values never overlap, so a sweep over
/// `task = 0..n` is reproducible regardless of evaluation order.
pub fn task_rng(master_seed: u64, task: u64) -> SimRng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(task);
    rng
}

/// Exp(rate) waiting time; `rate` must be positive and finite.
#[inline]
pub fn sample_exp<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    standard_exp(rng) / rate
}

/// Exp(1) variate from the open interval trick `-ln(1-U)`, avoiding `ln(0)`.
#[inline]
pub fn standard_exp<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen(); // in [0,1)
    -(-u).ln_1p()
}

/// Fair spin.
#[inline]
pub fn random_spin<R: Rng>(rng: &mut R) -> i8 {
    if rng.gen::<bool>() {
        1
    } else {
        -1
    }
}

/// Uniform configuration in `{-1,+1}^n`.
pub fn random_spins<R: Rng>(rng: &mut R, n: usize) -> Vec<i8> {
    (0..n).map(|_| random_spin(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: Vec<u64> = {
            let mut r = task_rng(7, 3);
            (0..4).map(|_| r.gen()).collect()
        };
        let b: Vec<u64> = {
            let mut r = task_rng(7, 3);
            (0..4).map(|_| r.gen()).collect()
        };
        let c: Vec<u64> = {
            let mut r = task_rng(7, 4);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn exp_mean_is_inverse_rate() {
        let mut rng = rng_from_seed(1);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| sample_exp(&mut rng, 2.0)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }
}
