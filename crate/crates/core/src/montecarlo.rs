//! Seeded Monte Carlo plumbing shared by the samplers.
//!
//! A run is split into contiguous chunks, one per worker; worker `w` draws
//! from ChaCha stream `w` of the run seed. A given `(seed, workers)` pair is
//! therefore bit-reproducible, and `workers = 1` is the canonical
//! single-stream run.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Result};

pub type TrialRng = ChaCha8Rng;

/// Generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform angle on `[0, 2π)`.
pub fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(0.0..TAU)
}

/// Three-sigma half-width of a binomial proportion.
pub fn three_sigma(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

/// A sampled proportion with its 3σ half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub ci: f64,
    pub n: u64,
}

impl Estimate {
    pub fn from_counts(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            estimate: p,
            ci: three_sigma(p, n),
            n,
        }
    }
}

/// Sizes of the per-worker chunks; earlier workers absorb the remainder.
pub(crate) fn chunk_sizes(n: u64, workers: usize) -> Vec<u64> {
    let w = workers as u64;
    (0..w).map(|i| n / w + u64::from(i < n % w)).collect()
}

/// Runs `n` independent Bernoulli trials and counts the successes.
pub fn count_hits<F>(n: u64, seed: u64, workers: usize, trial: F) -> Result<u64>
where
    F: Fn(&mut TrialRng) -> bool + Sync,
{
    if n == 0 {
        return Err(domain("trial count must be at least 1"));
    }
    if workers == 0 {
        return Err(domain("worker count must be at least 1"));
    }
    let run_chunk = |stream: u64, len: u64| {
        let mut rng = substream(seed, stream);
        (0..len).filter(|_| trial(&mut rng)).count() as u64
    };
    if workers == 1 {
        return Ok(run_chunk(0, n));
    }
    let sizes = chunk_sizes(n, workers);
    let total = std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .enumerate()
            .map(|(w, &len)| {
                let run_chunk = &run_chunk;
                scope.spawn(move || run_chunk(w as u64, len))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .sum()
    });
    Ok(total)
}

/// Fraction of successful trials with its 3σ half-width.
pub fn estimate_fraction<F>(n: u64, seed: u64, workers: usize, trial: F) -> Result<Estimate>
where
    F: Fn(&mut TrialRng) -> bool + Sync,
{
    let hits = count_hits(n, seed, workers, trial)?;
    Ok(Estimate::from_counts(hits, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_all_trials() {
        assert_eq!(chunk_sizes(10, 3), vec![4, 3, 3]);
        assert_eq!(chunk_sizes(2, 4), vec![1, 1, 0, 0]);
        assert_eq!(chunk_sizes(9, 1).iter().sum::<u64>(), 9);
    }

    #[test]
    fn zero_trials_or_workers_rejected() {
        assert!(count_hits(0, 1, 1, |_| true).is_err());
        assert!(count_hits(5, 1, 0, |_| true).is_err());
    }

    #[test]
    fn fixed_seed_and_workers_are_reproducible() {
        let trial = |rng: &mut TrialRng| rng.gen::<f64>() < 0.3;
        for workers in [1, 3] {
            let a = estimate_fraction(10_000, 7, workers, trial).unwrap();
            let b = estimate_fraction(10_000, 7, workers, trial).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn worker_counts_agree_statistically() {
        let trial = |rng: &mut TrialRng| rng.gen::<f64>() < 0.3;
        let one = estimate_fraction(200_000, 11, 1, trial).unwrap();
        let four = estimate_fraction(200_000, 11, 4, trial).unwrap();
        assert!((one.estimate - four.estimate).abs() < one.ci + four.ci);
    }

    #[test]
    fn uniform_angle_stays_in_range() {
        let mut rng = substream(3, 0);
        for _ in 0..10_000 {
            let g = uniform_angle(&mut rng);
            assert!((0.0..TAU).contains(&g));
        }
    }
}
