//! Baseline statistics for uniformly random self-maps of a finite set: the
//! expected number of periodic points of a random map on `n` points is
//! asymptotically `sqrt(pi * n / 2)`, which calibrates how *non*-random the
//! structured maps elsewhere in this crate are.

use rayon::prelude::*;

use crate::dynamics::{self, BruteForceBudget};
use crate::error::Result;
use crate::rng::SplitMix64;

/// Periodic-count statistics over seeded random maps.  The mean and standard
/// deviation are derived from exact integer sums accumulated in sample-index
/// order, so results are identical for any worker-pool shape.
#[derive(Debug, Clone, PartialEq)]
pub struct RandMapStats {
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator); 0 for a single sample.
    pub std_dev: f64,
    /// The random-map asymptotic `sqrt(pi * n / 2)`.
    pub reference: f64,
    pub sum: u128,
    pub sum_of_squares: u128,
}

/// Number of periodic points of one uniformly sampled map of `[0, n)`,
/// drawn from the stream for `(seed, index)`.
pub fn periodic_count_of_sample(
    n: u64,
    seed: u64,
    index: u64,
    budget: &BruteForceBudget,
) -> Result<u64> {
    budget.admit(n)?;
    let mut rng = SplitMix64::stream(seed, index);
    let table: Vec<u64> = (0..n).map(|_| rng.next_below(n)).collect();
    let (_, summary) = dynamics::periodic_set(n, |x| table[x as usize], budget)?;
    Ok(summary.periodic_count)
}

/// Draw `samples` independent random maps of `[0, n)` and measure their
/// periodic counts.
pub fn sample_and_measure(
    n: u64,
    samples: u64,
    seed: u64,
    budget: &BruteForceBudget,
) -> Result<RandMapStats> {
    assert!(n >= 1 && samples >= 1);
    budget.admit(n)?;
    let counts: Vec<u64> = (0..samples)
        .into_par_iter()
        .map(|i| periodic_count_of_sample(n, seed, i, budget))
        .collect::<Result<_>>()?;
    let mut sum: u128 = 0;
    let mut sum_of_squares: u128 = 0;
    for &c in &counts {
        sum += c as u128;
        sum_of_squares += (c as u128) * (c as u128);
    }
    let mean = sum as f64 / samples as f64;
    let std_dev = if samples >= 2 {
        let numer = samples as f64 * sum_of_squares as f64 - (sum as f64) * (sum as f64);
        (numer / (samples as f64 * (samples as f64 - 1.0))).sqrt()
    } else {
        0.0
    };
    let reference = (std::f64::consts::PI * n as f64 / 2.0).sqrt();
    Ok(RandMapStats {
        n,
        samples,
        seed,
        mean,
        std_dev,
        reference,
        sum,
        sum_of_squares,
    })
}
