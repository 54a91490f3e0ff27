//! Brute-force reference computations used to validate the analytic tests.
//! Nothing in the production path calls into this module.
//!
//! Enumeration bounds are hard errors; there is no silent fallback to sampling.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chisq_gof::chi_squared_gof;
use crate::error::{Error, Result};
use crate::model::{CountVector, MixedStrategy};

pub const MAX_RUN_ENUMERATION_N: u64 = 12;
pub const MAX_MULTINOMIAL_K: usize = 4;
pub const MAX_MULTINOMIAL_N: u64 = 20;

/// Exact distribution of the number of runs when every distinct arrangement
/// of a multiset is equally likely.
#[derive(Debug, Clone, PartialEq)]
pub struct RunCountDistribution {
    pub counts: CountVector,
    /// Number of distinct arrangements with each run count.
    pub tallies: BTreeMap<u64, u128>,
    pub arrangements: u128,
}

impl RunCountDistribution {
    pub fn pmf(&self) -> BTreeMap<u64, f64> {
        let total = self.arrangements as f64;
        self.tallies
            .iter()
            .map(|(&r, &c)| (r, c as f64 / total))
            .collect()
    }

    fn power_sums(&self) -> (i128, i128, i128) {
        let mut s1 = 0i128;
        let mut s2 = 0i128;
        for (&r, &c) in &self.tallies {
            let r = i128::from(r);
            let c = c as i128;
            s1 += c * r;
            s2 += c * r * r;
        }
        (self.arrangements as i128, s1, s2)
    }

    /// Mean as an exact fraction `(numerator, denominator)`.
    pub fn mean_ratio(&self) -> (i128, i128) {
        let (total, s1, _) = self.power_sums();
        (s1, total)
    }

    /// Variance as an exact fraction `(numerator, denominator)`.
    pub fn variance_ratio(&self) -> (i128, i128) {
        let (total, s1, s2) = self.power_sums();
        (s2 * total - s1 * s1, total * total)
    }

    pub fn mean(&self) -> f64 {
        let (num, den) = self.mean_ratio();
        num as f64 / den as f64
    }

    pub fn variance(&self) -> f64 {
        let (num, den) = self.variance_ratio();
        num as f64 / den as f64
    }
}

pub fn exact_run_distribution(counts: &CountVector) -> Result<RunCountDistribution> {
    let n = counts.total();
    if n > MAX_RUN_ENUMERATION_N {
        return Err(Error::EnumerationBound(format!(
            "n = {n} exceeds {MAX_RUN_ENUMERATION_N}"
        )));
    }
    if n == 0 {
        return Err(Error::NoObservations);
    }
    let mut remaining = counts.counts().to_vec();
    let mut tallies = BTreeMap::new();
    let mut arrangements = 0u128;
    enumerate_arrangements(&mut remaining, None, 0, n, &mut tallies, &mut arrangements);
    Ok(RunCountDistribution {
        counts: counts.clone(),
        tallies,
        arrangements,
    })
}

// Depth-first walk over every distinct arrangement of the multiset.
fn enumerate_arrangements(
    remaining: &mut [u64],
    last: Option<usize>,
    runs: u64,
    left: u64,
    tallies: &mut BTreeMap<u64, u128>,
    arrangements: &mut u128,
) {
    if left == 0 {
        *tallies.entry(runs).or_insert(0) += 1;
        *arrangements += 1;
        return;
    }
    for j in 0..remaining.len() {
        if remaining[j] == 0 {
            continue;
        }
        remaining[j] -= 1;
        let runs = if last == Some(j) { runs } else { runs + 1 };
        enumerate_arrangements(remaining, Some(j), runs, left - 1, tallies, arrangements);
        remaining[j] += 1;
    }
}

/// Empirical run-count distribution from `samples` uniform shuffles.
pub fn sampled_run_distribution(
    counts: &CountVector,
    samples: usize,
    seed: u64,
) -> BTreeMap<u64, f64> {
    let mut items: Vec<usize> = counts
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat_n(j, c as usize))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tallies: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..samples {
        items.shuffle(&mut rng);
        let r = 1 + items.windows(2).filter(|w| w[0] != w[1]).count() as u64;
        *tallies.entry(r).or_insert(0) += 1;
    }
    tallies
        .into_iter()
        .map(|(r, c)| (r, c as f64 / samples as f64))
        .collect()
}

pub fn total_variation(a: &BTreeMap<u64, f64>, b: &BTreeMap<u64, f64>) -> f64 {
    let keys: std::collections::BTreeSet<u64> = a.keys().chain(b.keys()).copied().collect();
    0.5 * keys
        .iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

/// Exact probability, under i.i.d. sampling from `target`, that the
/// chi-squared goodness-of-fit test rejects at level `alpha` (`p ≤ alpha`).
pub fn exact_multinomial_rejection_rate(target: &MixedStrategy, n: u64, alpha: f64) -> Result<f64> {
    let k = target.len();
    if k > MAX_MULTINOMIAL_K {
        return Err(Error::EnumerationBound(format!(
            "k = {k} exceeds {MAX_MULTINOMIAL_K}"
        )));
    }
    if n > MAX_MULTINOMIAL_N {
        return Err(Error::EnumerationBound(format!(
            "n = {n} exceeds {MAX_MULTINOMIAL_N}"
        )));
    }
    if n == 0 {
        return Err(Error::NoObservations);
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let factorials: Vec<u128> = (0..=n)
        .scan(1u128, |acc, i| {
            if i > 0 {
                *acc *= u128::from(i);
            }
            Some(*acc)
        })
        .collect();

    let mut rate = 0.0;
    let mut counts = vec![0u64; k];
    let mut result = Ok(());
    for_each_composition(n, &mut counts, 0, &mut |c| {
        if result.is_err() {
            return;
        }
        let coeff = c.iter().fold(factorials[n as usize], |acc, &x| {
            acc / factorials[x as usize]
        });
        let prob = c
            .iter()
            .zip(target.probs())
            .fold(coeff as f64, |acc, (&x, &p)| acc * p.powi(x as i32));
        if prob == 0.0 {
            return;
        }
        let cv = match CountVector::new(target.alphabet().clone(), c.to_vec()) {
            Ok(cv) => cv,
            Err(e) => {
                result = Err(e);
                return;
            }
        };
        match chi_squared_gof(target, &cv) {
            Ok(res) if res.p_value <= alpha => rate += prob,
            Ok(_) => {}
            Err(e) => result = Err(e),
        }
    });
    result.map(|()| rate)
}

fn for_each_composition(left: u64, counts: &mut [u64], idx: usize, f: &mut impl FnMut(&[u64])) {
    if idx == counts.len() - 1 {
        counts[idx] = left;
        f(counts);
        return;
    }
    for x in 0..=left {
        counts[idx] = x;
        for_each_composition(left - x, counts, idx + 1, f);
    }
}
