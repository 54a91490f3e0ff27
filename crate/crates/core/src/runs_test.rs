//! Generalized (k-category) Wald–Wolfowitz runs test.
//!
//! Under the null every arrangement of the observed multiset is equally
//! likely. The run count `r` is compared with its permutation mean and
//! variance through a normal approximation:
//!
//! ```text
//! q = Σ n_j²      c = Σ n_j³
//! μ = (n(n+1) − q) / n
//! σ² = (q[q + n(n+1)] − 2nc − n³) / (n²(n−1))
//! z = (r − μ) / σ,   p = 2Φ(−|z|)
//! ```

use crate::error::{Error, Result};
use crate::model::{count_categories, count_runs, PlaySequence};
use crate::special_fn::std_normal_cdf;

#[derive(Debug, Clone, PartialEq)]
pub struct RunsTestResult {
    pub n: u64,
    /// Observed number of runs.
    pub r: u64,
    /// Σ n_j².
    pub q: u128,
    /// Σ n_j³.
    pub c: u128,
    pub mu: f64,
    pub sigma: f64,
    /// Zero when `degenerate`.
    pub z: f64,
    pub p_value: f64,
    /// The variance vanishes (e.g. a single observed category); `p_value` is 1.
    pub degenerate: bool,
}

impl RunsTestResult {
    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Exact numerators of the run-count mean and variance as integers:
/// `(n·μ, n²(n−1)·σ²)`.
pub(crate) fn moment_numerators(counts: &[u64]) -> (i128, i128) {
    let n: i128 = counts.iter().map(|&c| i128::from(c)).sum();
    let q: i128 = counts.iter().map(|&c| i128::from(c).pow(2)).sum();
    let c: i128 = counts.iter().map(|&c| i128::from(c).pow(3)).sum();
    let mean_num = n * (n + 1) - q;
    let var_num = q * (q + n * (n + 1)) - 2 * n * c - n.pow(3);
    (mean_num, var_num)
}

pub fn generalized_runs_test(seq: &PlaySequence) -> Result<RunsTestResult> {
    let n = seq.len();
    if n < 2 {
        return Err(Error::SequenceTooShort(n));
    }
    let counts = count_categories(seq);
    let r = count_runs(seq)? as u64;
    let q: u128 = counts.counts().iter().map(|&c| u128::from(c).pow(2)).sum();
    let c: u128 = counts.counts().iter().map(|&c| u128::from(c).pow(3)).sum();

    let (mean_num, var_num) = moment_numerators(counts.counts());
    let nf = n as f64;
    let mu = mean_num as f64 / nf;
    let degenerate = var_num <= 0;
    let (sigma, z, p_value) = if degenerate {
        (0.0, 0.0, 1.0)
    } else {
        let sigma = (var_num as f64 / (nf * nf * (nf - 1.0))).sqrt();
        let z = (r as f64 - mu) / sigma;
        let p = (2.0 * std_normal_cdf(-z.abs())?).min(1.0);
        (sigma, z, p)
    };

    Ok(RunsTestResult {
        n: n as u64,
        r,
        q,
        c,
        mu,
        sigma,
        z,
        p_value,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ActionAlphabet;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rps(s: &str) -> PlaySequence {
        PlaySequence::from_symbols(ActionAlphabet::rps(), s).unwrap()
    }

    fn cycle(n: usize) -> PlaySequence {
        PlaySequence::new(ActionAlphabet::rps(), (0..n).map(|i| i % 3).collect()).unwrap()
    }

    #[test]
    fn worked_example() {
        let res = generalized_runs_test(&rps("RRPPPSPRR")).unwrap();
        assert_eq!(res.r, 5);
        assert_eq!(res.q, 33);
        assert_eq!(res.c, 129);
        assert!((res.mu - 57.0 / 9.0).abs() < 1e-12);
        assert!((res.variance() - 1008.0 / 648.0).abs() < 1e-12);
        // High-precision evaluation of the same formulas.
        assert!((res.z - -1.069_044_967_649_697_5).abs() < 1e-12);
        assert!((res.p_value - 0.285_049_407_402_612_74).abs() < 1e-12);
        assert!(!res.degenerate);
    }

    #[test]
    fn constant_sequence_is_degenerate() {
        let res = generalized_runs_test(&rps("RRRR")).unwrap();
        assert_eq!(res.r, 1);
        assert_eq!(res.mu, 1.0);
        assert_eq!(res.sigma, 0.0);
        assert!(res.degenerate);
        assert_eq!(res.p_value, 1.0);
    }

    #[test]
    fn two_distinct_items_is_degenerate() {
        let res = generalized_runs_test(&rps("RP")).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.p_value, 1.0);
    }

    #[test]
    fn cycle_of_fifty() {
        let res = generalized_runs_test(&cycle(50)).unwrap();
        assert_eq!(res.r, 50);
        assert_eq!(res.q, 834);
        assert_eq!(res.c, 13_922);
        assert!((res.mu - 34.32).abs() < 1e-12);
        assert!((res.variance() - 1_305_056.0 / 122_500.0).abs() < 1e-12);
        assert!((res.z - 4.803_961_617_827_485).abs() < 1e-10);
        assert!((res.p_value - 1.555_566_613_423_223_5e-6).abs() < 1e-15);
    }

    #[test]
    fn too_short() {
        assert_eq!(
            generalized_runs_test(&rps("R")),
            Err(Error::SequenceTooShort(1))
        );
        assert!(Error::SequenceTooShort(1)
            .to_string()
            .starts_with("sequence too short for runs test"));
    }

    #[test]
    fn monte_carlo_moments_for_cycle_counts() {
        // Shuffle the (17,17,16) multiset and compare the empirical run-count
        // moments with μ and σ².
        let base: Vec<usize> = (0..50).map(|i| i % 3).collect();
        let expected = generalized_runs_test(&cycle(50)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let trials = 200_000usize;
        let mut items = base.clone();
        let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
        for _ in 0..trials {
            items.shuffle(&mut rng);
            let r = 1 + items.windows(2).filter(|w| w[0] != w[1]).count();
            let r = r as f64;
            sum += r;
            sum_sq += r * r;
        }
        let m = sum / trials as f64;
        let v = sum_sq / trials as f64 - m * m;
        let var = expected.variance();
        let se_mean = (var / trials as f64).sqrt();
        // Variance of the sample variance ≈ (μ4 − σ⁴)/N; use 2σ⁴/N as a normal proxy.
        let se_var = (2.0 * var * var / trials as f64).sqrt();
        assert!(
            (m - expected.mu).abs() < 3.0 * se_mean,
            "mean {m} vs {}",
            expected.mu
        );
        assert!((v - var).abs() < 3.0 * se_var, "var {v} vs {var}");
    }

    fn arb_seq() -> impl Strategy<Value = (usize, Vec<usize>)> {
        (1usize..6).prop_flat_map(|k| (Just(k), prop::collection::vec(0..k, 2..120)))
    }

    proptest! {
        #[test]
        fn label_and_reversal_invariance((k, items) in arb_seq(), shift in 1usize..6) {
            let alphabet = ActionAlphabet::indexed(k).unwrap();
            let relabeled: Vec<usize> = items.iter().map(|&i| (i + shift) % k).collect();
            let mut reversed = items.clone();
            reversed.reverse();
            let base = generalized_runs_test(&PlaySequence::new(alphabet.clone(), items).unwrap()).unwrap();
            let a = generalized_runs_test(&PlaySequence::new(alphabet.clone(), relabeled).unwrap()).unwrap();
            let b = generalized_runs_test(&PlaySequence::new(alphabet, reversed).unwrap()).unwrap();
            prop_assert_eq!(&base, &a);
            prop_assert_eq!(&base, &b);
        }

        #[test]
        fn p_value_in_unit_interval((k, items) in arb_seq()) {
            let seq = PlaySequence::new(ActionAlphabet::indexed(k).unwrap(), items).unwrap();
            let res = generalized_runs_test(&seq).unwrap();
            prop_assert!((0.0..=1.0).contains(&res.p_value));
            prop_assert!(res.r >= 1 && res.r <= res.n);
            if !res.degenerate {
                let want = 2.0 * std_normal_cdf(-res.z.abs()).unwrap();
                prop_assert!((res.p_value - want.min(1.0)).abs() < 1e-15);
            }
        }
    }
}
