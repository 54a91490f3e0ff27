//! Monte Carlo rejection rates of the strategy test under i.i.d. play from
//! the target itself.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{MixedStrategy, PlaySequence};
use crate::simulate::sample_action;
use crate::strategy_test::{strategy_test, Alpha, Decision};

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub n: usize,
    pub trials: u64,
    pub alpha: Alpha,
    pub runs_rejections: u64,
    pub chi2_rejections: u64,
    pub combined_rejections: u64,
}

impl CalibrationReport {
    pub fn runs_rate(&self) -> f64 {
        self.runs_rejections as f64 / self.trials as f64
    }

    pub fn chi2_rate(&self) -> f64 {
        self.chi2_rejections as f64 / self.trials as f64
    }

    pub fn combined_rate(&self) -> f64 {
        self.combined_rejections as f64 / self.trials as f64
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Draws `trials` sequences of length `n` i.i.d. from `target` and counts how
/// often each component and the combined test reject. Deterministic in `seed`.
pub fn run_calibration(
    target: &MixedStrategy,
    n: usize,
    trials: u64,
    alpha: Alpha,
    seed: u64,
) -> Result<CalibrationReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::SequenceTooShort(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CalibrationReport {
        n,
        trials,
        alpha,
        runs_rejections: 0,
        chi2_rejections: 0,
        combined_rejections: 0,
    };
    let mut items = vec![0usize; n];
    for _ in 0..trials {
        for item in items.iter_mut() {
            *item = sample_action(target, &mut rng);
        }
        let seq = PlaySequence::new(target.alphabet().clone(), items.clone())?;
        let rep = strategy_test(target, &seq, alpha)?;
        report.runs_rejections += u64::from(rep.rejected_by.runs);
        report.chi2_rejections += u64::from(rep.rejected_by.chi2);
        report.combined_rejections += u64::from(rep.decision == Decision::RejectH0);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ActionAlphabet;

    #[test]
    fn single_trial_rate_is_zero_or_one() {
        let t = MixedStrategy::uniform(ActionAlphabet::rps());
        let rep = run_calibration(&t, 50, 1, Alpha::new(0.05).unwrap(), 3).unwrap();
        assert!(rep.combined_rate() == 0.0 || rep.combined_rate() == 1.0);
    }

    #[test]
    fn tiny_alpha_rejects_nothing() {
        let t = MixedStrategy::uniform(ActionAlphabet::rps());
        let rep = run_calibration(&t, 50, 5_000, Alpha::new(1e-9).unwrap(), 3).unwrap();
        assert_eq!(rep.combined_rejections, 0);
    }

    #[test]
    fn deterministic() {
        let t = MixedStrategy::uniform(ActionAlphabet::rps());
        let a = run_calibration(&t, 30, 2_000, Alpha::new(0.1).unwrap(), 11).unwrap();
        let b = run_calibration(&t, 30, 2_000, Alpha::new(0.1).unwrap(), 11).unwrap();
        assert_eq!(a, b);
        assert!(a.combined_rejections >= a.runs_rejections.max(a.chi2_rejections));
        assert!(a.combined_rejections <= a.runs_rejections + a.chi2_rejections);
    }

    #[test]
    fn rejects_zero_trials() {
        let t = MixedStrategy::uniform(ActionAlphabet::rps());
        assert!(run_calibration(&t, 50, 0, Alpha::new(0.05).unwrap(), 0).is_err());
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 1000, 1.96);
        assert!(lo < 0.05 && hi > 0.05);
        assert_eq!(wilson_interval(0, 10, 1.96).0, 0.0);
    }
}
