//! Pearson chi-squared goodness of fit of observed counts to a target
//! mixed strategy.
//!
//! Categories with zero target probability are left out of the statistic and
//! the degrees of freedom. Observing such a category is impossible under the
//! null, so the p-value is 0.

use crate::error::{Error, Result};
use crate::model::{CountVector, MixedStrategy};
use crate::special_fn::chi_squared_sf;

/// Expected counts below this trigger [`GofWarnings::small_expected`].
pub const SMALL_EXPECTED_COUNT: f64 = 5.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GofWarnings {
    /// Some included category has `n·p_j < 5`. The result is not adjusted.
    pub small_expected: bool,
    /// A category with `p_j = 0` was observed.
    pub zero_probability_violation: bool,
}

impl GofWarnings {
    pub fn any(&self) -> bool {
        self.small_expected || self.zero_probability_violation
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GofTestResult {
    pub statistic: f64,
    /// Positive-probability categories minus one; zero only for a point-mass target.
    pub df: u32,
    pub p_value: f64,
    /// `n·p_j` for every category of the alphabet.
    pub expected: Vec<f64>,
    pub warnings: GofWarnings,
    /// Point-mass target, so there is no distribution to compare against.
    pub degenerate: bool,
}

pub fn chi_squared_gof(target: &MixedStrategy, counts: &CountVector) -> Result<GofTestResult> {
    if target.alphabet() != counts.alphabet() {
        return Err(Error::AlphabetMismatch(format!(
            "target over {} but counts over {}",
            target.alphabet(),
            counts.alphabet()
        )));
    }
    let n = counts.total();
    if n == 0 {
        return Err(Error::NoObservations);
    }
    let nf = n as f64;
    let expected: Vec<f64> = target.probs().iter().map(|&p| nf * p).collect();

    let mut warnings = GofWarnings::default();
    let mut statistic = 0.0;
    let mut included = 0u32;
    for ((&p, &observed), &e) in target.probs().iter().zip(counts.counts()).zip(&expected) {
        if p > 0.0 {
            included += 1;
            let diff = observed as f64 - e;
            statistic += diff * diff / e;
            if e < SMALL_EXPECTED_COUNT {
                warnings.small_expected = true;
            }
        } else if observed > 0 {
            warnings.zero_probability_violation = true;
        }
    }

    let df = included.saturating_sub(1);
    let degenerate = df == 0;
    let p_value = if warnings.zero_probability_violation {
        0.0
    } else if degenerate {
        1.0
    } else {
        chi_squared_sf(statistic, df)?
    };

    Ok(GofTestResult {
        statistic,
        df,
        p_value,
        expected,
        warnings,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ActionAlphabet;
    use proptest::prelude::*;

    fn counts(c: &[u64]) -> CountVector {
        CountVector::new(ActionAlphabet::indexed(c.len()).unwrap(), c.to_vec()).unwrap()
    }

    fn target(p: &[f64]) -> MixedStrategy {
        MixedStrategy::new(ActionAlphabet::indexed(p.len()).unwrap(), p.to_vec()).unwrap()
    }

    fn uniform(k: usize) -> MixedStrategy {
        MixedStrategy::uniform(ActionAlphabet::indexed(k).unwrap())
    }

    #[test]
    fn frequency_example() {
        let res = chi_squared_gof(&uniform(3), &counts(&[25, 60, 15])).unwrap();
        assert!((res.statistic - 33.5).abs() < 1e-12);
        assert_eq!(res.df, 2);
        let want = (-16.75f64).exp();
        assert!(((res.p_value - want) / want).abs() < 1e-12);
        assert!((res.p_value - 5.31e-8).abs() < 1e-10);
        assert!(!res.warnings.any());
    }

    #[test]
    fn exact_fit() {
        let res = chi_squared_gof(&target(&[0.5, 0.25, 0.25]), &counts(&[20, 10, 10])).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert_eq!(res.p_value, 1.0);
    }

    #[test]
    fn zero_probability_violation() {
        let res = chi_squared_gof(&target(&[1.0, 0.0, 0.0]), &counts(&[5, 1, 0])).unwrap();
        assert_eq!(res.p_value, 0.0);
        assert!(res.warnings.zero_probability_violation);
        assert_eq!(res.df, 0);
    }

    #[test]
    fn point_mass_matched() {
        let res = chi_squared_gof(&target(&[0.0, 1.0, 0.0]), &counts(&[0, 7, 0])).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.p_value, 1.0);
        assert_eq!(res.statistic, 0.0);
    }

    #[test]
    fn zero_probability_reduces_df() {
        let res = chi_squared_gof(&target(&[0.5, 0.5, 0.0]), &counts(&[30, 10, 0])).unwrap();
        assert_eq!(res.df, 1);
        // T = (10² + 10²)/20 = 10
        assert!((res.statistic - 10.0).abs() < 1e-12);
        assert!((res.p_value - chi_squared_sf(10.0, 1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn small_expected_warning_does_not_change_result() {
        let res = chi_squared_gof(&uniform(3), &counts(&[4, 4, 1])).unwrap();
        assert!(res.warnings.small_expected);
        assert!((res.statistic - 2.0).abs() < 1e-12);
        assert!((res.p_value - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(
            chi_squared_gof(&uniform(3), &counts(&[0, 0, 0])),
            Err(Error::NoObservations)
        );
        assert_eq!(Error::NoObservations.to_string(), "no observations");
        let rps = MixedStrategy::uniform(ActionAlphabet::rps());
        assert!(matches!(
            chi_squared_gof(&rps, &counts(&[1, 2, 3])),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn permutation_invariance(c in prop::collection::vec(0u64..40, 3..6), w in prop::collection::vec(1u32..10, 6), rot in 0usize..6) {
            let k = c.len();
            prop_assume!(c.iter().sum::<u64>() > 0);
            let wsum: u32 = w[..k].iter().sum();
            let p: Vec<f64> = w[..k].iter().map(|&x| f64::from(x) / f64::from(wsum)).collect();
            let fix = 1.0 - p[..k - 1].iter().sum::<f64>();
            let mut p = p;
            p[k - 1] = fix;
            let rot = rot % k;
            let mut c2 = c.clone();
            let mut p2 = p.clone();
            c2.rotate_left(rot);
            p2.rotate_left(rot);
            let a = chi_squared_gof(&target(&p), &counts(&c)).unwrap();
            let b = chi_squared_gof(&target(&p2), &counts(&c2)).unwrap();
            prop_assert!((a.statistic - b.statistic).abs() <= 1e-9 * a.statistic.max(1.0));
            prop_assert_eq!(a.df, b.df);
            prop_assert!((a.p_value - b.p_value).abs() <= 1e-9);
            prop_assert!((0.0..=1.0).contains(&a.p_value));
            prop_assert!(a.statistic >= 0.0);
        }

        #[test]
        fn doubling_counts_doubles_statistic(c in prop::collection::vec(0u64..50, 2..6)) {
            prop_assume!(c.iter().sum::<u64>() > 0);
            let k = c.len();
            let doubled: Vec<u64> = c.iter().map(|&x| 2 * x).collect();
            let a = chi_squared_gof(&uniform(k), &counts(&c)).unwrap();
            let b = chi_squared_gof(&uniform(k), &counts(&doubled)).unwrap();
            prop_assert!((b.statistic - 2.0 * a.statistic).abs() <= 1e-9 * a.statistic.max(1.0));
            prop_assert!(b.p_value <= a.p_value + 1e-15);
        }

        #[test]
        fn zero_statistic_iff_exact_fit(c in prop::collection::vec(0u64..6, 3)) {
            prop_assume!(c.iter().sum::<u64>() > 0);
            let res = chi_squared_gof(&uniform(3), &counts(&c)).unwrap();
            let exact = c.iter().all(|&x| x == c[0]);
            prop_assert_eq!(res.statistic == 0.0, exact);
        }
    }
}
