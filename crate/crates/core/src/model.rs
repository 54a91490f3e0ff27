//! Domain types shared by every test: the action alphabet, observed play
//! sequences, mixed strategies and per-category counts.
//!
//! Categories are dense indices `0..k` with an attached label table. All
//! statistics only look at indices, so the labels are purely cosmetic.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance on `Σ p = 1` for a [`MixedStrategy`].
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

/// The pure strategies available to one player, with display labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionAlphabet {
    labels: Arc<[String]>,
}

impl ActionAlphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self {
            labels: labels.into(),
        })
    }

    /// Alphabet of size `k` labelled `a0 … a(k-1)`.
    pub fn indexed(k: usize) -> Result<Self> {
        Self::new((0..k).map(|i| format!("a{i}")))
    }

    /// Rock, paper, scissors in that order.
    pub fn rps() -> Self {
        Self::new(["R", "P", "S"]).expect("static labels are valid")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false; an alphabet holds at least one action.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::ActionOutOfRange {
                index,
                k: self.len(),
            })
        }
    }
}

impl fmt::Display for ActionAlphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(","))
    }
}

/// Ordered observations of one player's pure strategies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaySequence {
    alphabet: ActionAlphabet,
    items: Vec<usize>,
}

impl PlaySequence {
    pub fn new(alphabet: ActionAlphabet, items: Vec<usize>) -> Result<Self> {
        for &item in &items {
            alphabet.check_index(item)?;
        }
        Ok(Self { alphabet, items })
    }

    /// Parses a string where every character is a one-character label,
    /// e.g. `"RRPPPSPRR"` over [`ActionAlphabet::rps`]. Whitespace is skipped.
    pub fn from_symbols(alphabet: ActionAlphabet, symbols: &str) -> Result<Self> {
        let mut items = Vec::with_capacity(symbols.len());
        let mut buf = [0u8; 4];
        for ch in symbols.chars().filter(|c| !c.is_whitespace()) {
            let label = ch.encode_utf8(&mut buf);
            let index = alphabet
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            items.push(index);
        }
        Ok(Self { alphabet, items })
    }

    pub fn alphabet(&self) -> &ActionAlphabet {
        &self.alphabet
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn counts(&self) -> CountVector {
        count_categories(self)
    }

    pub fn runs(&self) -> Result<usize> {
        count_runs(self)
    }

    /// Comma-separated index form, the inverse of
    /// [`parse_sequence_file`](crate::ingest::parse_sequence_file).
    pub fn to_csv_line(&self) -> String {
        let parts: Vec<String> = self.items.iter().map(ToString::to_string).collect();
        parts.join(",")
    }
}

/// A probability vector over an alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    alphabet: ActionAlphabet,
    probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(alphabet: ActionAlphabet, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.len() {
            return Err(Error::DimensionMismatch {
                expected: alphabet.len(),
                got: probs.len(),
            });
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(Error::ProbabilitySum(sum));
        }
        Ok(Self { alphabet, probs })
    }

    pub fn uniform(alphabet: ActionAlphabet) -> Self {
        let k = alphabet.len();
        Self {
            probs: vec![1.0 / k as f64; k],
            alphabet,
        }
    }

    /// Point mass on `index`.
    pub fn pure(alphabet: ActionAlphabet, index: usize) -> Result<Self> {
        alphabet.check_index(index)?;
        let mut probs = vec![0.0; alphabet.len()];
        probs[index] = 1.0;
        Ok(Self { alphabet, probs })
    }

    pub fn alphabet(&self) -> &ActionAlphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Number of actions with positive probability.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Index of the single action with probability one, if any.
    pub fn as_pure(&self) -> Option<usize> {
        self.probs.iter().position(|&p| p == 1.0)
    }
}

/// Per-category observation counts with their total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    alphabet: ActionAlphabet,
    counts: Vec<u64>,
    n: u64,
}

impl CountVector {
    pub fn new(alphabet: ActionAlphabet, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != alphabet.len() {
            return Err(Error::DimensionMismatch {
                expected: alphabet.len(),
                got: counts.len(),
            });
        }
        let n = counts.iter().sum();
        Ok(Self {
            alphabet,
            counts,
            n,
        })
    }

    pub fn alphabet(&self) -> &ActionAlphabet {
        &self.alphabet
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.n
    }

    /// Number of categories observed at least once.
    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

pub fn count_categories(seq: &PlaySequence) -> CountVector {
    let mut counts = vec![0u64; seq.alphabet.len()];
    for &item in &seq.items {
        counts[item] += 1;
    }
    CountVector {
        alphabet: seq.alphabet.clone(),
        n: seq.items.len() as u64,
        counts,
    }
}

/// Number of maximal blocks of identical consecutive items.
pub fn count_runs(seq: &PlaySequence) -> Result<usize> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let changes = seq.items.windows(2).filter(|w| w[0] != w[1]).count();
    Ok(changes + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rps(s: &str) -> PlaySequence {
        PlaySequence::from_symbols(ActionAlphabet::rps(), s).unwrap()
    }

    fn cycle(n: usize) -> PlaySequence {
        PlaySequence::new(ActionAlphabet::rps(), (0..n).map(|i| i % 3).collect()).unwrap()
    }

    #[test]
    fn counts_worked_example() {
        let c = count_categories(&rps("RRPPPSPRR"));
        assert_eq!(c.counts(), &[4, 4, 1]);
        assert_eq!(c.total(), 9);
    }

    #[test]
    fn counts_empty() {
        let seq = PlaySequence::new(ActionAlphabet::rps(), vec![]).unwrap();
        let c = count_categories(&seq);
        assert_eq!(c.counts(), &[0, 0, 0]);
        assert_eq!(c.total(), 0);
    }

    #[test]
    fn counts_cycle() {
        assert_eq!(cycle(50).counts().counts(), &[17, 17, 16]);
    }

    #[test]
    fn runs_examples() {
        assert_eq!(count_runs(&rps("RRPPPSPRR")).unwrap(), 5);
        assert_eq!(count_runs(&rps("RRRR")).unwrap(), 1);
        assert_eq!(count_runs(&cycle(50)).unwrap(), 50);
    }

    #[test]
    fn runs_of_empty_is_error() {
        let seq = PlaySequence::new(ActionAlphabet::rps(), vec![]).unwrap();
        assert_eq!(count_runs(&seq), Err(Error::EmptySequence));
        assert_eq!(
            Error::EmptySequence.to_string(),
            "empty sequence has no runs"
        );
    }

    #[test]
    fn alphabet_validation() {
        assert_eq!(ActionAlphabet::indexed(0), Err(Error::EmptyAlphabet));
        assert!(matches!(
            ActionAlphabet::new(["x", "x"]),
            Err(Error::DuplicateLabel(_))
        ));
        assert_eq!(
            ActionAlphabet::indexed(3).unwrap().labels(),
            &["a0", "a1", "a2"]
        );
        assert!(matches!(
            PlaySequence::new(ActionAlphabet::rps(), vec![0, 3]),
            Err(Error::ActionOutOfRange { index: 3, k: 3 })
        ));
    }

    #[test]
    fn strategy_validation() {
        let a = ActionAlphabet::rps();
        assert!(matches!(
            MixedStrategy::new(a.clone(), vec![0.3, 0.3, 0.3]),
            Err(Error::ProbabilitySum(_))
        ));
        assert!(matches!(
            MixedStrategy::new(a.clone(), vec![1.5, -0.5, 0.0]),
            Err(Error::InvalidProbability { .. })
        ));
        assert!(MixedStrategy::new(a.clone(), vec![0.25, 0.6, 0.15]).is_ok());
        assert_eq!(MixedStrategy::pure(a, 2).unwrap().as_pure(), Some(2));
    }

    fn arb_seq() -> impl Strategy<Value = (usize, Vec<usize>)> {
        (1usize..6).prop_flat_map(|k| (Just(k), prop::collection::vec(0..k, 1..80)))
    }

    proptest! {
        #[test]
        fn runs_bounds_and_counts_sum((k, items) in arb_seq()) {
            let seq = PlaySequence::new(ActionAlphabet::indexed(k).unwrap(), items).unwrap();
            let r = count_runs(&seq).unwrap();
            let counts = count_categories(&seq);
            prop_assert!(r >= 1 && r <= seq.len());
            prop_assert!(r >= counts.distinct());
            prop_assert_eq!(counts.counts().iter().sum::<u64>(), seq.len() as u64);
            prop_assert_eq!(counts.total(), seq.len() as u64);
        }

        #[test]
        fn runs_invariant_under_relabeling((k, items) in arb_seq(), shift in 0usize..6) {
            let alphabet = ActionAlphabet::indexed(k).unwrap();
            let relabeled: Vec<usize> = items.iter().map(|&i| (i + shift) % k).collect();
            let a = PlaySequence::new(alphabet.clone(), items).unwrap();
            let b = PlaySequence::new(alphabet, relabeled).unwrap();
            prop_assert_eq!(count_runs(&a).unwrap(), count_runs(&b).unwrap());
        }
    }
}
