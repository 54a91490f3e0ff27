//! Tests whether a sequence of pure-strategy plays in a repeated game is
//! consistent with a target mixed strategy.
//!
//! The combined test runs a generalized runs test of independence and a
//! chi-squared goodness of fit, each at level `α/2`, and rejects if either
//! does. [`simulate`] contains an opponent-modeling loop that only exploits
//! an opponent after the test rejects.
//!
//! ```
//! use strattest::{strategy_test, ActionAlphabet, Alpha, Decision, MixedStrategy, PlaySequence};
//!
//! let seq = PlaySequence::from_symbols(ActionAlphabet::rps(), "RRPPPSPRR").unwrap();
//! let target = MixedStrategy::uniform(ActionAlphabet::rps());
//! let report = strategy_test(&target, &seq, Alpha::new(0.05).unwrap()).unwrap();
//! assert_eq!(report.runs.r, 5);
//! assert_eq!(report.decision, Decision::AcceptH0);
//! ```

pub mod calibration;
pub mod chisq_gof;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod runs_test;
pub mod simulate;
pub mod special_fn;

pub use chisq_gof::{chi_squared_gof, GofTestResult, GofWarnings};
pub use error::{Error, Result};
pub use model::{
    count_categories, count_runs, ActionAlphabet, CountVector, MixedStrategy, PlaySequence,
};
pub use runs_test::{generalized_runs_test, RunsTestResult};
pub use special_fn::{chi_squared_sf, std_normal_cdf};
pub use strategy_test::{
    strategy_test, Alpha, Component, Decision, JointClass, RejectedBy, StrategyTestReport,
};
