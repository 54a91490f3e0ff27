//! Command-line front end.
//!
//! Exit codes: `0` success (or `AcceptH0` for `test`), `1` `RejectH0` for
//! `test`, `2` any error.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::calibration::{run_calibration, wilson_interval};
use crate::error::Error as CoreError;
use crate::ingest::{load_dataset, parse_sequence_file, Dataset};
use crate::model::{ActionAlphabet, MixedStrategy};
use crate::simulate::{
    run_meta_algorithm, MetaConfig, OpponentKind, OpponentProcess, Player, StrategicFormGame,
};
use crate::strategy_test::{strategy_test, Alpha, Decision, JointClass, StrategyTestReport};

pub const EXIT_ACCEPT: u8 = 0;
pub const EXIT_REJECT: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("output: {0}")]
    Output(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "strattest",
    version,
    about = "Test observed play against a target mixed strategy"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test one sequence file against a target strategy.
    Test(TestArgs),
    /// Classify every subject in a directory of per-subject CSV files.
    Batch(BatchArgs),
    /// Estimate rejection rates under i.i.d. play from the target.
    Calibrate(CalibrateArgs),
    /// Simulate the exploit-only-on-rejection opponent-modeling loop.
    Meta(MetaArgs),
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Integer-coded plays separated by commas and/or newlines.
    pub file: PathBuf,
    /// Target probabilities, e.g. `1/3,1/3,1/3` or `0.25,0.6,0.15`.
    #[arg(long, default_value = "1/3,1/3,1/3")]
    pub target: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    pub dir: PathBuf,
    #[arg(long, default_value = "1/3,1/3,1/3")]
    pub target: String,
    /// Significance level; repeat for several table rows.
    #[arg(long = "alpha", default_values_t = [0.05, 0.025])]
    pub alphas: Vec<f64>,
    /// Treat each α as the per-subtest threshold instead of splitting it in half.
    #[arg(long)]
    pub per_test_level: bool,
    /// Per-subject CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, default_value = "1/3,1/3,1/3")]
    pub target: String,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct MetaArgs {
    /// `rps` or a path to a game matrix file.
    #[arg(long, default_value = "rps")]
    pub game: String,
    /// `static:P1,P2,…`, `cycle:A,B,…` (labels or indices) or
    /// `markov:ROW;ROW;…` with comma-separated transition rows.
    #[arg(long)]
    pub opponent: String,
    #[arg(long, default_value_t = 50)]
    pub explore: usize,
    #[arg(long, default_value_t = 1000)]
    pub horizon: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed for the opponent's randomization; defaults to `seed + 1`.
    #[arg(long)]
    pub opponent_seed: Option<u64>,
    /// Our equilibrium strategy; uniform by default.
    #[arg(long)]
    pub equilibrium: Option<String>,
    /// Opponent's equilibrium strategy tested against; uniform by default.
    #[arg(long)]
    pub target: Option<String>,
    /// Pseudocounts added to the opponent frequency model; zeros by default.
    #[arg(long)]
    pub prior: Option<String>,
    /// Trajectory CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match cli.command {
        Command::Test(args) => cmd_test(&args, out),
        Command::Batch(args) => cmd_batch(&args, out),
        Command::Calibrate(args) => cmd_calibrate(&args, out),
        Command::Meta(args) => cmd_meta(&args, out),
    }
}

/// Parses comma-separated numbers; each may be a decimal or a fraction `a/b`.
pub fn parse_numbers(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|token| {
            let bad = || CliError::Usage(format!("not a number: {token:?}"));
            match token.split_once('/') {
                Some((num, den)) => {
                    let num: f64 = num.trim().parse().map_err(|_| bad())?;
                    let den: f64 = den.trim().parse().map_err(|_| bad())?;
                    Ok(num / den)
                }
                None => token.parse().map_err(|_| bad()),
            }
        })
        .collect()
}

fn parse_strategy(
    spec: &str,
    alphabet: Option<&ActionAlphabet>,
) -> Result<MixedStrategy, CliError> {
    let probs = parse_numbers(spec)?;
    let alphabet = match alphabet {
        Some(a) => a.clone(),
        None => ActionAlphabet::indexed(probs.len())?,
    };
    Ok(MixedStrategy::new(alphabet, probs)?)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Six significant digits in scientific notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.5e}")
    }
}

pub fn render_report(report: &StrategyTestReport) -> String {
    let r = &report.runs;
    let g = &report.gof;
    let mut s = String::new();
    let _ = writeln!(s, "n = {}", r.n);
    let _ = writeln!(s, "runs test:");
    let _ = writeln!(s, "  r = {}  q = {}  c = {}", r.r, r.q, r.c);
    let _ = writeln!(
        s,
        "  mu = {:.6}  sigma = {:.6}  z = {:.6}",
        r.mu, r.sigma, r.z
    );
    let _ = writeln!(
        s,
        "  p_runs = {}{}",
        sig6(r.p_value),
        if r.degenerate {
            "  (degenerate: zero variance)"
        } else {
            ""
        }
    );
    let _ = writeln!(s, "chi-squared goodness of fit:");
    let expected: Vec<String> = g.expected.iter().map(|e| format!("{e:.4}")).collect();
    let _ = writeln!(
        s,
        "  T = {:.6}  df = {}  expected = [{}]",
        g.statistic,
        g.df,
        expected.join(", ")
    );
    let _ = writeln!(
        s,
        "  p_chi2 = {}{}",
        sig6(g.p_value),
        if g.degenerate {
            "  (degenerate: point-mass target)"
        } else {
            ""
        }
    );
    if g.warnings.small_expected {
        let _ = writeln!(s, "  warning: some expected counts are below 5");
    }
    if g.warnings.zero_probability_violation {
        let _ = writeln!(
            s,
            "  warning: observed an action with zero target probability"
        );
    }
    let _ = writeln!(
        s,
        "alpha = {} (each subtest at {})",
        report.alpha,
        report.alpha.bonferroni_half()
    );
    let _ = writeln!(s, "decision = {}", report.decision);
    let _ = writeln!(s, "rejected_by = {}", report.rejected_by);
    s
}

fn cmd_test(args: &TestArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let alpha = Alpha::new(args.alpha)?;
    let target = parse_strategy(&args.target, None)?;
    let content = read_file(&args.file)?;
    let seq = parse_sequence_file(&content, target.alphabet())?;
    let report = strategy_test(&target, &seq, alpha)?;
    out.write_all(render_report(&report).as_bytes())?;
    Ok(match report.decision {
        Decision::AcceptH0 => EXIT_ACCEPT,
        Decision::RejectH0 => EXIT_REJECT,
    })
}

/// One row of the batch summary table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSummary {
    pub alpha: f64,
    /// Both subtests significant.
    pub x1: usize,
    /// Only chi-squared significant.
    pub x2: usize,
    /// Only the runs test significant.
    pub x3: usize,
    /// Neither significant.
    pub x4: usize,
    pub total: usize,
}

/// Per-subject p-values of both subtests.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectResult {
    pub subject_id: String,
    pub n: usize,
    pub p_runs: f64,
    pub p_chi2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub subjects: Vec<SubjectResult>,
    pub summaries: Vec<BatchSummary>,
    /// `(subject_id, message)` for subjects that could not be tested.
    pub failures: Vec<(String, String)>,
}

/// Runs both subtests on every record and tabulates the joint classes per α.
///
/// A subtest counts as significant at row `α` when `p ≤ α/2`, or `p ≤ α`
/// with `per_test_level`.
pub fn batch_classify(
    dataset: &Dataset,
    target: &MixedStrategy,
    alphas: &[Alpha],
    per_test_level: bool,
) -> BatchOutcome {
    let mut subjects = Vec::with_capacity(dataset.records.len());
    let mut failures: Vec<(String, String)> = dataset
        .failures
        .iter()
        .map(|f| (f.subject_id.clone(), f.message.clone()))
        .collect();
    // The level passed to strategy_test does not affect the p-values.
    let any_alpha = Alpha::new(0.05).expect("valid");
    for record in &dataset.records {
        match strategy_test(target, &record.sequence, any_alpha) {
            Ok(rep) => subjects.push(SubjectResult {
                subject_id: record.subject_id.clone(),
                n: record.sequence.len(),
                p_runs: rep.runs.p_value,
                p_chi2: rep.gof.p_value,
            }),
            Err(err) => failures.push((record.subject_id.clone(), err.to_string())),
        }
    }
    let summaries = alphas
        .iter()
        .map(|&alpha| {
            let threshold = if per_test_level {
                alpha.value()
            } else {
                alpha.bonferroni_half()
            };
            let mut s = BatchSummary {
                alpha: alpha.value(),
                x1: 0,
                x2: 0,
                x3: 0,
                x4: 0,
                total: subjects.len(),
            };
            for subject in &subjects {
                match JointClass::classify(subject.p_runs, subject.p_chi2, threshold) {
                    JointClass::Both => s.x1 += 1,
                    JointClass::Chi2Only => s.x2 += 1,
                    JointClass::RunsOnly => s.x3 += 1,
                    JointClass::Neither => s.x4 += 1,
                }
            }
            s
        })
        .collect();
    BatchOutcome {
        subjects,
        summaries,
        failures,
    }
}

pub fn render_batch_table(outcome: &BatchOutcome, per_test_level: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "subjects tested: {}  failed: {}",
        outcome.subjects.len(),
        outcome.failures.len()
    );
    let _ = writeln!(
        s,
        "subtest threshold: {}",
        if per_test_level { "alpha" } else { "alpha/2" }
    );
    let _ = writeln!(
        s,
        "{:<8} {:>6} {:>6} {:>6} {:>6} {:>6}",
        "alpha", "X1", "X2", "X3", "X4", "total"
    );
    for row in &outcome.summaries {
        let _ = writeln!(
            s,
            "{:<8} {:>6} {:>6} {:>6} {:>6} {:>6}",
            row.alpha, row.x1, row.x2, row.x3, row.x4, row.total
        );
    }
    s
}

pub fn render_batch_csv(outcome: &BatchOutcome, alphas: &[Alpha], per_test_level: bool) -> String {
    let mut s = String::from("subject_id,n,alpha,p_runs,p_chi2,class\n");
    for alpha in alphas {
        let threshold = if per_test_level {
            alpha.value()
        } else {
            alpha.bonferroni_half()
        };
        for subject in &outcome.subjects {
            let class = JointClass::classify(subject.p_runs, subject.p_chi2, threshold);
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                subject.subject_id,
                subject.n,
                alpha,
                sig6(subject.p_runs),
                sig6(subject.p_chi2),
                class.label()
            );
        }
    }
    s
}

fn cmd_batch(args: &BatchArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let alphas = args
        .alphas
        .iter()
        .map(|&a| Alpha::new(a))
        .collect::<Result<Vec<_>, _>>()?;
    let target = parse_strategy(&args.target, None)?;
    let dataset = load_dataset(&args.dir, target.alphabet())?;
    for warning in &dataset.warnings {
        eprintln!("warning: {warning}");
    }
    let outcome = batch_classify(&dataset, &target, &alphas, args.per_test_level);
    for (id, message) in &outcome.failures {
        eprintln!("failed: {id}: {message}");
    }
    out.write_all(render_batch_table(&outcome, args.per_test_level).as_bytes())?;
    if let Some(path) = &args.out {
        write_file(
            path,
            &render_batch_csv(&outcome, &alphas, args.per_test_level),
        )?;
    }
    Ok(0)
}

fn cmd_calibrate(args: &CalibrateArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let alpha = Alpha::new(args.alpha)?;
    let target = parse_strategy(&args.target, None)?;
    let report = run_calibration(&target, args.n, args.trials, alpha, args.seed)?;
    writeln!(
        out,
        "n = {}  trials = {}  alpha = {}  seed = {}",
        report.n, report.trials, alpha, args.seed
    )?;
    writeln!(
        out,
        "{:<10} {:>10} {:>10} {:>22}",
        "test", "rejected", "rate", "95% Wilson interval"
    )?;
    for (name, count) in [
        ("runs", report.runs_rejections),
        ("chi2", report.chi2_rejections),
        ("combined", report.combined_rejections),
    ] {
        let (lo, hi) = wilson_interval(count, report.trials, 1.959_963_984_540_054);
        writeln!(
            out,
            "{:<10} {:>10} {:>10.6} {:>10.6} - {:<10.6}",
            name,
            count,
            count as f64 / report.trials as f64,
            lo,
            hi
        )?;
    }
    Ok(0)
}

fn parse_opponent(
    spec: &str,
    alphabet: &ActionAlphabet,
    seed: u64,
) -> Result<OpponentProcess, CliError> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("opponent spec needs `kind:...`, got {spec:?}")))?;
    let kind = match kind.trim() {
        "static" => OpponentKind::StaticMixed(parse_strategy(body, Some(alphabet))?),
        "cycle" => {
            let actions = body
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|tok| {
                    alphabet
                        .index_of(tok)
                        .or_else(|| tok.parse().ok())
                        .ok_or_else(|| CliError::Usage(format!("unknown action {tok:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            OpponentKind::Cycle(actions)
        }
        "markov" => {
            let transitions = body
                .split(';')
                .map(parse_numbers)
                .collect::<Result<Vec<_>, _>>()?;
            OpponentKind::Markov {
                transitions,
                initial: MixedStrategy::uniform(alphabet.clone()),
            }
        }
        other => return Err(CliError::Usage(format!("unknown opponent kind {other:?}"))),
    };
    let process = OpponentProcess::new(kind, seed);
    process.validate(alphabet.len())?;
    Ok(process)
}

fn cmd_meta(args: &MetaArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let alpha = Alpha::new(args.alpha)?;
    let game = if args.game == "rps" {
        StrategicFormGame::rps()
    } else {
        StrategicFormGame::parse(&read_file(Path::new(&args.game))?)?
    };
    let own_actions = game.actions(Player::One).clone();
    let opp_actions = game.actions(Player::Two).clone();
    let own_equilibrium = match &args.equilibrium {
        Some(spec) => parse_strategy(spec, Some(&own_actions))?,
        None => MixedStrategy::uniform(own_actions),
    };
    let opponent_target = match &args.target {
        Some(spec) => parse_strategy(spec, Some(&opp_actions))?,
        None => MixedStrategy::uniform(opp_actions.clone()),
    };
    let prior_pseudocounts = match &args.prior {
        Some(spec) => parse_numbers(spec)?,
        None => vec![0.0; opp_actions.len()],
    };
    let config = MetaConfig {
        explore_steps: args.explore,
        horizon: args.horizon,
        own_equilibrium,
        opponent_target,
        prior_pseudocounts,
        alpha,
        seed: args.seed,
    };
    let opponent_seed = args
        .opponent_seed
        .unwrap_or_else(|| args.seed.wrapping_add(1));
    let opponent = parse_opponent(&args.opponent, &opp_actions, opponent_seed)?;
    let report = run_meta_algorithm(&game, &config, &opponent)?;

    writeln!(
        out,
        "exploration steps = {}  horizon = {}",
        config.explore_steps, config.horizon
    )?;
    out.write_all(render_report(&report.test).as_bytes())?;
    writeln!(out, "branch = {}", report.branch)?;
    writeln!(out, "exploration payoff = {}", report.exploration_payoff())?;
    writeln!(
        out,
        "post-exploration payoff = {}",
        report.post_exploration_payoff()
    )?;
    if let Some(mean) = report.post_exploration_mean() {
        writeln!(out, "post-exploration mean payoff = {mean:.6}")?;
    }
    writeln!(out, "cumulative payoff = {}", report.cumulative_payoff())?;
    if let Some(path) = &args.out {
        write_file(path, &report.to_csv())?;
    }
    Ok(0)
}
