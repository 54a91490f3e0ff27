//! Two-player strategic-form games, oblivious opponent processes, and the
//! opponent-modeling loop that only exploits after the strategy test
//! rejects.
//!
//! We are always player one (rows). The opponent is player two (columns).

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ActionAlphabet, MixedStrategy, PlaySequence, PROBABILITY_SUM_TOLERANCE};
use crate::strategy_test::{strategy_test, Alpha, Decision, StrategyTestReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn other(self) -> Self {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategicFormGame {
    row_actions: ActionAlphabet,
    col_actions: ActionAlphabet,
    /// Row-major `(u1, u2)` cells.
    payoffs: Vec<(f64, f64)>,
}

impl StrategicFormGame {
    pub fn new(
        row_actions: ActionAlphabet,
        col_actions: ActionAlphabet,
        payoffs: Vec<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        if payoffs.len() != row_actions.len() {
            return Err(Error::InvalidGame(format!(
                "expected {} rows, got {}",
                row_actions.len(),
                payoffs.len()
            )));
        }
        let mut cells = Vec::with_capacity(row_actions.len() * col_actions.len());
        for (i, row) in payoffs.into_iter().enumerate() {
            if row.len() != col_actions.len() {
                return Err(Error::InvalidGame(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    col_actions.len()
                )));
            }
            for &(u1, u2) in &row {
                if !u1.is_finite() || !u2.is_finite() {
                    return Err(Error::InvalidGame(format!(
                        "non-finite payoff in row {}",
                        i + 1
                    )));
                }
            }
            cells.extend(row);
        }
        Ok(Self {
            row_actions,
            col_actions,
            payoffs: cells,
        })
    }

    /// Rock-paper-scissors with win = 1, loss = −1, tie = 0.
    pub fn rps() -> Self {
        let row = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| vec![a, b, c];
        Self::new(
            ActionAlphabet::rps(),
            ActionAlphabet::rps(),
            vec![
                row((0.0, 0.0), (-1.0, 1.0), (1.0, -1.0)),
                row((1.0, -1.0), (0.0, 0.0), (-1.0, 1.0)),
                row((-1.0, 1.0), (1.0, -1.0), (0.0, 0.0)),
            ],
        )
        .expect("static game is valid")
    }

    pub fn actions(&self, player: Player) -> &ActionAlphabet {
        match player {
            Player::One => &self.row_actions,
            Player::Two => &self.col_actions,
        }
    }

    pub fn payoff(&self, row: usize, col: usize) -> (f64, f64) {
        self.payoffs[row * self.col_actions.len() + col]
    }

    /// Utility to `player` when it plays `own` and the other player plays `opp`.
    pub fn utility(&self, player: Player, own: usize, opp: usize) -> f64 {
        match player {
            Player::One => self.payoff(own, opp).0,
            Player::Two => self.payoff(opp, own).1,
        }
    }

    pub fn is_zero_sum(&self) -> bool {
        self.payoffs.iter().all(|&(a, b)| a + b == 0.0)
    }

    /// Parses the plain-text matrix format:
    ///
    /// ```text
    /// # comment
    /// 3 3
    /// 0,0 -1,1 1,-1
    /// 1,-1 0,0 -1,1
    /// -1,1 1,-1 0,0
    /// ```
    ///
    /// The header holds `k1 k2`; each following line holds `k2` cells `u1,u2`
    /// separated by whitespace.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidGame("missing header".into()))?;
        let dims: Vec<usize> = header
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::InvalidGame(format!("bad dimension {s:?}")))
            })
            .collect::<Result<_>>()?;
        let [k1, k2] = dims[..] else {
            return Err(Error::InvalidGame(format!(
                "header must be `k1 k2`, got {header:?}"
            )));
        };
        let mut rows = Vec::with_capacity(k1);
        for (i, line) in lines.enumerate() {
            let row = line
                .split_whitespace()
                .map(|cell| parse_cell(cell, i + 1))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let row_actions =
            ActionAlphabet::indexed(k1).map_err(|e| Error::InvalidGame(e.to_string()))?;
        let col_actions =
            ActionAlphabet::indexed(k2).map_err(|e| Error::InvalidGame(e.to_string()))?;
        Self::new(row_actions, col_actions, rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.row_actions.len(), self.col_actions.len());
        for i in 0..self.row_actions.len() {
            let cells: Vec<String> = (0..self.col_actions.len())
                .map(|j| {
                    let (a, b) = self.payoff(i, j);
                    format!("{a},{b}")
                })
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

fn parse_cell(cell: &str, row: usize) -> Result<(f64, f64)> {
    let bad = || Error::InvalidGame(format!("bad cell {cell:?} in row {row}"));
    let (a, b) = cell.split_once(',').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

fn check_dims(
    game: &StrategicFormGame,
    own: &MixedStrategy,
    opp: &MixedStrategy,
    player: Player,
) -> Result<()> {
    for (strategy, who) in [(own, player), (opp, player.other())] {
        let expected = game.actions(who).len();
        if strategy.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: strategy.len(),
            });
        }
    }
    Ok(())
}

/// `Σ_j Σ_l own(j)·opp(l)·u_player(j, l)`.
pub fn expected_payoff(
    game: &StrategicFormGame,
    own: &MixedStrategy,
    opp: &MixedStrategy,
    player: Player,
) -> Result<f64> {
    check_dims(game, own, opp, player)?;
    let values = pure_strategy_values(game, opp, player)?;
    Ok(own.probs().iter().zip(&values).map(|(p, v)| p * v).sum())
}

/// Expected payoff of each of `player`'s pure strategies against `opp`.
pub fn pure_strategy_values(
    game: &StrategicFormGame,
    opp: &MixedStrategy,
    player: Player,
) -> Result<Vec<f64>> {
    let k_opp = game.actions(player.other()).len();
    if opp.len() != k_opp {
        return Err(Error::DimensionMismatch {
            expected: k_opp,
            got: opp.len(),
        });
    }
    Ok((0..game.actions(player).len())
        .map(|own| {
            opp.probs()
                .iter()
                .enumerate()
                .map(|(l, &q)| q * game.utility(player, own, l))
                .sum()
        })
        .collect())
}

/// Pure best response; ties go to the lowest index.
pub fn best_response(
    game: &StrategicFormGame,
    opp_model: &MixedStrategy,
    player: Player,
) -> Result<MixedStrategy> {
    let values = pure_strategy_values(game, opp_model, player)?;
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    MixedStrategy::pure(game.actions(player).clone(), best)
}

/// Frequency model with additive pseudocounts:
/// `p_j = (prior_j + n_j) / (Σ prior + n)`.
pub fn frequency_model(
    prior_pseudocounts: &[f64],
    observations: &PlaySequence,
) -> Result<MixedStrategy> {
    let counts = observations.counts();
    frequency_model_from_counts(prior_pseudocounts, counts.counts(), observations.alphabet())
}

pub fn frequency_model_from_counts(
    prior_pseudocounts: &[f64],
    counts: &[u64],
    alphabet: &ActionAlphabet,
) -> Result<MixedStrategy> {
    if prior_pseudocounts.len() != alphabet.len() || counts.len() != alphabet.len() {
        return Err(Error::DimensionMismatch {
            expected: alphabet.len(),
            got: prior_pseudocounts.len().min(counts.len()),
        });
    }
    if prior_pseudocounts
        .iter()
        .any(|&p| !p.is_finite() || p < 0.0)
    {
        return Err(Error::InvalidPrior(
            "pseudocounts must be finite and non-negative".into(),
        ));
    }
    let weights: Vec<f64> = prior_pseudocounts
        .iter()
        .zip(counts)
        .map(|(&p, &c)| p + c as f64)
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidPrior(
            "pseudocounts are all zero and there are no observations".into(),
        ));
    }
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    // Push any rounding residue onto the largest entry.
    let residue = 1.0 - probs.iter().sum::<f64>();
    if residue != 0.0 {
        let (imax, _) =
            probs.iter().enumerate().fold(
                (0, f64::MIN),
                |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc },
            );
        probs[imax] = (probs[imax] + residue).clamp(0.0, 1.0);
    }
    MixedStrategy::new(alphabet.clone(), probs)
}

/// Draws an action index from `probs` using one uniform variate.
pub fn sample_action<R: Rng + ?Sized>(strategy: &MixedStrategy, rng: &mut R) -> usize {
    sample_index(strategy.probs(), rng)
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

#[derive(Debug, Clone, PartialEq)]
pub enum OpponentKind {
    /// Independent draws from a fixed mixed strategy.
    StaticMixed(MixedStrategy),
    /// Deterministic repetition of the listed actions.
    Cycle(Vec<usize>),
    /// First-order Markov chain over actions.
    Markov {
        transitions: Vec<Vec<f64>>,
        initial: MixedStrategy,
    },
}

/// An oblivious opponent: its play never depends on ours.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentProcess {
    pub kind: OpponentKind,
    pub seed: u64,
}

impl OpponentProcess {
    pub fn new(kind: OpponentKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        match &self.kind {
            OpponentKind::StaticMixed(s) => {
                if s.len() != k {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        got: s.len(),
                    });
                }
            }
            OpponentKind::Cycle(actions) => {
                if actions.is_empty() {
                    return Err(Error::InvalidOpponent("cycle must be nonempty".into()));
                }
                if let Some(&bad) = actions.iter().find(|&&a| a >= k) {
                    return Err(Error::ActionOutOfRange { index: bad, k });
                }
            }
            OpponentKind::Markov {
                transitions,
                initial,
            } => {
                if initial.len() != k || transitions.len() != k {
                    return Err(Error::InvalidOpponent(format!(
                        "markov chain must have {k} states"
                    )));
                }
                for (i, row) in transitions.iter().enumerate() {
                    if row.len() != k {
                        return Err(Error::InvalidOpponent(format!(
                            "transition row {i} has {} entries, expected {k}",
                            row.len()
                        )));
                    }
                    if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                        return Err(Error::InvalidOpponent(format!(
                            "transition row {i} has an entry outside [0, 1]"
                        )));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                        return Err(Error::InvalidOpponent(format!(
                            "transition row {i} sums to {sum}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn sampler(&self, k: usize) -> Result<OpponentSampler<'_>> {
        self.validate(k)?;
        Ok(OpponentSampler {
            process: self,
            rng: ChaCha8Rng::seed_from_u64(self.seed),
            step: 0,
            previous: None,
        })
    }
}

pub struct OpponentSampler<'a> {
    process: &'a OpponentProcess,
    rng: ChaCha8Rng,
    step: usize,
    previous: Option<usize>,
}

impl OpponentSampler<'_> {
    pub fn next_action(&mut self) -> usize {
        let action = match &self.process.kind {
            OpponentKind::StaticMixed(s) => sample_action(s, &mut self.rng),
            OpponentKind::Cycle(actions) => actions[self.step % actions.len()],
            OpponentKind::Markov {
                transitions,
                initial,
            } => match self.previous {
                None => sample_action(initial, &mut self.rng),
                Some(prev) => sample_index(&transitions[prev], &mut self.rng),
            },
        };
        self.step += 1;
        self.previous = Some(action);
        action
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaConfig {
    /// Exploration length `E`.
    pub explore_steps: usize,
    /// Total number of iterations.
    pub horizon: usize,
    /// Our equilibrium strategy, played during exploration and when the test accepts.
    pub own_equilibrium: MixedStrategy,
    /// The opponent's equilibrium strategy; the null hypothesis of the test.
    pub opponent_target: MixedStrategy,
    pub prior_pseudocounts: Vec<f64>,
    pub alpha: Alpha,
    /// Seed for our own randomization.
    pub seed: u64,
}

impl MetaConfig {
    /// Symmetric game where both sides share one equilibrium strategy.
    pub fn symmetric(
        equilibrium: MixedStrategy,
        explore_steps: usize,
        horizon: usize,
        alpha: Alpha,
        seed: u64,
    ) -> Self {
        Self {
            explore_steps,
            horizon,
            prior_pseudocounts: vec![0.0; equilibrium.len()],
            opponent_target: equilibrium.clone(),
            own_equilibrium: equilibrium,
            alpha,
            seed,
        }
    }

    pub fn validate(&self, game: &StrategicFormGame) -> Result<()> {
        if self.explore_steps < 2 {
            return Err(Error::InvalidConfig(format!(
                "exploration needs at least 2 steps, got {}",
                self.explore_steps
            )));
        }
        if self.explore_steps > self.horizon {
            return Err(Error::InvalidConfig(format!(
                "exploration steps {} exceed horizon {}",
                self.explore_steps, self.horizon
            )));
        }
        if self.own_equilibrium.alphabet() != game.actions(Player::One) {
            return Err(Error::AlphabetMismatch(
                "own equilibrium is not over player one's actions".into(),
            ));
        }
        if self.opponent_target.alphabet() != game.actions(Player::Two) {
            return Err(Error::AlphabetMismatch(
                "opponent target is not over player two's actions".into(),
            ));
        }
        let k2 = game.actions(Player::Two).len();
        if self.prior_pseudocounts.len() != k2 {
            return Err(Error::DimensionMismatch {
                expected: k2,
                got: self.prior_pseudocounts.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// The test accepted; we kept playing the equilibrium.
    Equilibrium,
    /// The test rejected; we best-responded to the running opponent model.
    Exploit,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Equilibrium => "equilibrium",
            Branch::Exploit => "exploit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// 1-based.
    pub step: usize,
    pub own_action: usize,
    pub opponent_action: usize,
    pub payoff: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryReport {
    pub steps: Vec<StepRecord>,
    pub explore_steps: usize,
    pub test: StrategyTestReport,
    pub branch: Branch,
    own_labels: ActionAlphabet,
    opponent_labels: ActionAlphabet,
}

impl TrajectoryReport {
    pub fn cumulative_payoff(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cumulative)
    }

    pub fn exploration_payoff(&self) -> f64 {
        self.steps[..self.explore_steps]
            .iter()
            .map(|s| s.payoff)
            .sum()
    }

    pub fn post_exploration_payoff(&self) -> f64 {
        self.steps[self.explore_steps..]
            .iter()
            .map(|s| s.payoff)
            .sum()
    }

    /// Mean payoff per iteration after exploration; `None` if `E` equals the horizon.
    pub fn post_exploration_mean(&self) -> Option<f64> {
        let m = self.steps.len() - self.explore_steps;
        (m > 0).then(|| self.post_exploration_payoff() / m as f64)
    }

    /// One CSV record per iteration followed by a `#`-prefixed summary block.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,own_action,opponent_action,payoff,cumulative_payoff\n");
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.step,
                self.own_labels.label(s.own_action).unwrap_or("?"),
                self.opponent_labels.label(s.opponent_action).unwrap_or("?"),
                s.payoff,
                s.cumulative
            );
        }
        let _ = writeln!(out, "# branch,{}", self.branch);
        let _ = writeln!(out, "# decision,{}", self.test.decision);
        let _ = writeln!(out, "# rejected_by,{}", self.test.rejected_by);
        let _ = writeln!(out, "# p_runs,{}", self.test.runs.p_value);
        let _ = writeln!(out, "# p_chi2,{}", self.test.gof.p_value);
        let _ = writeln!(out, "# explore_steps,{}", self.explore_steps);
        let _ = writeln!(out, "# horizon,{}", self.steps.len());
        let _ = writeln!(out, "# cumulative_payoff,{}", self.cumulative_payoff());
        let _ = writeln!(
            out,
            "# post_exploration_payoff,{}",
            self.post_exploration_payoff()
        );
        out
    }
}

pub fn run_meta_algorithm(
    game: &StrategicFormGame,
    config: &MetaConfig,
    opponent: &OpponentProcess,
) -> Result<TrajectoryReport> {
    config.validate(game)?;
    let opp_alphabet = game.actions(Player::Two).clone();
    let mut opp = opponent.sampler(opp_alphabet.len())?;
    let mut own_rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut steps = Vec::with_capacity(config.horizon);
    let mut observations = Vec::with_capacity(config.horizon);
    let mut cumulative = 0.0;
    let mut play = |steps: &mut Vec<StepRecord>, own: usize, opp_action: usize| {
        let payoff = game.utility(Player::One, own, opp_action);
        cumulative += payoff;
        steps.push(StepRecord {
            step: steps.len() + 1,
            own_action: own,
            opponent_action: opp_action,
            payoff,
            cumulative,
        });
    };

    for _ in 0..config.explore_steps {
        let own = sample_action(&config.own_equilibrium, &mut own_rng);
        let o = opp.next_action();
        observations.push(o);
        play(&mut steps, own, o);
    }

    let explored = PlaySequence::new(opp_alphabet.clone(), observations.clone())?;
    let test = strategy_test(&config.opponent_target, &explored, config.alpha)?;
    let remaining = config.horizon - config.explore_steps;

    let branch = match test.decision {
        Decision::AcceptH0 => {
            for _ in 0..remaining {
                let own = sample_action(&config.own_equilibrium, &mut own_rng);
                let o = opp.next_action();
                play(&mut steps, own, o);
            }
            Branch::Equilibrium
        }
        Decision::RejectH0 => {
            let mut counts = explored.counts().counts().to_vec();
            let mut model =
                frequency_model_from_counts(&config.prior_pseudocounts, &counts, &opp_alphabet)?;
            let mut response = best_response(game, &model, Player::One)?;
            for _ in 0..remaining {
                let own = sample_action(&response, &mut own_rng);
                let o = opp.next_action();
                play(&mut steps, own, o);
                counts[o] += 1;
                model = frequency_model_from_counts(
                    &config.prior_pseudocounts,
                    &counts,
                    &opp_alphabet,
                )?;
                response = best_response(game, &model, Player::One)?;
            }
            Branch::Exploit
        }
    };

    Ok(TrajectoryReport {
        steps,
        explore_steps: config.explore_steps,
        test,
        branch,
        own_labels: game.actions(Player::One).clone(),
        opponent_labels: opp_alphabet,
    })
}
