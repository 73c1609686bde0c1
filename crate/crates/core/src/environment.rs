//! The invasion game, trial bookkeeping and the two interacting-agent
//! protocols.

use rand::distributions::{Distribution, WeightedIndex};
use rand::RngCore;

use crate::agent::Agent;
use crate::error::{Error, Result};

/// Attacker shows one of `n_symbols` signs; the defender must answer with
/// the matching move.
#[derive(Debug, Clone, PartialEq)]
pub struct InvasionGame {
    correct_map: Vec<usize>,
    percept_distribution: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl InvasionGame {
    /// Identity map, uniform percepts.
    pub fn new(n_symbols: usize) -> Result<Self> {
        Self::with(( 0..n_symbols).collect(), vec![1.0 / n_symbols as f64; n_symbols])
    }

    pub fn with(correct_map: Vec<usize>, percept_distribution: Vec<f64>) -> Result<Self> {
        let n = correct_map.len();
        if n < 2 {
            return Err(Error::InvalidGame(format!("need at least 2 symbols, got {n}")));
        }
        let mut seen = vec![false; n];
        for &a in &correct_map {
            if a >= n || std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidGame("correct map must be a bijection".into()));
            }
        }
        if percept_distribution.len() != n {
            return Err(Error::InvalidGame("percept distribution length differs from symbol count".into()));
        }
        let total: f64 = percept_distribution.iter().sum();
        if percept_distribution.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidGame(format!("percept distribution must be non-negative and sum to 1, sums to {total}")));
        }
        let sampler = WeightedIndex::new(&percept_distribution)
            .map_err(|e| Error::InvalidGame(format!("percept distribution: {e}")))?;
        Ok(Self { correct_map, percept_distribution, sampler })
    }

    pub fn n_symbols(&self) -> usize {
        self.correct_map.len()
    }

    pub fn correct_action(&self, percept: usize) -> usize {
        self.correct_map[percept]
    }

    pub fn percept_distribution(&self) -> &[f64] {
        &self.percept_distribution
    }

    pub fn next_percept(&self, rng: &mut dyn RngCore) -> usize {
        self.sampler.sample(rng)
    }

    pub fn judge(&self, percept: usize, action: usize) -> bool {
        self.correct_map[percept] == action
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub percept: usize,
    pub action: usize,
    pub rewarded: bool,
    /// Whether the action was the game's correct answer, independent of who
    /// handed out the reward.
    pub correct: bool,
    /// The agent's probability of the correct action at deliberation time.
    pub correct_probability: f64,
    pub t_star: Option<f64>,
}

/// Deliberates on `percept`, lets `reward_rule` decide, then learns.
fn act_and_learn(
    agent: &mut (impl Agent + ?Sized),
    game: &InvasionGame,
    trial_index: usize,
    percept: usize,
    reward_rule: impl FnOnce(usize) -> bool,
    rng: &mut dyn RngCore,
) -> Result<TrialRecord> {
    if percept >= agent.n_percepts() {
        return Err(Error::IndexOutOfRange { what: "percept", index: percept, limit: agent.n_percepts() });
    }
    let d = agent.deliberate(percept, rng)?;
    let correct = game.judge(percept, d.action);
    let rewarded = reward_rule(d.action);
    agent.learn(percept, d.action, rewarded);
    Ok(TrialRecord {
        trial_index,
        percept,
        action: d.action,
        rewarded,
        correct,
        correct_probability: d.probabilities[game.correct_action(percept)].clamp(0.0, 1.0),
        t_star: d.t_star,
    })
}

/// One percept, one deliberation, one judged update.
pub fn run_trial(
    agent: &mut (impl Agent + ?Sized),
    game: &InvasionGame,
    trial_index: usize,
    rng: &mut dyn RngCore,
) -> Result<TrialRecord> {
    let percept = game.next_percept(rng);
    act_and_learn(agent, game, trial_index, percept, |action| game.judge(percept, action), rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionMode {
    /// Agent 2 perceives agent 1's action and is judged by the game.
    Relay,
    /// Both see the same percept; agent 2 is rewarded for copying agent 1.
    Imitate,
}

pub fn run_interacting_trial(
    first: &mut (impl Agent + ?Sized),
    second: &mut (impl Agent + ?Sized),
    game: &InvasionGame,
    mode: InteractionMode,
    trial_index: usize,
    rng: &mut dyn RngCore,
) -> Result<(TrialRecord, TrialRecord)> {
    let r1 = run_trial(first, game, trial_index, rng)?;
    let r2 = match mode {
        InteractionMode::Imitate => {
            let leader = r1.action;
            act_and_learn(second, game, trial_index, r1.percept, |action| action == leader, rng)?
        }
        InteractionMode::Relay => {
            let percept = r1.action;
            act_and_learn(second, game, trial_index, percept, |action| game.judge(percept, action), rng)?
        }
    };
    Ok((r1, r2))
}

/// What the learning curve averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EfficiencySource {
    /// The agent's probability of the correct action.
    #[default]
    Probability,
    /// 1 for a correct action, 0 otherwise.
    Outcome,
}

impl TrialRecord {
    pub fn efficiency(&self, source: EfficiencySource) -> f64 {
        match source {
            EfficiencySource::Probability => self.correct_probability,
            EfficiencySource::Outcome => f64::from(u8::from(self.correct)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub trial: usize,
    pub mean: f64,
    pub std: f64,
    /// Mean over the agents that saw each percept at this trial; NaN when
    /// none did.
    pub percept_means: Vec<f64>,
}

/// Ensemble statistics of the learning efficiency, one row per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub rows: Vec<CurveRow>,
}

impl LearningCurve {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_percepts(&self) -> usize {
        self.rows.first().map_or(0, |r| r.percept_means.len())
    }

    pub fn means(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean).collect()
    }

    pub fn stds(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.std).collect()
    }
}

/// Mean and population standard deviation per trial across the ensemble.
pub fn efficiency_curve(ensemble: &[Vec<TrialRecord>], n_percepts: usize, source: EfficiencySource) -> Result<LearningCurve> {
    let Some(first) = ensemble.first() else {
        return Err(Error::RaggedEnsemble("empty ensemble".into()));
    };
    let trials = first.len();
    if let Some((i, r)) = ensemble.iter().enumerate().find(|(_, r)| r.len() != trials) {
        return Err(Error::RaggedEnsemble(format!("agent {i} has {} trials, agent 0 has {trials}", r.len())));
    }
    let n = ensemble.len() as f64;
    let rows = (0..trials)
        .map(|t| {
            let values: Vec<f64> = ensemble.iter().map(|r| r[t].efficiency(source)).collect();
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let mut sums = vec![0.0; n_percepts];
            let mut counts = vec![0usize; n_percepts];
            for (records, v) in ensemble.iter().zip(&values) {
                if let Some(slot) = sums.get_mut(records[t].percept) {
                    *slot += v;
                    counts[records[t].percept] += 1;
                }
            }
            let percept_means = sums.iter().zip(&counts).map(|(s, &c)| if c == 0 { f64::NAN } else { s / c as f64 }).collect();
            CurveRow { trial: t, mean, std: var.max(0.0).sqrt(), percept_means }
        })
        .collect();
    Ok(LearningCurve { rows })
}
