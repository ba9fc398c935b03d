//! Seeded Bernoulli-world episodes.
//!
//! Each round the population clears at its equilibrium price, the outcome is
//! drawn (`y = 1` iff the next outcome-stream deviate is below the true
//! probability), positions settle, wealth is renormalized and any Kelly
//! fraction learners update against the round's price.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentState, MarketRound, Population};
use crate::error::{MarketError, Result};
use crate::kelly::effective_belief;
use crate::learner::LambdaLearnerState;
use crate::market::{clearing_price, play_round_at};
use crate::metrics::LossLedger;
use crate::probability::{Outcome, Probability};
use crate::rng::{Stream, BELIEF_STREAM, OUTCOME_STREAM, RNG_ALGORITHM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefInit {
    /// Independent uniform draws on (0, 1) from the belief stream.
    #[default]
    UniformRandom,
    /// Beliefs `i / (n + 1)` for `i = 1..=n`.
    UniformGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaInit {
    Uniform(f64),
    PerAgent(Vec<f64>),
}

impl Default for LambdaInit {
    fn default() -> Self {
        LambdaInit::Uniform(1.0)
    }
}

impl LambdaInit {
    pub fn for_agent(&self, i: usize) -> f64 {
        match self {
            LambdaInit::Uniform(l) => *l,
            LambdaInit::PerAgent(ls) => ls[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_agents: usize,
    pub horizon: usize,
    pub true_prob: Probability,
    pub seed: u64,
    #[serde(default)]
    pub belief_init: BeliefInit,
    #[serde(default)]
    pub lambda_init: LambdaInit,
    #[serde(default)]
    pub learners_enabled: bool,
}

impl SimulationConfig {
    /// Equal-wealth full-Kelly market with uniformly random beliefs.
    pub fn kelly(n_agents: usize, horizon: usize, true_prob: f64, seed: u64) -> Self {
        Self {
            n_agents,
            horizon,
            true_prob: Probability::clamped(true_prob),
            seed,
            belief_init: BeliefInit::UniformRandom,
            lambda_init: LambdaInit::Uniform(1.0),
            learners_enabled: false,
        }
    }

    pub fn with_grid(mut self) -> Self {
        self.belief_init = BeliefInit::UniformGrid;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda_init = LambdaInit::Uniform(lambda);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(MarketError::InvalidConfig(msg));
        if self.n_agents == 0 {
            return bad("n_agents must be at least 1".into());
        }
        if let LambdaInit::PerAgent(ls) = &self.lambda_init {
            if ls.len() != self.n_agents {
                return bad(format!(
                    "lambda_init lists {} values for {} agents",
                    ls.len(),
                    self.n_agents
                ));
            }
        }
        for i in 0..self.n_agents {
            let l = self.lambda_init.for_agent(i);
            if !(0.0..=1.0).contains(&l) {
                return bad(format!("lambda_init[{i}] = {l} is outside [0, 1]"));
            }
            if self.learners_enabled && !(l > 0.0 && l < 1.0) {
                return bad(format!(
                    "lambda_init[{i}] = {l}: learners need a starting fraction strictly inside (0, 1)"
                ));
            }
        }
        Ok(())
    }

    /// True when every agent is a fixed full-Kelly bettor.
    pub fn is_full_kelly(&self) -> bool {
        !self.learners_enabled && (0..self.n_agents).all(|i| self.lambda_init.for_agent(i) == 1.0)
    }

    pub fn initial_beliefs(&self) -> Vec<Probability> {
        let n = self.n_agents;
        match self.belief_init {
            BeliefInit::UniformGrid => (1..=n)
                .map(|i| Probability::clamped(i as f64 / (n + 1) as f64))
                .collect(),
            BeliefInit::UniformRandom => {
                let mut rng = Stream::new(self.seed, BELIEF_STREAM);
                (0..n)
                    .map(|_| Probability::clamped(rng.uniform()))
                    .collect()
            }
        }
    }

    /// Equal wealth `1 / n`, beliefs and Kelly fractions from the config.
    pub fn initial_population(&self) -> Result<Population> {
        self.validate()?;
        let wealth = 1.0 / self.n_agents as f64;
        let agents = self
            .initial_beliefs()
            .into_iter()
            .enumerate()
            .map(|(i, belief)| {
                let lambda = self.lambda_init.for_agent(i);
                let agent = AgentState::new(i, belief, wealth, lambda)?;
                Ok(if self.learners_enabled {
                    agent.with_learner(LambdaLearnerState::from_lambda(lambda)?)
                } else {
                    agent
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Population::normalized(agents)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub rng: String,
    pub config: SimulationConfig,
    pub rounds: Vec<MarketRound>,
    pub final_population: Population,
    pub ledger: LossLedger,
}

impl SimulationRecord {
    pub fn prices(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.price.value()).collect()
    }

    pub fn outcomes(&self) -> Vec<Outcome> {
        self.rounds.iter().map(|r| r.outcome).collect()
    }

    pub fn successes(&self) -> u64 {
        self.rounds.iter().filter(|r| r.outcome.is_yes()).count() as u64
    }

    pub fn failures(&self) -> u64 {
        self.rounds.len() as u64 - self.successes()
    }
}

/// Per-round driver shared by [`run`] and replay audits.
pub(crate) fn end_of_round(pop: &mut Population, price: Probability, outcome: Outcome) {
    pop.renormalize();
    for agent in pop.agents_mut() {
        if let Some(learner) = agent.learner {
            let next = learner.update(agent.belief, price, outcome);
            agent.lambda = next.current_lambda();
            agent.learner = Some(next);
        }
    }
}

pub(crate) fn effective_beliefs(pop: &Population, price: Probability) -> Vec<Probability> {
    pop.agents()
        .iter()
        .map(|a| effective_belief(a.belief, price, a.lambda))
        .collect()
}

pub fn run(config: &SimulationConfig) -> Result<SimulationRecord> {
    let pop = config.initial_population()?;
    let mut draws = Stream::new(config.seed, OUTCOME_STREAM);
    let pi = config.true_prob.value();
    let episode = drive(pop, config.horizon, |_, _| {
        Outcome::from(draws.uniform() < pi)
    })?;
    Ok(SimulationRecord {
        rng: RNG_ALGORITHM.to_string(),
        config: config.clone(),
        rounds: episode.rounds,
        final_population: episode.final_population,
        ledger: episode.ledger,
    })
}

/// Result of [`drive`].
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub rounds: Vec<MarketRound>,
    pub final_population: Population,
    pub ledger: LossLedger,
}

/// Runs `horizon` rounds from `pop`, asking `outcome(t, price)` for each
/// round's result once the price is known. Adversarial sequences can pick
/// outcomes from the price; Bernoulli worlds ignore it.
pub fn drive<F>(mut pop: Population, horizon: usize, mut outcome: F) -> Result<Episode>
where
    F: FnMut(usize, Probability) -> Outcome,
{
    let mut ledger = LossLedger::new(pop.len());
    let mut rounds = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let price = clearing_price(&pop)?;
        let y = outcome(t, price);
        let (round, mut next) = play_round_at(&pop, price, y)?;
        ledger.record(round.price, &effective_beliefs(&pop, round.price), y);
        end_of_round(&mut next, round.price, y);
        rounds.push(round);
        pop = next;
    }
    Ok(Episode {
        rounds,
        final_population: pop,
        ledger,
    })
}

/// Runs every config independently, in parallel. Results keep input order
/// and a failing run does not stop the others.
pub fn run_batch(configs: &[SimulationConfig]) -> Result<Vec<Result<SimulationRecord>>> {
    if configs.is_empty() {
        return Err(MarketError::InvalidConfig("empty batch".into()));
    }
    Ok(configs.par_iter().map(run).collect())
}

/// One config per seed in `seeds`, otherwise identical to `base`.
pub fn seed_sweep(base: &SimulationConfig, seeds: std::ops::Range<u64>) -> Vec<SimulationConfig> {
    seeds.map(|s| base.clone().with_seed(s)).collect()
}
