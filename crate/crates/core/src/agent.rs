//! Market participants and per-period records.

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::learner::LambdaLearnerState;
use crate::probability::{Outcome, Probability};

/// Tolerance on `sum(wealth) == 1` for a population.
pub const WEALTH_SUM_TOLERANCE: f64 = 1e-9;

/// One market participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub belief: Probability,
    /// Share of total market wealth.
    pub wealth: f64,
    /// Kelly fraction; 1 is full Kelly, 0 defers entirely to the market.
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<LambdaLearnerState>,
}

impl AgentState {
    pub fn new(id: usize, belief: Probability, wealth: f64, lambda: f64) -> Result<Self> {
        if !(wealth >= 0.0 && wealth.is_finite()) {
            return Err(MarketError::InvalidWealth { id, wealth });
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(MarketError::InvalidLambda { id, lambda });
        }
        Ok(Self {
            id,
            belief,
            wealth,
            lambda,
            learner: None,
        })
    }

    /// Full-Kelly agent.
    pub fn kelly(id: usize, belief: Probability, wealth: f64) -> Result<Self> {
        Self::new(id, belief, wealth, 1.0)
    }

    /// Attaches a learner and sets `lambda` to the learner's current value.
    pub fn with_learner(mut self, learner: LambdaLearnerState) -> Self {
        self.lambda = learner.current_lambda();
        self.learner = Some(learner);
        self
    }

    /// Wealth weighted by confidence; the agent's weight in the clearing price.
    #[inline]
    pub fn confidence_wealth(&self) -> f64 {
        self.lambda * self.wealth
    }
}

/// A nonempty set of agents whose wealths sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    agents: Vec<AgentState>,
}

impl Population {
    pub fn new(agents: Vec<AgentState>) -> Result<Self> {
        if agents.is_empty() {
            return Err(MarketError::EmptyPopulation);
        }
        let total = total_wealth(&agents);
        if (total - 1.0).abs() > WEALTH_SUM_TOLERANCE {
            return Err(MarketError::UnnormalizedWealth(total));
        }
        Ok(Self { agents })
    }

    /// Builds a population from absolute wealths, scaling them to sum to one.
    pub fn normalized(mut agents: Vec<AgentState>) -> Result<Self> {
        if agents.is_empty() {
            return Err(MarketError::EmptyPopulation);
        }
        let total = total_wealth(&agents);
        if !(total > 0.0 && total.is_finite()) {
            return Err(MarketError::UnnormalizedWealth(total));
        }
        for a in &mut agents {
            a.wealth /= total;
        }
        Ok(Self { agents })
    }

    /// Equal-wealth full-Kelly agents with the given beliefs.
    pub fn equal_wealth(beliefs: &[Probability]) -> Result<Self> {
        let n = beliefs.len();
        let agents = beliefs
            .iter()
            .enumerate()
            .map(|(i, &b)| AgentState::kelly(i, b, 1.0 / n as f64))
            .collect::<Result<Vec<_>>>()?;
        Self::normalized(agents)
    }

    /// Wraps agents without checking the wealth sum. Settlement uses this to
    /// hand back raw post-payoff wealths before renormalization.
    pub(crate) fn from_agents_unchecked(agents: Vec<AgentState>) -> Self {
        Self { agents }
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [AgentState] {
        &mut self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn total_wealth(&self) -> f64 {
        total_wealth(&self.agents)
    }

    pub fn wealths(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.wealth).collect()
    }

    pub fn beliefs(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.belief.value()).collect()
    }

    /// Rescales wealth to sum exactly to one (up to rounding). Returns the
    /// absolute drift that was removed.
    pub fn renormalize(&mut self) -> f64 {
        let total = self.total_wealth();
        if total > 0.0 {
            for a in &mut self.agents {
                a.wealth /= total;
            }
        }
        (total - 1.0).abs()
    }
}

/// Neumaier-compensated sum of agent wealths.
fn total_wealth(agents: &[AgentState]) -> f64 {
    crate::numeric::compensated_sum(agents.iter().map(|a| a.wealth))
}

/// An agent's equilibrium position at a given price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub agent_id: usize,
    /// Signed share count; positive buys the event, negative bets against it.
    pub shares: f64,
    /// Dollars at risk.
    pub stake: f64,
}

impl Order {
    pub fn abstain(agent_id: usize) -> Self {
        Self {
            agent_id,
            shares: 0.0,
            stake: 0.0,
        }
    }
}

/// Full record of one market period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketRound {
    pub price: Probability,
    pub orders: Vec<Order>,
    pub outcome: Outcome,
    /// Total wealth entering the round.
    pub wealth_before: f64,
    /// Post-settlement wealth per agent, before renormalization.
    pub wealth_after: Vec<f64>,
}

impl MarketRound {
    /// Aggregate signed share demand.
    pub fn net_shares(&self) -> f64 {
        crate::numeric::compensated_sum(self.orders.iter().map(|o| o.shares))
    }

    /// Relative change in total wealth across settlement.
    pub fn conservation_drift(&self) -> f64 {
        let after = crate::numeric::compensated_sum(self.wealth_after.iter().copied());
        (after - self.wealth_before).abs() / self.wealth_before
    }
}
