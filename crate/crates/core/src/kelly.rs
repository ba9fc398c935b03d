//! Kelly bet sizing for a single binary contract priced at `p_m`.
//!
//! A share pays 1 if the event occurs and costs `p_m`. A bettor with belief
//! `p` above the price buys; below the price it bets against the event at
//! price `1 - p_m`. Fractional Kelly with fraction `lambda` is full Kelly
//! under the effective belief `lambda * p + (1 - lambda) * p_m`.

use crate::agent::{AgentState, Order};
use crate::error::{MarketError, Result};
use crate::probability::Probability;

/// Signed Kelly fraction of wealth. Positive stakes on the event at price
/// `p_m`, negative stakes against it at price `1 - p_m`.
pub fn kelly_fraction(p: Probability, p_m: Probability) -> f64 {
    let (p, pm) = (p.value(), p_m.value());
    if p > pm {
        (p - pm) / (1.0 - pm)
    } else if p < pm {
        -(pm - p) / pm
    } else {
        0.0
    }
}

/// Confidence-weighted belief `lambda * p + (1 - lambda) * p_m`.
pub fn effective_belief(p: Probability, p_m: Probability, lambda: f64) -> Probability {
    if lambda >= 1.0 {
        return p;
    }
    if lambda <= 0.0 {
        return p_m;
    }
    // p_m + lambda (p - p_m): same value, but exact when p == p_m
    Probability::clamped(p_m.value() + lambda * (p.value() - p_m.value()))
}

/// Log-optimal order for `agent` at price `p_m`.
pub fn demand_shares(agent: &AgentState, p_m: Probability) -> Order {
    let belief = effective_belief(agent.belief, p_m, agent.lambda);
    kelly_order(agent.id, belief, agent.wealth, p_m)
}

/// Full-Kelly order for an agent holding `belief` and `wealth`.
pub fn kelly_order(agent_id: usize, belief: Probability, wealth: f64, p_m: Probability) -> Order {
    let (p, pm) = (belief.value(), p_m.value());
    if wealth <= 0.0 || p == pm {
        return Order::abstain(agent_id);
    }
    let shares = (wealth / pm) * (p - pm) / (1.0 - pm);
    let stake = kelly_fraction(belief, p_m).abs() * wealth;
    Order {
        agent_id,
        shares,
        stake,
    }
}

/// Expected log wealth after holding `shares` bought at `p_m` with starting
/// wealth `wealth`, under belief `p`.
pub fn expected_log_utility(
    shares: f64,
    wealth: f64,
    p: Probability,
    p_m: Probability,
) -> Result<f64> {
    let pm = p_m.value();
    let if_yes = (1.0 - pm) * shares + wealth;
    let if_no = -pm * shares + wealth;
    if if_yes <= 0.0 || if_no <= 0.0 {
        return Err(MarketError::Insolvent);
    }
    Ok(p.value() * if_yes.ln() + p.complement() * if_no.ln())
}
