//! Competitive-equilibrium clearing and settlement for one period.

use crate::agent::{MarketRound, Order, Population};
use crate::error::{MarketError, Result};
use crate::kelly::{demand_shares, effective_belief};
use crate::numeric::compensated_sum;
use crate::probability::{Outcome, Probability};

/// Maximum `|sum(shares)| / sum(wealth)` accepted as a clearing price.
pub const BALANCE_TOLERANCE: f64 = 1e-9;

/// Maximum relative change of total wealth across settlement.
pub const CONSERVATION_TOLERANCE: f64 = 1e-12;

/// Price at which aggregate Kelly demand is zero: the mean belief weighted by
/// `lambda_i * w_i`.
pub fn clearing_price(pop: &Population) -> Result<Probability> {
    let weight = compensated_sum(pop.agents().iter().map(|a| a.confidence_wealth()));
    if weight.is_nan() || weight <= 0.0 {
        return Err(MarketError::AllZeroConfidence);
    }
    let weighted = compensated_sum(
        pop.agents()
            .iter()
            .map(|a| a.confidence_wealth() * a.belief.value()),
    );
    // Rounding can push the ratio a hair outside the range of contributing
    // beliefs; pin it back so the price stays within them.
    let (lo, hi) = pop
        .agents()
        .iter()
        .filter(|a| a.confidence_wealth() > 0.0)
        .fold((1.0f64, 0.0f64), |(lo, hi), a| {
            (lo.min(a.belief.value()), hi.max(a.belief.value()))
        });
    Ok(Probability::clamped((weighted / weight).clamp(lo, hi)))
}

/// Every agent's order at price `p_m`.
pub fn orders_at(pop: &Population, p_m: Probability) -> Vec<Order> {
    pop.agents().iter().map(|a| demand_shares(a, p_m)).collect()
}

/// `|sum(shares)| / sum(wealth)` for the given orders.
pub fn balance_residual(orders: &[Order], total_wealth: f64) -> f64 {
    compensated_sum(orders.iter().map(|o| o.shares)).abs() / total_wealth
}

/// Settles the period. Each agent's wealth is multiplied by the likelihood
/// ratio of its effective belief to the price for the realized outcome,
/// which is the payoff of its Kelly order. Full-Kelly agents therefore end
/// with the Bayes posterior of wealth.
///
/// The returned population carries raw post-payoff wealths; callers that
/// iterate should [`Population::renormalize`].
pub fn settle(pop: &Population, p_m: Probability, outcome: Outcome) -> Result<Population> {
    let orders = orders_at(pop, p_m);
    check_balance(&orders, pop.total_wealth(), p_m)?;
    Ok(apply_payoffs(pop, p_m, outcome))
}

/// Clears, settles and records one period given its outcome.
pub fn play_round(pop: &Population, outcome: Outcome) -> Result<(MarketRound, Population)> {
    play_round_at(pop, clearing_price(pop)?, outcome)
}

/// [`play_round`] at a price already computed by [`clearing_price`].
pub fn play_round_at(
    pop: &Population,
    price: Probability,
    outcome: Outcome,
) -> Result<(MarketRound, Population)> {
    let orders = orders_at(pop, price);
    let wealth_before = pop.total_wealth();
    check_balance(&orders, wealth_before, price)?;
    let next = apply_payoffs(pop, price, outcome);
    let round = MarketRound {
        price,
        orders,
        outcome,
        wealth_before,
        wealth_after: next.wealths(),
    };
    Ok((round, next))
}

fn check_balance(orders: &[Order], total_wealth: f64, p_m: Probability) -> Result<()> {
    let residual = balance_residual(orders, total_wealth);
    if residual.is_nan() || residual > BALANCE_TOLERANCE {
        return Err(MarketError::PriceMismatch {
            price: p_m.value(),
            residual,
        });
    }
    Ok(())
}

/// Payoffs at `p_m` without the balance check. Wealth is conserved only when
/// `p_m` clears `pop`.
pub fn apply_payoffs(pop: &Population, p_m: Probability, outcome: Outcome) -> Population {
    let agents = pop
        .agents()
        .iter()
        .map(|a| {
            let mut next = a.clone();
            let belief = effective_belief(a.belief, p_m, a.lambda);
            next.wealth = a.wealth * belief.likelihood(outcome) / p_m.likelihood(outcome);
            next
        })
        .collect();
    Population::from_agents_unchecked(agents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::AgentState;

    fn p(x: f64) -> Probability {
        Probability::new(x).unwrap()
    }

    fn pop(spec: &[(f64, f64, f64)]) -> Population {
        Population::new(
            spec.iter()
                .enumerate()
                .map(|(i, &(w, b, l))| AgentState::new(i, p(b), w, l).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_agent_price_is_its_belief() {
        let pop = pop(&[(1.0, 0.7, 1.0)]);
        assert_eq!(clearing_price(&pop).unwrap().value(), 0.7);
    }

    #[test]
    fn symmetric_pair_clears_at_half() {
        let pop = pop(&[(0.5, 0.2, 1.0), (0.5, 0.8, 1.0)]);
        assert!((clearing_price(&pop).unwrap().value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fractional_price() {
        let pop = pop(&[(0.5, 0.2, 1.0), (0.5, 0.8, 0.25)]);
        assert!((clearing_price(&pop).unwrap().value() - 0.32).abs() < 1e-15);
    }

    #[test]
    fn no_confidence_no_market() {
        let pop = pop(&[(0.5, 0.2, 0.0), (0.5, 0.8, 0.0)]);
        assert_eq!(clearing_price(&pop), Err(MarketError::AllZeroConfidence));
    }

    #[test]
    fn settle_pair() {
        let pop = pop(&[(0.5, 0.2, 1.0), (0.5, 0.8, 1.0)]);
        let pm = clearing_price(&pop).unwrap();
        let yes = settle(&pop, pm, Outcome::Yes).unwrap().wealths();
        assert!((yes[0] - 0.2).abs() < 1e-15 && (yes[1] - 0.8).abs() < 1e-15);
        let no = settle(&pop, pm, Outcome::No).unwrap().wealths();
        assert!((no[0] - 0.8).abs() < 1e-15 && (no[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn settle_single_agent_is_noop() {
        let pop = pop(&[(1.0, 0.37, 1.0)]);
        let pm = clearing_price(&pop).unwrap();
        for y in [Outcome::Yes, Outcome::No] {
            assert_eq!(settle(&pop, pm, y).unwrap().wealths(), vec![1.0]);
        }
    }

    #[test]
    fn settle_rejects_wrong_price() {
        let pop = pop(&[(0.5, 0.2, 1.0), (0.5, 0.8, 1.0)]);
        assert!(matches!(
            settle(&pop, p(0.6), Outcome::Yes),
            Err(MarketError::PriceMismatch { .. })
        ));
    }

    #[test]
    fn zero_wealth_agents_stay() {
        let pop = pop(&[(0.0, 0.9, 1.0), (1.0, 0.4, 1.0)]);
        let pm = clearing_price(&pop).unwrap();
        assert_eq!(pm.value(), 0.4);
        let (round, next) = play_round(&pop, Outcome::Yes).unwrap();
        assert_eq!(round.orders[0], Order::abstain(0));
        assert_eq!(next.wealths(), vec![0.0, 1.0]);
    }

    #[test]
    fn fractional_agent_keeps_unbet_wealth() {
        // lambda = 0.25 agent at 0.8 against a full-Kelly agent at 0.2
        let pop = pop(&[(0.5, 0.2, 1.0), (0.5, 0.8, 0.25)]);
        let (round, next) = play_round(&pop, Outcome::Yes).unwrap();
        let pm = round.price.value();
        let eff = 0.25 * 0.8 + 0.75 * pm;
        assert!((next.wealths()[1] - 0.5 * eff / pm).abs() < 1e-15);
        assert!(round.conservation_drift() <= CONSERVATION_TOLERANCE);
    }
}
