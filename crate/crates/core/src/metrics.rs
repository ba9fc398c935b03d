//! Log-loss accounting and the regret guarantees it supports.
//!
//! Every loss here uses the natural logarithm, so a full-Kelly agent's
//! final wealth is exactly `w_i(0) * exp(L - L_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::numeric::compensated_sum;
use crate::probability::{Outcome, Probability};

/// Slack below which the regret bound is considered violated.
pub const REGRET_TOLERANCE: f64 = 1e-9;

/// Relative tolerance for `final = initial * exp(L - L_i)`.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// `-ln` of the probability `p` assigned to `outcome`.
#[inline]
pub fn round_loss(p: Probability, outcome: Outcome) -> f64 {
    match outcome {
        Outcome::Yes => -p.value().ln(),
        Outcome::No => -p.complement().ln(),
    }
}

/// Cumulative log loss of a prediction sequence.
pub fn log_loss(predictions: &[Probability], outcomes: &[Outcome]) -> Result<f64> {
    if predictions.len() != outcomes.len() {
        return Err(MarketError::LengthMismatch {
            left: predictions.len(),
            right: outcomes.len(),
        });
    }
    Ok(compensated_sum(
        predictions
            .iter()
            .zip(outcomes)
            .map(|(&p, &y)| round_loss(p, y)),
    ))
}

/// Running log losses of the market price and of each participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossLedger {
    pub market_loss: f64,
    pub agent_losses: Vec<f64>,
    pub rounds: usize,
}

impl LossLedger {
    pub fn new(n_agents: usize) -> Self {
        Self {
            market_loss: 0.0,
            agent_losses: vec![0.0; n_agents],
            rounds: 0,
        }
    }

    /// Adds one round. `predictions` are the probabilities each agent traded
    /// on, which for fractional bettors is the effective belief.
    pub fn record(&mut self, price: Probability, predictions: &[Probability], outcome: Outcome) {
        debug_assert_eq!(predictions.len(), self.agent_losses.len());
        self.market_loss += round_loss(price, outcome);
        for (loss, &p) in self.agent_losses.iter_mut().zip(predictions) {
            *loss += round_loss(p, outcome);
        }
        self.rounds += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub market_loss: f64,
    /// `min_i (L_i + ln(1 / w_i))` over agents with positive starting wealth.
    pub bound: f64,
    pub best_agent: Option<usize>,
    /// `bound - market_loss`; nonnegative when the guarantee holds.
    pub slack: f64,
    pub holds: bool,
}

/// Compares the market's loss against the best participant's loss plus the
/// cost `ln(1 / w_i)` of its starting wealth.
pub fn regret_bound_check(ledger: &LossLedger, initial_wealths: &[f64]) -> RegretReport {
    let (best_agent, bound) = ledger
        .agent_losses
        .iter()
        .zip(initial_wealths)
        .enumerate()
        .filter(|(_, (_, &w))| w > 0.0)
        .map(|(i, (&loss, &w))| (i, loss - w.ln()))
        .fold((None, f64::INFINITY), |(bi, bv), (i, v)| {
            if v < bv {
                (Some(i), v)
            } else {
                (bi, bv)
            }
        });
    let slack = bound - ledger.market_loss;
    RegretReport {
        market_loss: ledger.market_loss,
        bound,
        best_agent,
        slack,
        holds: slack >= -REGRET_TOLERANCE,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Largest `|final / predicted - 1|` over agents whose predicted wealth
    /// is a normal floating-point number.
    pub max_relative_deviation: f64,
    pub worst_agent: Option<usize>,
    /// Agents whose predicted wealth underflows; these pass when the
    /// simulated wealth underflowed as well.
    pub underflowed: usize,
    pub holds: bool,
}

/// Checks `final_i = initial_i * exp(L - L_i)` for every agent.
pub fn wealth_identity_check(
    initial_wealths: &[f64],
    final_wealths: &[f64],
    ledger: &LossLedger,
) -> Result<IdentityReport> {
    if initial_wealths.len() != final_wealths.len() {
        return Err(MarketError::LengthMismatch {
            left: initial_wealths.len(),
            right: final_wealths.len(),
        });
    }
    if ledger.agent_losses.len() != final_wealths.len() {
        return Err(MarketError::LengthMismatch {
            left: ledger.agent_losses.len(),
            right: final_wealths.len(),
        });
    }
    // Values this far below 1 may have lost precision to subnormals.
    let floor = (f64::MIN_POSITIVE * 1e20).ln();
    let mut report = IdentityReport {
        max_relative_deviation: 0.0,
        worst_agent: None,
        underflowed: 0,
        holds: true,
    };
    for (i, ((&w0, &w1), &li)) in initial_wealths
        .iter()
        .zip(final_wealths)
        .zip(&ledger.agent_losses)
        .enumerate()
    {
        let dev = if w0 == 0.0 {
            if w1 == 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            let log_predicted = w0.ln() + ledger.market_loss - li;
            if log_predicted < floor {
                report.underflowed += 1;
                if w1 < (floor + 1.0).exp() {
                    0.0
                } else {
                    1.0
                }
            } else if w1 <= 0.0 {
                1.0
            } else {
                (w1.ln() - log_predicted).exp_m1().abs()
            }
        };
        if dev > report.max_relative_deviation || dev.is_nan() {
            report.max_relative_deviation = dev;
            report.worst_agent = Some(i);
        }
    }
    report.holds = report.max_relative_deviation <= IDENTITY_TOLERANCE;
    Ok(report)
}
