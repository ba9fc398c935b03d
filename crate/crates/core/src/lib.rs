//! Prediction markets populated by Kelly and fractional-Kelly bettors.
//!
//! Bettors with log utility trade a single binary contract. At equilibrium
//! the price is the confidence-and-wealth weighted mean belief, settlement
//! moves wealth exactly as Bayes' rule moves posterior mass, and the market's
//! cumulative log loss is never more than `ln(1 / w_i)` worse than that of
//! any participant `i`. This crate provides the market operations, the loss
//! and frequency metrics used to study them, an online learner for the Kelly
//! fraction, and a seeded simulator with a replay audit.

pub mod agent;
pub mod audit;
pub mod beta;
pub mod error;
pub mod frequency;
pub mod kelly;
pub mod learner;
pub mod market;
pub mod metrics;
mod numeric;
pub mod probability;
pub mod rng;
pub mod sim;

pub use agent::{AgentState, MarketRound, Order, Population};
pub use audit::{audit, AuditReport, Check};
pub use beta::{beta_posterior_fit, normalized_beta_density, BetaFit};
pub use error::{MarketError, Result};
pub use frequency::{
    discounted_frequency, fit_discount_factor, gamma_grid, FrequencySeries, GammaFit,
};
pub use kelly::{demand_shares, effective_belief, expected_log_utility, kelly_fraction};
pub use learner::LambdaLearnerState;
pub use market::{clearing_price, settle};
pub use metrics::{log_loss, regret_bound_check, wealth_identity_check, LossLedger};
pub use probability::{Odds, Outcome, Probability};
pub use sim::{
    drive, run, run_batch, BeliefInit, Episode, LambdaInit, SimulationConfig, SimulationRecord,
};
