//! Comparison of a wealth distribution with the Beta posterior it should
//! match when every bettor is full Kelly.

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::numeric::{compensated_sum, log_sum_exp};

/// Maximum deviation for a full-Kelly population.
pub const BETA_FIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub successes: u64,
    pub failures: u64,
    /// `Beta(s + 1, f + 1)` density at each belief, normalized to sum to one
    /// over the belief set.
    pub density_at_beliefs: Vec<f64>,
    /// `max_i |w_i - b_i| / max_j b_j`, with `w` the normalized wealths and
    /// `b` the normalized densities.
    pub deviation: f64,
}

/// Normalized `Beta(s + 1, f + 1)` density over a finite set of beliefs. The
/// normalizing constant cancels, so only `p^s (1 - p)^f` is evaluated, in
/// the log domain.
pub fn normalized_beta_density(beliefs: &[f64], successes: u64, failures: u64) -> Vec<f64> {
    let (s, f) = (successes as f64, failures as f64);
    let logs: Vec<f64> = beliefs
        .iter()
        .map(|&p| xlogy(s, p) + xlogy(f, 1.0 - p))
        .collect();
    let norm = log_sum_exp(&logs);
    logs.iter().map(|l| (l - norm).exp()).collect()
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

pub fn beta_posterior_fit(
    beliefs: &[f64],
    wealths: &[f64],
    successes: u64,
    failures: u64,
) -> Result<BetaFit> {
    if beliefs.len() != wealths.len() {
        return Err(MarketError::LengthMismatch {
            left: beliefs.len(),
            right: wealths.len(),
        });
    }
    if beliefs.is_empty() {
        return Err(MarketError::EmptyPopulation);
    }
    let density = normalized_beta_density(beliefs, successes, failures);
    let total = compensated_sum(wealths.iter().copied());
    let peak = density.iter().copied().fold(0.0, f64::max);
    let deviation = wealths
        .iter()
        .zip(&density)
        .map(|(w, b)| (w / total - b).abs())
        .fold(0.0, f64::max)
        / peak;
    Ok(BetaFit {
        successes,
        failures,
        density_at_beliefs: density,
        deviation,
    })
}
