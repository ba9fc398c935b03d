//! Observed and geometrically discounted outcome frequencies, and fitting
//! the discount factor that best explains a price series.

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::probability::Outcome;

/// Rounds dropped from the start of a price series before fitting.
pub const DEFAULT_BURN_IN: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySeries {
    /// Running fraction of successes after each prefix.
    pub observed: Vec<f64>,
    /// Discounted frequency `d_n` after each prefix.
    pub discounted: Vec<f64>,
    pub gamma: f64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(MarketError::InvalidGamma(gamma));
    }
    Ok(())
}

/// `d_n = sum_t gamma^(n-t) 1[y_t] / sum_t gamma^(n-t)` for each `n >= 1`.
pub fn discounted_frequency(outcomes: &[Outcome], gamma: f64) -> Result<FrequencySeries> {
    check_gamma(gamma)?;
    if outcomes.is_empty() {
        return Err(MarketError::EmptySequence);
    }
    let mut observed = Vec::with_capacity(outcomes.len());
    let mut discounted = Vec::with_capacity(outcomes.len());
    let (mut successes, mut num, mut den) = (0u64, 0.0f64, 0.0f64);
    for (n, y) in outcomes.iter().enumerate() {
        let hit = f64::from(y.as_u8());
        successes += u64::from(y.as_u8());
        num = gamma * num + hit;
        den = gamma * den + 1.0;
        observed.push(successes as f64 / (n + 1) as f64);
        discounted.push(num / den);
    }
    Ok(FrequencySeries {
        observed,
        discounted,
        gamma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub best_gamma: f64,
    pub best_rmse: f64,
    /// `(gamma, rmse)` for every grid point, in grid order.
    pub curve: Vec<(f64, f64)>,
}

/// Root-mean-square error between `prices[n]` and the discounted frequency
/// of `outcomes[..n]`, over `n >= max(burn_in, 1)`.
///
/// `prices[n]` is the price quoted for outcome `n`, so it is compared with
/// the frequency of everything observed before it.
pub fn discount_rmse(
    prices: &[f64],
    outcomes: &[Outcome],
    gamma: f64,
    burn_in: usize,
) -> Result<f64> {
    if prices.len() != outcomes.len() {
        return Err(MarketError::LengthMismatch {
            left: prices.len(),
            right: outcomes.len(),
        });
    }
    let start = burn_in.max(1);
    if start >= prices.len() {
        return Err(MarketError::InsufficientData {
            burn_in,
            len: prices.len(),
        });
    }
    let freq = discounted_frequency(&outcomes[..prices.len() - 1], gamma)?;
    let sq: f64 = (start..prices.len())
        .map(|n| (prices[n] - freq.discounted[n - 1]).powi(2))
        .sum();
    Ok((sq / (prices.len() - start) as f64).sqrt())
}

/// Grid search for the discount factor minimizing [`discount_rmse`]. Ties go
/// to the larger discount factor.
pub fn fit_discount_factor(
    prices: &[f64],
    outcomes: &[Outcome],
    grid: &[f64],
    burn_in: usize,
) -> Result<GammaFit> {
    if grid.is_empty() {
        return Err(MarketError::EmptyGrid);
    }
    let mut curve = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &gamma in grid {
        let rmse = discount_rmse(prices, outcomes, gamma, burn_in)?;
        curve.push((gamma, rmse));
        best = match best {
            Some((bg, br)) if br < rmse || (br == rmse && bg > gamma) => Some((bg, br)),
            _ => Some((gamma, rmse)),
        };
    }
    let (best_gamma, best_rmse) = best.expect("grid is nonempty");
    Ok(GammaFit {
        best_gamma,
        best_rmse,
        curve,
    })
}

/// Evenly spaced grid `lo, lo + step, ..., <= hi`, each point rounded to
/// twelve decimals so that e.g. `0.9` is the literal `0.9`.
pub fn gamma_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    check_gamma(lo)?;
    check_gamma(hi)?;
    if step.is_nan() || step <= 0.0 || lo > hi {
        return Err(MarketError::EmptyGrid);
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12)
        .filter(|g| *g > 0.0 && *g <= 1.0)
        .collect())
}
