//! Online learning of the Kelly fraction.
//!
//! An agent treats itself and the market as two experts and reweights them by
//! the likelihood each assigned to the realized outcome. The current Kelly
//! fraction is the weight share of the agent's own belief, so the agent's
//! effective belief `lambda * p + (1 - lambda) * p_m` is exactly the Bayes
//! mixture of the two experts and the log-loss regret bound applies to it
//! with a `ln 2` penalty for the 0.5/0.5 start.

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};
use crate::probability::{Outcome, Probability};

/// Rescale when the total weight leaves `[2^-RESCALE_EXP, 2^RESCALE_EXP]`.
const RESCALE_EXP: i32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaLearnerState {
    pub weight_self: f64,
    pub weight_market: f64,
    /// Natural log of the factor divided out by rescaling so far.
    #[serde(default)]
    pub log_scale: f64,
}

impl LambdaLearnerState {
    pub fn new(weight_self: f64, weight_market: f64) -> Result<Self> {
        let ok = |w: f64| w > 0.0 && w.is_finite();
        if !(ok(weight_self) && ok(weight_market)) {
            return Err(MarketError::InvalidLearnerWeights(
                weight_self,
                weight_market,
            ));
        }
        Ok(Self {
            weight_self,
            weight_market,
            log_scale: 0.0,
        })
    }

    /// Even split between the agent and the market.
    pub fn even() -> Self {
        Self {
            weight_self: 0.5,
            weight_market: 0.5,
            log_scale: 0.0,
        }
    }

    /// Starts at a given Kelly fraction, which must be strictly inside (0, 1).
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        Self::new(lambda, 1.0 - lambda)
    }

    pub fn current_lambda(&self) -> f64 {
        self.weight_self / (self.weight_self + self.weight_market)
    }

    /// Natural log of the total weight including any rescaling.
    pub fn log_total_weight(&self) -> f64 {
        (self.weight_self + self.weight_market).ln() + self.log_scale
    }

    /// One multiplicative step with likelihood payoffs.
    pub fn update(&self, p_self: Probability, p_market: Probability, outcome: Outcome) -> Self {
        let mut next = Self {
            weight_self: self.weight_self * p_self.likelihood(outcome),
            weight_market: self.weight_market * p_market.likelihood(outcome),
            log_scale: self.log_scale,
        };
        next.rescale();
        next
    }

    /// Multiplies both weights by a power of two, which is exact in binary
    /// floating point and so leaves `current_lambda` bit-identical.
    fn rescale(&mut self) {
        let total = self.weight_self + self.weight_market;
        let (_, exp) = frexp(total);
        if exp.abs() < RESCALE_EXP {
            return;
        }
        let factor = 2f64.powi(-exp);
        self.weight_self *= factor;
        self.weight_market *= factor;
        self.log_scale += f64::from(exp) * std::f64::consts::LN_2;
    }
}

impl Default for LambdaLearnerState {
    fn default() -> Self {
        Self::even()
    }
}

/// Binary exponent `e` with `x = m * 2^e`, `0.5 <= m < 1`, for positive normal `x`.
fn frexp(x: f64) -> (f64, i32) {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let exp = biased - 1022;
    let mantissa = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (mantissa, exp)
}
