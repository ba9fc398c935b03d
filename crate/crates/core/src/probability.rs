//! Probabilities, odds and binary outcomes.

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};

/// Smallest representable belief; raw beliefs of 0 or 1 are clamped to
/// `[EPSILON, 1 - EPSILON]` so that no Kelly bettor stakes its whole wealth.
pub const EPSILON: f64 = 1e-9;

/// A probability strictly inside (0, 1), clamped to `[EPSILON, 1 - EPSILON]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    /// Accepts any value in `[0, 1]` and clamps it away from the boundary.
    pub fn new(raw: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&raw) {
            return Err(MarketError::InvalidProbability(raw));
        }
        Ok(Self::clamped(raw))
    }

    /// Market prices must be strictly inside (0, 1); the boundary is a
    /// degenerate market rather than a clampable belief.
    pub fn price(raw: f64) -> Result<Self> {
        if !(raw > 0.0 && raw < 1.0) {
            return Err(MarketError::DegeneratePrice(raw));
        }
        Ok(Self::clamped(raw))
    }

    /// Clamps without validation. NaN maps to one half.
    pub fn clamped(raw: f64) -> Self {
        if raw.is_nan() {
            return Self(0.5);
        }
        Self(raw.clamp(EPSILON, 1.0 - EPSILON))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    #[inline]
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }

    /// Probability assigned to `outcome`.
    #[inline]
    pub fn likelihood(self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Yes => self.0,
            Outcome::No => 1.0 - self.0,
        }
    }

    /// Net odds `b` of a bet priced at this probability: `p = 1 / (1 + b)`.
    pub fn to_odds(self) -> Odds {
        Odds((1.0 - self.0) / self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = MarketError;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Net payoff per unit staked.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Odds(f64);

impl Odds {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(MarketError::InvalidOdds(b));
        }
        Ok(Self(b))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Implied market probability `1 / (1 + b)`.
    pub fn to_probability(self) -> Probability {
        Probability::clamped(1.0 / (1.0 + self.0))
    }
}

/// Realized outcome of one binary event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Outcome {
    No,
    Yes,
}

impl Outcome {
    #[inline]
    pub fn is_yes(self) -> bool {
        matches!(self, Outcome::Yes)
    }

    #[inline]
    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

impl From<bool> for Outcome {
    fn from(b: bool) -> Self {
        if b {
            Outcome::Yes
        } else {
            Outcome::No
        }
    }
}

impl TryFrom<u8> for Outcome {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Outcome::No),
            1 => Ok(Outcome::Yes),
            other => Err(format!("outcome must be 0 or 1, got {other}")),
        }
    }
}

impl From<Outcome> for u8 {
    fn from(o: Outcome) -> u8 {
        o.as_u8()
    }
}
