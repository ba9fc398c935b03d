use thiserror::Error;

/// Errors raised by market, metrics, learner and simulation operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("degenerate price {0}: prices must lie strictly inside (0, 1)")]
    DegeneratePrice(f64),

    #[error("odds must be positive and finite, got {0}")]
    InvalidOdds(f64),

    #[error("agent {id}: wealth {wealth} must be finite and nonnegative")]
    InvalidWealth { id: usize, wealth: f64 },

    #[error("agent {id}: kelly fraction {lambda} is outside [0, 1]")]
    InvalidLambda { id: usize, lambda: f64 },

    #[error("population is empty")]
    EmptyPopulation,

    #[error("population wealth sums to {0}, expected 1")]
    UnnormalizedWealth(f64),

    #[error("no market: confidence-weighted wealth sums to zero")]
    AllZeroConfidence,

    #[error("price {price} does not clear the market (aggregate demand {residual})")]
    PriceMismatch { price: f64, residual: f64 },

    #[error("position is insolvent in at least one outcome")]
    Insolvent,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty outcome sequence")]
    EmptySequence,

    #[error("discount factor {0} is outside (0, 1]")]
    InvalidGamma(f64),

    #[error("empty discount grid")]
    EmptyGrid,

    #[error("no rounds left after dropping {burn_in} burn-in rounds of {len}")]
    InsufficientData { burn_in: usize, len: usize },

    #[error("learner weights must be positive and finite, got ({0}, {1})")]
    InvalidLearnerWeights(f64, f64),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, MarketError>;
