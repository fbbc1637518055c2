//! Per-school probability arithmetic and correlation significance testing.

mod correlation;
mod probability;
pub mod special;

pub use correlation::{
    correlation_table, p_value_two_tailed, pearson, state_correlation, CorrelationResult, Factor,
    FactorCorrelation, FactorObservation,
};
pub use probability::{lifetime_exposure, per_school_probability, OneInN, ProbabilityResult};
