//! Program augmentation: seeded type-preserving mutation, re-emission of a
//! structure as program text, and crossover prompt assembly.

mod emit;
mod hybrid;
mod mutate;

pub use emit::emit_program;
pub use hybrid::{build_hybrid_prompt, HYBRID_TEMPLATE};
pub use mutate::{
    lift_candidates, mutate, plan_mutation, MutationAxis, MutationConfig, MutationRecord, MutationTrace,
    MAX_THICKNESS,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AugmentError {
    #[error("mutation probability {name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("no mutation site was selected under the drawn gates (enabled axes: {enabled:?})")]
    NoEligibleSites { enabled: Vec<MutationAxis> },
    #[error("the mutated structure could not be rebuilt: {0}")]
    Rebuild(String),
}

#[cfg(test)]
mod tests;
