//! Benchmark task construction in a model-agnostic JSONL form, and the
//! metrics used to score predictions against it.

mod inverse;
mod metrics;
mod records;
mod reference;
mod tasks;

pub use inverse::{
    render_inverse_query, select_active_properties, select_targets, ScoreWeights, Target, TargetDescription,
    TargetProfile, ANISOTROPY_THRESHOLD, QUERY_PREFIX, RANDOM_FILL_PROBABILITY,
};
pub use metrics::{eval_inverse, eval_reconstruction, eval_understanding, value_tolerance, ReconstructionScore};
pub use records::{make_splits, read_jsonl, write_jsonl, SplitSizes, Splits, TaskRecord, TaskType};
pub use reference::{
    Descriptor, PartOfSpeech, PropertyGenerality, PropertyRanges, PropertyReference, RangeStats, ReferenceDictionary,
    TargetType, TargetValue,
};
pub use tasks::{
    build_inverse_tasks, build_reconstruction_tasks, build_understanding_tasks, derive_seed, ModelAssets,
    UNDERSTANDING_KEYS,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("need at least {needed} models for the requested splits, got {got}")]
    TooFewModels { needed: usize, got: usize },
    #[error("model {0} is missing rendered views")]
    MissingRenders(String),
    #[error("model {0} is missing simulated properties")]
    MissingProperties(String),
    #[error("model {0} is missing its program text")]
    MissingCode(String),
    #[error("view count must be between 1 and 4, got {0}")]
    ViewCount(usize),
    #[error("target count must be between 1 and 6, got {0}")]
    TargetCount(usize),
    #[error("both voxel grids are empty, so IoU is undefined")]
    BothEmpty,
    #[error("voxel grids have different resolutions ({0} and {1})")]
    ResolutionMismatch(usize, usize),
    #[error("prediction is missing property '{0}'")]
    MissingKey(String),
    #[error("property '{0}' has no reference entry")]
    UnknownProperty(String),
    #[error("i/o failure: {0}")]
    IoFailure(String),
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
}
