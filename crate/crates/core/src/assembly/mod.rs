//! Embedding CPs in the unit cell, expanding patterns into isometries and
//! composing tiles into CSG structures with a point-evaluable field.

mod embedding;
mod pattern;
mod structure;

pub use embedding::{embed_cuboid, embed_simplex, embed_via_minmax, reciprocal_power, Embedding, MAX_LEVEL};
pub use pattern::{
    expand_pattern, fold_for, CustomKind, CustomOp, Fold, Isometry, PatternOp, TransformSet, CELL_TOL,
};
pub use structure::{structure_field, transpile_report, CsgOp, Leaf, StructureField, StructureIR, Tile};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("side length {0} is not 1/2^k for an integer k in [0, 6]")]
    NotPowerOfTwoReciprocal(f64),
    #[error("{0} is not a cuboid corner")]
    UnknownCorner(String),
    #[error("box minimum must be strictly below its maximum on every axis")]
    InvertedBox,
    #[error("incompatible pattern: {0}")]
    IncompatiblePattern(String),
    #[error("custom patterns are only implemented for the cuboid, not {0}")]
    UnsupportedCustomPolytope(String),
    #[error("tile mismatch: {0}")]
    TileMismatch(String),
}

#[cfg(test)]
mod tests;
