//! Metamaterial program toolchain: language front end, geometry kernel,
//! discretization, homogenization, validation, mutation and benchmark tooling.

pub mod assembly;
pub mod augment;
pub mod benchkit;
pub mod cp_core;
pub mod discretize;
pub mod frontend;
pub mod homogenize;
pub mod lifting;
pub mod metadb;
pub mod quality;

pub use assembly::{StructureIR, Tile};
pub use discretize::{TriMesh, View, VoxelGrid};
pub use frontend::{compile_program, Diagnostic, SourceProgram};
pub use homogenize::{BaseMaterial, PropertyVector, StiffnessTensor};
pub use quality::ValidationReport;

#[cfg(test)]
pub(crate) mod test_fixtures;
