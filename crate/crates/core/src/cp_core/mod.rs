//! Convex polytopes, CP-relative vertices, paths and skeletons.

mod polytope;
mod skeleton;

pub use polytope::{
    levenshtein, resolve_entity, EntityCategory, EntityRef, PolytopeKind, Vec3, MAX_CORNERS,
};
pub use skeleton::{
    build_skeleton, check_lift_compat, make_path, make_vertex, CornerWeights, Incidence, LiftKind,
    LoopStep, PathSpec, SkeletonItem, SkeletonSpec, Topology, VertexSpec, IDENTITY_TOL,
};
pub(crate) use skeleton::shared_faces;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CpError {
    #[error("unknown {category} entity '{name}' on {polytope}; did you mean {}?", suggestions.join(", "))]
    UnknownEntity {
        polytope: String,
        category: String,
        name: String,
        suggestions: Vec<String>,
    },
    #[error("unknown entity category '{0}'")]
    UnknownCategory(String),
    #[error("{0} are not implemented")]
    NotImplemented(String),
    #[error("t must contain exactly {expected} value(s) for this entity, got {got}")]
    InterpolantArity { expected: usize, got: usize },
    #[error("interpolation parameter {0} is outside [0, 1]")]
    InterpolantRange(f64),
    #[error("barycentric parameters sum to {0} > 1 on a triangular face")]
    BarycentricOutOfSimplex(f64),
    #[error("path must contain at least 2 vertices")]
    TooShort,
    #[error("path is not simple: {0}")]
    NotSimple(String),
    #[error("all vertices must belong to the same convex polytope")]
    MixedPolytopes,
    #[error("skeleton items must be all vertices or all paths")]
    MixedDimensions,
    #[error("skeleton is empty")]
    Empty,
    #[error("incompatible lifting procedure {kind}: {rule}")]
    IncompatibleLift { kind: String, rule: String },
}
