//! Voxel grids, triangle meshes, OBJ files and orthographic renders of a structure.

mod mesh;
mod render;
mod voxel;

pub use mesh::{export_obj, extract_mesh, extract_mesh_field, import_obj, obj_string, parse_obj, weld, TriMesh, WELD_TOL};
pub use render::{render_view, render_views, RenderImage, View, BACKGROUND, DEFAULT_IMAGE_SIZE};
pub use voxel::{check_resolution, voxelize, voxelize_field, VoxelGrid, MAX_RESOLUTION, MIN_RESOLUTION};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizeError {
    #[error("resolution {0} is outside [2, 512]")]
    ResolutionRange(usize),
    #[error("the structure has no surface inside the unit cell")]
    EmptyMesh,
    #[error("i/o failure: {0}")]
    Io(String),
}

#[cfg(test)]
mod tests;
