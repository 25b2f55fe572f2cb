//! Shared inputs for the kernel benchmarks.

use std::collections::BTreeMap;

use metagen::frontend::{compile_program, examples};
use metagen::StructureIR;

/// Sphere of radius `r` centred in the cell; `r >= 0.5` spans the cell.
pub fn sphere_program(r: f64) -> String {
    format!(
        "from metagen import *

def make_structure(r={r:?}) -> Structure:
    v0 = vertex(cuboid.corners.BACK_TOP_RIGHT)
    balls = Spheres(skeleton([v0]), r)
    tile = Tile([balls], cuboid.embed(0.5, 0.5, 0.5, cornerAtAABBMin=cuboid.corners.FRONT_BOTTOM_LEFT))
    return Structure(tile, Identity())
"
    )
}

pub fn compile(text: &str) -> StructureIR {
    compile_program(text, &BTreeMap::new()).expect("benchmark program compiles")
}

pub fn schwarz_p() -> StructureIR {
    compile(examples::SCHWARZ_P)
}

pub fn pentamode() -> StructureIR {
    compile(examples::PENTAMODE)
}
