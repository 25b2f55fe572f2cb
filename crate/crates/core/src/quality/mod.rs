//! Admission checks for database entries: the program compiles, its unit cell
//! tiles space into a connected block, and its simulated properties are physical.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::StructureIR;
use crate::discretize::{voxelize, VoxelGrid};
use crate::frontend::{compile_program, Diagnostic, SourceProgram};
use crate::homogenize::{extract_properties, homogenize, BaseMaterial, PropertyVector, StiffnessTensor};

/// Slack on the normalized Young's modulus bound.
pub const MAX_RELATIVE_MODULUS: f64 = 1.0 + 1e-3;
/// Relative tolerance for symmetry and positive semi-definiteness of C.
pub const TENSOR_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub compile_ms: f64,
    pub tilable_ms: f64,
    pub physical_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub compiled: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub tilable: bool,
    pub tilable_reason: Option<String>,
    pub physical: bool,
    pub physical_reason: Option<String>,
    pub overall: bool,
    pub timings: StageTimings,
}

/// Everything produced while validating, so callers can reuse the expensive parts.
#[derive(Clone, Debug)]
pub struct Validation {
    pub report: ValidationReport,
    pub structure: Option<StructureIR>,
    pub grid: Option<VoxelGrid>,
    pub tensor: Option<StiffnessTensor>,
    pub properties: Option<PropertyVector>,
}

pub fn check_compiles(program: &SourceProgram) -> (bool, Vec<Diagnostic>) {
    match compile_program(&program.raw_text, &BTreeMap::new()) {
        Ok(_) => (true, Vec::new()),
        Err(e) => (false, vec![e.to_diagnostic()]),
    }
}

/// Periodic boundary agreement plus a 6-connected component spanning a 3x3x3 tiling.
pub fn check_tilable(grid: &VoxelGrid) -> (bool, Option<String>) {
    let r = grid.resolution;
    if grid.count() == 0 {
        return (false, Some("the cell contains no solid".into()));
    }
    for axis in 0..3 {
        for a in 0..r {
            for b in 0..r {
                let (lo, hi) = (at(axis, 0, a, b), at(axis, r - 1, a, b));
                if grid.get(lo[0], lo[1], lo[2]) != grid.get(hi[0], hi[1], hi[2]) {
                    return (false, Some(format!("opposite faces along {} differ", ["x", "y", "z"][axis])));
                }
            }
        }
    }
    if spans_tiled_block(grid) {
        (true, None)
    } else {
        (false, Some("no connected component reaches all six faces of the tiled block".into()))
    }
}

/// Voxel coordinates with `along` on `axis` and `(a, b)` on the other two axes.
fn at(axis: usize, along: usize, a: usize, b: usize) -> [usize; 3] {
    match axis {
        0 => [along, a, b],
        1 => [a, along, b],
        _ => [a, b, along],
    }
}

/// Label base-cell components, then join copies of them across the 27 cells of
/// the block instead of flood filling the block itself.
fn spans_tiled_block(grid: &VoxelGrid) -> bool {
    let r = grid.resolution;
    let (labels, count) = label_components(grid);
    // touches[c][2*axis + side]
    let mut touches = vec![[false; 6]; count];
    for axis in 0..3 {
        for (side, along) in [(0, 0), (1, r - 1)] {
            for a in 0..r {
                for b in 0..r {
                    let p = at(axis, along, a, b);
                    if let Some(c) = labels[grid.index(p[0], p[1], p[2])] {
                        touches[c][2 * axis + side] = true;
                    }
                }
            }
        }
    }
    let mut links: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 3];
    for (axis, out) in links.iter_mut().enumerate() {
        for a in 0..r {
            for b in 0..r {
                let hi = at(axis, r - 1, a, b);
                let lo = at(axis, 0, a, b);
                if let (Some(x), Some(y)) = (labels[grid.index(hi[0], hi[1], hi[2])], labels[grid.index(lo[0], lo[1], lo[2])]) {
                    out.push((x, y));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }
    let node = |cell: [usize; 3], c: usize| ((cell[2] * 3 + cell[1]) * 3 + cell[0]) * count + c;
    let mut sets = DisjointSets::new(27 * count);
    for cz in 0..3 {
        for cy in 0..3 {
            for cx in 0..3 {
                let cell = [cx, cy, cz];
                for (axis, pairs) in links.iter().enumerate() {
                    if cell[axis] == 2 {
                        continue;
                    }
                    let mut next = cell;
                    next[axis] += 1;
                    for &(x, y) in pairs {
                        sets.union(node(cell, x), node(next, y));
                    }
                }
            }
        }
    }
    let mut reach: BTreeMap<usize, [bool; 6]> = BTreeMap::new();
    for cz in 0..3 {
        for cy in 0..3 {
            for cx in 0..3 {
                let cell = [cx, cy, cz];
                for (c, t) in touches.iter().enumerate() {
                    let entry = reach.entry(sets.find(node(cell, c))).or_default();
                    for axis in 0..3 {
                        entry[2 * axis] |= cell[axis] == 0 && t[2 * axis];
                        entry[2 * axis + 1] |= cell[axis] == 2 && t[2 * axis + 1];
                    }
                }
            }
        }
    }
    reach.values().any(|faces| faces.iter().all(|&f| f))
}

fn label_components(grid: &VoxelGrid) -> (Vec<Option<usize>>, usize) {
    let r = grid.resolution;
    let mut labels = vec![None; grid.occupancy.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..labels.len() {
        if !grid.occupancy[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(count);
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (i, j, k) = (idx % r, (idx / r) % r, idx / (r * r));
            let mut visit = |ni: usize, nj: usize, nk: usize| {
                let n = grid.index(ni, nj, nk);
                if grid.occupancy[n] && labels[n].is_none() {
                    labels[n] = Some(count);
                    stack.push(n);
                }
            };
            if i > 0 {
                visit(i - 1, j, k);
            }
            if i + 1 < r {
                visit(i + 1, j, k);
            }
            if j > 0 {
                visit(i, j - 1, k);
            }
            if j + 1 < r {
                visit(i, j + 1, k);
            }
            if k > 0 {
                visit(i, j, k - 1);
            }
            if k + 1 < r {
                visit(i, j, k + 1);
            }
        }
        count += 1;
    }
    (labels, count)
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub fn check_physical(props: &PropertyVector, tensor: &StiffnessTensor) -> (bool, Option<String>) {
    if let Some((key, _)) = props.entries().into_iter().find(|(_, v)| !v.is_finite()) {
        return (false, Some(format!("non-finite property {key}")));
    }
    if tensor.c.iter().any(|v| !v.is_finite()) {
        return (false, Some("non-finite stiffness entry".into()));
    }
    if props.e > MAX_RELATIVE_MODULUS {
        return (false, Some("E>1".into()));
    }
    if !(props.v > 0.0 && props.v <= 1.0) {
        return (false, Some(format!("V={} outside (0, 1]", props.v)));
    }
    let scale = tensor.c.amax().max(f64::MIN_POSITIVE);
    let asym = (tensor.c - tensor.c.transpose()).amax();
    if asym > TENSOR_TOLERANCE * scale {
        return (false, Some("stiffness tensor is not symmetric".into()));
    }
    let sym = (tensor.c + tensor.c.transpose()) * 0.5;
    let min_eig = sym.symmetric_eigenvalues().min();
    if min_eig < -TENSOR_TOLERANCE * scale {
        return (false, Some(format!("stiffness tensor is not positive semi-definite (eigenvalue {min_eig:.3e})")));
    }
    (true, None)
}

/// Run the three checks in order; a failed stage skips the later ones.
pub fn validate_model(program: &SourceProgram, resolution: usize) -> ValidationReport {
    validate_model_detailed(program, resolution, &BaseMaterial::default()).report
}

pub fn validate_model_detailed(program: &SourceProgram, resolution: usize, base: &BaseMaterial) -> Validation {
    let mut out = Validation { report: ValidationReport::default(), structure: None, grid: None, tensor: None, properties: None };
    let clock = Instant::now();
    let ir = compile_program(&program.raw_text, &BTreeMap::new());
    out.report.timings.compile_ms = ms(clock);
    let ir = match ir {
        Ok(ir) => ir,
        Err(e) => {
            out.report.diagnostics.push(e.to_diagnostic());
            return out;
        }
    };
    out.report.compiled = true;

    let clock = Instant::now();
    let grid = match voxelize(&ir, resolution) {
        Ok(g) => g,
        Err(e) => {
            out.report.tilable_reason = Some(e.to_string());
            out.structure = Some(ir);
            return out;
        }
    };
    let (tilable, reason) = check_tilable(&grid);
    out.report.timings.tilable_ms = ms(clock);
    out.report.tilable = tilable;
    out.report.tilable_reason = reason;
    out.structure = Some(ir);
    if !tilable {
        out.grid = Some(grid);
        return out;
    }

    let clock = Instant::now();
    let simulated = homogenize(&grid, base)
        .and_then(|tensor| extract_properties(&tensor, grid.volume_fraction()).map(|p| (tensor, p)));
    match simulated {
        Ok((tensor, props)) => {
            let (physical, reason) = check_physical(&props, &tensor);
            out.report.physical = physical;
            out.report.physical_reason = reason;
            out.tensor = Some(tensor);
            out.properties = Some(props);
        }
        Err(e) => out.report.physical_reason = Some(e.to_string()),
    }
    out.report.timings.physical_ms = ms(clock);
    out.grid = Some(grid);
    out.report.overall = out.report.compiled && out.report.tilable && out.report.physical;
    out
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests;
