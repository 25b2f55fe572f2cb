use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DiscretizeError;
use crate::assembly::{StructureField, StructureIR};
use crate::cp_core::Vec3;

pub const MIN_RESOLUTION: usize = 2;
pub const MAX_RESOLUTION: usize = 512;

pub fn check_resolution(r: usize) -> Result<(), DiscretizeError> {
    if (MIN_RESOLUTION..=MAX_RESOLUTION).contains(&r) {
        Ok(())
    } else {
        Err(DiscretizeError::ResolutionRange(r))
    }
}

/// Occupancy of the unit cell on an `R^3` grid; x varies fastest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoxelGrid {
    pub resolution: usize,
    pub occupancy: Vec<bool>,
}

impl VoxelGrid {
    pub fn new(resolution: usize, occupancy: Vec<bool>) -> Self {
        assert_eq!(occupancy.len(), resolution.pow(3), "occupancy length must be R^3");
        VoxelGrid { resolution, occupancy }
    }

    pub fn from_fn(resolution: usize, f: impl Fn(usize, usize, usize) -> bool) -> Self {
        let r = resolution;
        let mut occ = Vec::with_capacity(r * r * r);
        for k in 0..r {
            for j in 0..r {
                for i in 0..r {
                    occ.push(f(i, j, k));
                }
            }
        }
        VoxelGrid { resolution, occupancy: occ }
    }

    pub fn empty(resolution: usize) -> Self {
        VoxelGrid { resolution, occupancy: vec![false; resolution.pow(3)] }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.resolution + j) * self.resolution + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.occupancy[self.index(i, j, k)]
    }

    /// Periodic lookup.
    pub fn get_wrapped(&self, i: isize, j: isize, k: isize) -> bool {
        let r = self.resolution as isize;
        self.get(i.rem_euclid(r) as usize, j.rem_euclid(r) as usize, k.rem_euclid(r) as usize)
    }

    pub fn count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    pub fn volume_fraction(&self) -> f64 {
        self.count() as f64 / self.occupancy.len() as f64
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) / self.resolution as f64
    }

    /// Grid with axes permuted: new axis `a` reads old axis `perm[a]`.
    pub fn permute_axes(&self, perm: [usize; 3]) -> VoxelGrid {
        VoxelGrid::from_fn(self.resolution, |i, j, k| {
            let new = [i, j, k];
            let mut old = [0; 3];
            for a in 0..3 {
                old[perm[a]] = new[a];
            }
            self.get(old[0], old[1], old[2])
        })
    }

    /// Periodic translation by whole voxels.
    pub fn shift(&self, d: [isize; 3]) -> VoxelGrid {
        VoxelGrid::from_fn(self.resolution, |i, j, k| {
            self.get_wrapped(i as isize - d[0], j as isize - d[1], k as isize - d[2])
        })
    }
}

/// Sample a compiled field at voxel centers, `supersample^3` points per voxel
/// (a voxel is solid when most samples are).
pub fn voxelize_field(field: &StructureField, r: usize, supersample: usize) -> Result<VoxelGrid, DiscretizeError> {
    check_resolution(r)?;
    let s = supersample.max(1);
    let mut occ = vec![false; r * r * r];
    occ.par_chunks_mut(r * r).enumerate().for_each(|(k, slab)| {
        for j in 0..r {
            for i in 0..r {
                let mut inside = 0;
                for a in 0..s {
                    for b in 0..s {
                        for c in 0..s {
                            let off = |n: usize, q: usize| (n as f64 + (q as f64 + 0.5) / s as f64) / r as f64;
                            let p = Vec3::new(off(i, a), off(j, b), off(k, c));
                            if field.eval(&p) < 0.0 {
                                inside += 1;
                            }
                        }
                    }
                }
                slab[j * r + i] = 2 * inside > s * s * s;
            }
        }
    });
    Ok(VoxelGrid { resolution: r, occupancy: occ })
}

/// Center-sampled occupancy of a structure.
pub fn voxelize(ir: &StructureIR, r: usize) -> Result<VoxelGrid, DiscretizeError> {
    check_resolution(r)?;
    voxelize_field(&ir.compile(), r, 1)
}
