//! Matrix-free periodic voxel finite elements solved by Jacobi-preconditioned CG.

use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;

use super::element::{affine_displacement, corner_offset, element_stiffness, isotropic_stiffness, ElementMatrix, Matrix6};
use super::{BaseMaterial, HomogenizeError, StiffnessTensor, CG_MAX_ITERATIONS, CG_RELATIVE_TOLERANCE, VOID_STIFFNESS_RATIO};
use crate::discretize::VoxelGrid;

type Vec24 = SVector<f64, 24>;

/// Fixed chunk length for reductions so sums never depend on the thread count.
const REDUCE_CHUNK: usize = 4096;

/// Assembled loads below this fraction of the unassembled element loads are treated as zero.
const ZERO_LOAD_RATIO: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(REDUCE_CHUNK)
        .zip(b.par_chunks(REDUCE_CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    partial.iter().sum()
}

pub(super) struct PeriodicProblem {
    r: usize,
    ke: ElementMatrix,
    /// Stiffness multiplier per element (1 for solid, the void ratio otherwise).
    scale: Vec<f64>,
    diag: Vec<f64>,
}

impl PeriodicProblem {
    pub(super) fn new(grid: &VoxelGrid, base: &BaseMaterial) -> Self {
        let r = grid.resolution;
        let ke = element_stiffness(&isotropic_stiffness(base.e_base, base.nu_base));
        let scale: Vec<f64> = grid.occupancy.iter().map(|&s| if s { 1.0 } else { VOID_STIFFNESS_RATIO }).collect();
        let mut p = PeriodicProblem { r, ke, scale, diag: Vec::new() };
        let mut diag = vec![0.0; 3 * r * r * r];
        diag.par_chunks_mut(3).enumerate().for_each(|(n, d)| {
            for (c, e) in p.incident_elements(n) {
                for a in 0..3 {
                    d[a] += p.scale[e] * p.ke[(3 * c + a, 3 * c + a)];
                }
            }
        });
        p.diag = diag;
        p
    }

    fn dofs(&self) -> usize {
        3 * self.r.pow(3)
    }

    fn node(&self, i: usize, j: usize, k: usize) -> usize {
        let r = self.r;
        ((k % r) * r + (j % r)) * r + (i % r)
    }

    fn element_nodes(&self, e: usize) -> [usize; 8] {
        let r = self.r;
        let (i, j, k) = (e % r, (e / r) % r, e / (r * r));
        std::array::from_fn(|c| {
            let o = corner_offset(c);
            self.node(i + o[0], j + o[1], k + o[2])
        })
    }

    /// The 8 elements around a node, with the node's local corner in each.
    fn incident_elements(&self, n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = self.r;
        let (i, j, k) = (n % r, (n / r) % r, n / (r * r));
        (0..8).map(move |c| {
            let o = corner_offset(c);
            let e = self.node(i + r - o[0], j + r - o[1], k + r - o[2]);
            (c, e)
        })
    }

    fn gather(&self, u: &[f64], e: usize) -> Vec24 {
        let nodes = self.element_nodes(e);
        Vec24::from_fn(|row, _| u[3 * nodes[row / 3] + row % 3])
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let forces: Vec<Vec24> =
            (0..self.r.pow(3)).into_par_iter().map(|e| self.ke * self.gather(u, e) * self.scale[e]).collect();
        out.par_chunks_mut(3).enumerate().for_each(|(n, y)| {
            y.fill(0.0);
            for (c, e) in self.incident_elements(n) {
                for a in 0..3 {
                    y[a] += forces[e][3 * c + a];
                }
            }
        });
    }

    /// Assembled right-hand side `-K u0` for a unit macroscopic strain.
    fn load(&self, case: usize) -> Vec<f64> {
        let f0 = -(self.ke * affine_displacement(case));
        let mut b = vec![0.0; self.dofs()];
        b.par_chunks_mut(3).enumerate().for_each(|(n, y)| {
            for (c, e) in self.incident_elements(n) {
                for a in 0..3 {
                    y[a] += self.scale[e] * f0[3 * c + a];
                }
            }
        });
        b
    }

    /// Removes the rigid translation (mean displacement per component).
    fn project(v: &mut [f64]) {
        let n = v.len() / 3;
        for a in 0..3 {
            let mean = v.iter().skip(a).step_by(3).sum::<f64>() / n as f64;
            v.iter_mut().skip(a).step_by(3).for_each(|x| *x -= mean);
        }
    }

    /// Periodic fluctuation field for one load case.
    pub(super) fn solve(&self, case: usize) -> Result<Vec<f64>, HomogenizeError> {
        let mut b = self.load(case);
        Self::project(&mut b);
        let n = self.dofs();
        let mut u = vec![0.0; n];
        let b_norm = dot(&b, &b).sqrt();
        // Loads that cancel to rounding level mean the affine field is already in equilibrium.
        let element_load = (self.ke * affine_displacement(case)).norm();
        let load_scale = element_load * self.scale.iter().map(|s| s * s).sum::<f64>().sqrt();
        if b_norm <= ZERO_LOAD_RATIO * load_scale {
            return Ok(u);
        }
        let mut r = b;
        let mut z: Vec<f64> = r.par_iter().zip(&self.diag).map(|(x, d)| x / d).collect();
        Self::project(&mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut q = vec![0.0; n];
        for _ in 0..CG_MAX_ITERATIONS {
            self.apply(&p, &mut q);
            let alpha = rz / dot(&p, &q);
            u.par_iter_mut().zip(&p).for_each(|(x, d)| *x += alpha * d);
            r.par_iter_mut().zip(&q).for_each(|(x, d)| *x -= alpha * d);
            if dot(&r, &r).sqrt() <= CG_RELATIVE_TOLERANCE * b_norm {
                return Ok(u);
            }
            z.par_iter_mut().zip(&r).zip(&self.diag).for_each(|((zi, ri), d)| *zi = ri / d);
            Self::project(&mut z);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
        let residual = dot(&r, &r).sqrt() / b_norm;
        Err(HomogenizeError::SolverNoConvergence { case, residual })
    }

    /// Average of the mutual energies of the corrected strain fields.
    pub(super) fn effective_stiffness(&self, fields: &[Vec<f64>]) -> StiffnessTensor {
        let u0: Vec<Vec24> = (0..6).map(affine_displacement).collect();
        let r = self.r;
        let slabs: Vec<Matrix6> = (0..r)
            .into_par_iter()
            .map(|k| {
                let mut acc = Matrix6::zeros();
                for e in k * r * r..(k + 1) * r * r {
                    let x = SMatrix::<f64, 24, 6>::from_fn(|row, case| u0[case][row])
                        + SMatrix::<f64, 24, 6>::from_columns(
                            &(0..6).map(|case| self.gather(&fields[case], e)).collect::<Vec<_>>(),
                        );
                    acc += x.transpose() * self.ke * x * self.scale[e];
                }
                acc
            })
            .collect();
        let mut c = slabs.iter().fold(Matrix6::zeros(), |a, m| a + m) / r.pow(3) as f64;
        c = (c + c.transpose()) * 0.5;
        StiffnessTensor { c }
    }
}
