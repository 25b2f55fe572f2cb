//! Periodic homogenization of voxel grids and the derived scalar elastic properties.

mod element;
mod properties;
mod solver;

pub use element::{isotropic_stiffness, Matrix6};
pub use properties::{extract_properties, round_2sf, PropertyVector, MAX_CONDITION_NUMBER, PROPERTY_KEYS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretize::VoxelGrid;

/// Void voxels get this fraction of the base stiffness so the system stays definite.
pub const VOID_STIFFNESS_RATIO: f64 = 1e-9;
pub const CG_RELATIVE_TOLERANCE: f64 = 1e-6;
pub const CG_MAX_ITERATIONS: usize = 5000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomogenizeError {
    #[error("the voxel grid has no solid voxels")]
    EmptyGrid,
    #[error("the structure does not carry load: stiffness entry C{0}{0} is near zero")]
    SingularSystem(usize),
    #[error("conjugate gradients did not converge for load case {case} (relative residual {residual:.3e})")]
    SolverNoConvergence { case: usize, residual: f64 },
    #[error("the stiffness tensor is ill conditioned (condition number {0:.3e})")]
    IllConditioned(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseMaterial {
    pub e_base: f64,
    pub nu_base: f64,
    pub rho_base: f64,
}

impl Default for BaseMaterial {
    fn default() -> Self {
        BaseMaterial { e_base: 1.0, nu_base: 0.45, rho_base: 1.0 }
    }
}

impl BaseMaterial {
    pub fn stiffness(&self) -> StiffnessTensor {
        StiffnessTensor { c: isotropic_stiffness(self.e_base, self.nu_base) }
    }
}

/// Voigt-order (11, 22, 33, 23, 13, 12) stiffness with engineering shear strains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StiffnessTensor {
    pub c: Matrix6,
}

impl StiffnessTensor {
    pub fn compliance(&self) -> Option<Matrix6> {
        self.c.try_inverse()
    }

    pub fn scaled(&self, factor: f64) -> StiffnessTensor {
        StiffnessTensor { c: self.c * factor }
    }

    pub fn condition_number(&self) -> f64 {
        let s = self.c.singular_values();
        s.max() / s.min()
    }

    /// Rows of the matrix, for serialization and reports.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..6).map(|i| (0..6).map(|j| self.c[(i, j)]).collect()).collect()
    }
}

/// Effective stiffness of the periodic voxel structure under unit macroscopic strains.
pub fn homogenize(grid: &VoxelGrid, base: &BaseMaterial) -> Result<StiffnessTensor, HomogenizeError> {
    if grid.count() == 0 {
        return Err(HomogenizeError::EmptyGrid);
    }
    let tensor = effective_stiffness(grid, base)?;
    let floor = 10.0 * VOID_STIFFNESS_RATIO * base.e_base;
    if let Some(i) = (0..6).find(|&i| tensor.c[(i, i)] < floor) {
        return Err(HomogenizeError::SingularSystem(i + 1));
    }
    Ok(tensor)
}

/// Solver output without the load-bearing check, so compliant directions keep their tiny values.
pub fn effective_stiffness(grid: &VoxelGrid, base: &BaseMaterial) -> Result<StiffnessTensor, HomogenizeError> {
    if grid.count() == 0 {
        return Err(HomogenizeError::EmptyGrid);
    }
    let problem = solver::PeriodicProblem::new(grid, base);
    let fields = (0..6).into_par_iter().map(|case| problem.solve(case)).collect::<Result<Vec<_>, _>>()?;
    Ok(problem.effective_stiffness(&fields))
}
