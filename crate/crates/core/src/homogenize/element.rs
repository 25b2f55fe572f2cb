//! Trilinear hexahedron on the unit cube.

use nalgebra::{SMatrix, SVector};

pub type Matrix6 = SMatrix<f64, 6, 6>;
pub type ElementMatrix = SMatrix<f64, 24, 24>;

/// Local corner offsets, numbered by bits (x = 1, y = 2, z = 4).
pub fn corner_offset(c: usize) -> [usize; 3] {
    [c & 1, (c >> 1) & 1, (c >> 2) & 1]
}

/// Isotropic stiffness in Voigt order (11, 22, 33, 23, 13, 12) with engineering shears.
pub fn isotropic_stiffness(e: f64, nu: f64) -> Matrix6 {
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut c = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            c[(i, j)] = if i == j { lambda + 2.0 * mu } else { lambda };
        }
        c[(i + 3, i + 3)] = mu;
    }
    c
}

/// Strain-displacement matrix at a point of the unit cube.
fn strain_matrix(xi: [f64; 3]) -> SMatrix<f64, 6, 24> {
    let mut b = SMatrix::<f64, 6, 24>::zeros();
    for c in 0..8 {
        let o = corner_offset(c);
        let f = |a: usize| if o[a] == 1 { xi[a] } else { 1.0 - xi[a] };
        let df = |a: usize| if o[a] == 1 { 1.0 } else { -1.0 };
        let g = [df(0) * f(1) * f(2), f(0) * df(1) * f(2), f(0) * f(1) * df(2)];
        let col = 3 * c;
        b[(0, col)] = g[0];
        b[(1, col + 1)] = g[1];
        b[(2, col + 2)] = g[2];
        b[(3, col + 1)] = g[2];
        b[(3, col + 2)] = g[1];
        b[(4, col)] = g[2];
        b[(4, col + 2)] = g[0];
        b[(5, col)] = g[1];
        b[(5, col + 1)] = g[0];
    }
    b
}

/// Stiffness of a unit cube element with 2x2x2 Gauss quadrature.
pub fn element_stiffness(c: &Matrix6) -> ElementMatrix {
    let g = 0.5 / 3f64.sqrt();
    let pts = [0.5 - g, 0.5 + g];
    let mut k = ElementMatrix::zeros();
    for &x in &pts {
        for &y in &pts {
            for &z in &pts {
                let b = strain_matrix([x, y, z]);
                k += b.transpose() * c * b / 8.0;
            }
        }
    }
    k
}

/// Nodal displacements of a unit element under the macroscopic strain of Voigt case `case`.
pub fn affine_displacement(case: usize) -> SVector<f64, 24> {
    let mut eps = [[0.0; 3]; 3];
    match case {
        0..=2 => eps[case][case] = 1.0,
        3 => (eps[1][2], eps[2][1]) = (0.5, 0.5),
        4 => (eps[0][2], eps[2][0]) = (0.5, 0.5),
        _ => (eps[0][1], eps[1][0]) = (0.5, 0.5),
    }
    let mut u = SVector::<f64, 24>::zeros();
    for c in 0..8 {
        let o = corner_offset(c);
        for (a, row) in eps.iter().enumerate() {
            u[3 * c + a] = (0..3).map(|b| row[b] * o[b] as f64).sum();
        }
    }
    u
}
