use alloc::vec;
use alloc::vec::Vec;

use super::{check_len, mass_matrix, stiffness_matrix};
use crate::linalg::{conjugate_gradient, KrylovReport, SparseOperator};
use crate::mesh::SurfaceMesh;
use crate::{Error, Result};

/// Relative residual target of every Poisson solve.
pub const POISSON_TOL: f64 = 1e-11;

/// Mean-zero inverse of the Laplace-Beltrami operator on one snapshot.
pub struct PoissonSolver {
    stiffness: SparseOperator,
    mass: SparseOperator,
    vertex_areas: Vec<f64>,
    area: f64,
}

impl PoissonSolver {
    pub fn new(mesh: &SurfaceMesh) -> Self {
        Self {
            stiffness: stiffness_matrix(mesh),
            mass: mass_matrix(mesh),
            vertex_areas: mesh.vertex_areas().to_vec(),
            area: mesh.surface_area(),
        }
    }

    pub fn stiffness(&self) -> &SparseOperator {
        &self.stiffness
    }

    pub fn mass(&self) -> &SparseOperator {
        &self.mass
    }

    /// Solves `K u = M rhs` with `int u = 0`. The right-hand side must be
    /// mean-zero up to `1e-10 * ||rhs||_L1`.
    pub fn solve(&self, rhs: &[f64]) -> Result<(Vec<f64>, KrylovReport)> {
        let n = self.vertex_areas.len();
        check_len(rhs.len(), n)?;
        let integral: f64 = self.vertex_areas.iter().zip(rhs).map(|(a, f)| a * f).sum();
        let l1: f64 = self.vertex_areas.iter().zip(rhs).map(|(a, f)| a * f.abs()).sum();
        if integral.abs() > 1e-10 * l1 {
            return Err(Error::IncompatibleRhs { integral, tolerance: 1e-10 * l1 });
        }
        self.solve_load(self.mass.mul_vec(rhs))
    }

    /// Solves `K u = b` with `int u = 0` for an assembled load whose entries
    /// sum to zero up to rounding.
    pub fn solve_load(&self, mut b: Vec<f64>) -> Result<(Vec<f64>, KrylovReport)> {
        let n = self.vertex_areas.len();
        check_len(b.len(), n)?;
        let l1: f64 = b.iter().map(|v| v.abs()).sum();
        let total: f64 = b.iter().sum();
        if total.abs() > 1e-10 * l1 {
            return Err(Error::IncompatibleRhs { integral: total, tolerance: 1e-10 * l1 });
        }
        // remove the rounding-level component outside range(K)
        let shift = total / n as f64;
        b.iter_mut().for_each(|v| *v -= shift);
        let mut u = vec![0.0; n];
        let max_iter = libm::ceil(20.0 * libm::sqrt(n as f64)) as usize;
        let report = conjugate_gradient(&self.stiffness, &b, &mut u, POISSON_TOL, max_iter)?;
        let mean = self.vertex_areas.iter().zip(&u).map(|(a, v)| a * v).sum::<f64>() / self.area;
        u.iter_mut().for_each(|v| *v -= mean);
        Ok((u, report))
    }

    /// `||f||_# = ||grad N f||` for mean-zero `f`.
    pub fn hsharp_norm(&self, f: &[f64]) -> Result<f64> {
        let (u, _) = self.solve(f)?;
        Ok(libm::sqrt(self.stiffness.bilinear(&u, &u).max(0.0)))
    }
}

/// One-shot mean-zero Poisson solve `-Delta u = rhs`.
pub fn solve_poisson_mean_zero(mesh: &SurfaceMesh, rhs: &[f64]) -> Result<Vec<f64>> {
    PoissonSolver::new(mesh).solve(rhs).map(|(u, _)| u)
}

pub fn hsharp_norm(mesh: &SurfaceMesh, f: &[f64]) -> Result<f64> {
    PoissonSolver::new(mesh).hsharp_norm(f)
}
