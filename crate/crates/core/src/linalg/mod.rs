//! Sparse matrices and the solvers the discretization needs.
//!
//! Krylov methods (preconditioned CG and BiCGStab) and the dense symmetric
//! eigensolver are implemented here; sparse LU factorization is delegated to
//! `faer`.

mod direct;
mod eigen;
mod krylov;
mod sparse;

pub use direct::{FactorCache, SparseLu};
pub use eigen::{generalized_lowest_eigenpairs, symmetric_eigen};
pub use krylov::{bicgstab, conjugate_gradient, KrylovReport, Preconditioner};
pub use sparse::{SparseOperator, TripletBuilder};

/// Euclidean inner product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
