use alloc::format;
use alloc::vec::Vec;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseRowMatRef, SymbolicSparseRowMatRef};

use super::krylov::{bicgstab, KrylovReport, Preconditioner};
use super::SparseOperator;
use crate::{Error, Result};

/// Sparse LU factorization with partial pivoting (backed by `faer`).
pub struct SparseLu {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    pub fn new(a: &SparseOperator) -> Result<Self> {
        let (n, m) = a.dims();
        if n != m {
            return Err(Error::Dimension { expected: n, got: m });
        }
        let symbolic = SymbolicSparseRowMatRef::new_checked(n, n, a.indptr(), None, a.indices());
        let mat = SparseRowMatRef::new(symbolic, a.values());
        let lu = mat.sp_lu().map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Self { n, lu })
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        assert_eq!(rhs.len(), self.n);
        let col = faer::MatMut::from_column_major_slice_mut(rhs, self.n, 1);
        self.lu.solve_in_place(col);
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

impl Preconditioner for SparseLu {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.solve_in_place(z);
    }
}

/// A factorization kept across solves with slowly varying matrices. Each
/// solve runs BiCGStab preconditioned by the cached factors and refactors
/// when that takes more than `refactor_after` iterations or fails.
pub struct FactorCache {
    lu: Option<SparseLu>,
    refactor_after: usize,
    factorizations: usize,
}

impl Default for FactorCache {
    fn default() -> Self {
        Self::new(8)
    }
}

impl FactorCache {
    pub fn new(refactor_after: usize) -> Self {
        Self { lu: None, refactor_after: refactor_after.max(1), factorizations: 0 }
    }

    /// Number of numeric factorizations so far.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    pub fn clear(&mut self) {
        self.lu = None;
    }

    /// Solves `a x = b` to `rel_tol`, starting from `x`.
    pub fn solve(
        &mut self,
        a: &SparseOperator,
        b: &[f64],
        x: &mut [f64],
        rel_tol: f64,
        max_iter: usize,
    ) -> Result<KrylovReport> {
        if let Some(lu) = &self.lu {
            if lu.n == b.len() {
                let mut trial = x.to_vec();
                if let Ok(r) = bicgstab(a, lu, b, &mut trial, rel_tol, self.refactor_after) {
                    x.copy_from_slice(&trial);
                    return Ok(r);
                }
            }
        }
        let lu = SparseLu::new(a)?;
        self.factorizations += 1;
        let r = bicgstab(a, &lu, b, x, rel_tol, max_iter);
        self.lu = Some(lu);
        r
    }
}
