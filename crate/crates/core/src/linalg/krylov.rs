use alloc::vec;
use alloc::vec::Vec;

use super::{axpy, dot, norm2, SparseOperator};
use crate::{Error, Result};

/// Action of an approximate inverse, `z = M^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// Diagonal (Jacobi) preconditioner; zero diagonal entries act as identity.
pub struct Jacobi(Vec<f64>);

impl Jacobi {
    pub fn new(a: &SparseOperator) -> Self {
        Jacobi(a.diagonal().into_iter().map(|d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect())
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.0) {
            *zi = ri * di;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrylovReport {
    pub iterations: usize,
    /// Final `|b - A x| / |b|` (zero when `b = 0`).
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// semi-definite `a` with a consistent right-hand side. Starts from `x`.
pub fn conjugate_gradient(
    a: &SparseOperator,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<KrylovReport> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovReport { iterations: 0, relative_residual: 0.0 });
    }
    let pre = Jacobi::new(a);
    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = norm2(&r) / bnorm;
    for it in 0..max_iter {
        if res <= rel_tol {
            return Ok(KrylovReport { iterations: it, relative_residual: res });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::Breakdown { solver: "conjugate gradient", iteration: it });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        res = norm2(&r) / bnorm;
    }
    if res <= rel_tol {
        return Ok(KrylovReport { iterations: max_iter, relative_residual: res });
    }
    Err(Error::NonConvergence { solver: "conjugate gradient", iterations: max_iter, residual: res })
}

/// Right-preconditioned BiCGStab for a general nonsingular `a`. Starts from `x`.
pub fn bicgstab<P: Preconditioner + ?Sized>(
    a: &SparseOperator,
    pre: &P,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<KrylovReport> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovReport { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = norm2(&r) / bnorm;
    if res <= rel_tol {
        return Ok(KrylovReport { iterations: 0, relative_residual: res });
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return Err(Error::Breakdown { solver: "BiCGStab", iteration: it });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        pre.apply(&p, &mut p_hat);
        a.mul_vec_into(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            return Err(Error::Breakdown { solver: "BiCGStab", iteration: it });
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) / bnorm <= rel_tol {
            axpy(alpha, &p_hat, x);
            r.copy_from_slice(&s);
            res = norm2(&r) / bnorm;
            return Ok(KrylovReport { iterations: it, relative_residual: res });
        }
        pre.apply(&s, &mut s_hat);
        a.mul_vec_into(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::Breakdown { solver: "BiCGStab", iteration: it });
        }
        omega = dot(&t, &s) / tt;
        axpy(alpha, &p_hat, x);
        axpy(omega, &s_hat, x);
        for i in 0..n {
            r[i] = s[i] - omega * t[i];
        }
        res = norm2(&r) / bnorm;
        if !res.is_finite() {
            return Err(Error::Breakdown { solver: "BiCGStab", iteration: it });
        }
        if res <= rel_tol {
            return Ok(KrylovReport { iterations: it, relative_residual: res });
        }
        if omega == 0.0 {
            return Err(Error::Breakdown { solver: "BiCGStab", iteration: it });
        }
    }
    Err(Error::NonConvergence { solver: "BiCGStab", iterations: max_iter, residual: res })
}
