use alloc::vec;
use alloc::vec::Vec;

use super::{SparseLu, SparseOperator};
use crate::{Error, Result};

/// Eigen-decomposition of a dense symmetric matrix (row-major, `n x n`) by
/// cyclic Jacobi rotations. Returns eigenvalues in ascending order and the
/// matching eigenvectors as columns of a row-major `n x n` matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        let scale: f64 = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum::<f64>() + off;
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let vals = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new] = v[k * n + old];
        }
    }
    (vals, vecs)
}

fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = libm::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Lowest `count` eigenpairs of the symmetric pencil `K x = lambda M x`
/// (`M` positive definite, `K` positive semi-definite) by shifted subspace
/// iteration with Rayleigh-Ritz projection. Eigenvectors are returned
/// `M`-orthonormal, one `Vec` per eigenpair.
pub fn generalized_lowest_eigenpairs(
    k: &SparseOperator,
    m: &SparseOperator,
    count: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = k.nrows();
    let p = (count + 8).min(n);
    let shift = {
        let kd = k.diagonal();
        let md = m.diagonal();
        let ratio: f64 = kd.iter().zip(&md).map(|(a, b)| a / b).sum::<f64>() / n as f64;
        1e-3 * ratio.max(1e-12)
    };
    let shifted = k.linear_combination(1.0, m, shift);
    let lu = SparseLu::new(&shifted)?;

    // Deterministic, well-spread starting block.
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|j| (0..n).map(|i| libm::sin((i as f64 + 1.0) * (j as f64 + 1.0) * 0.618_033_988_75 + j as f64)).collect())
        .collect();
    let mut prev = vec![f64::INFINITY; count];
    for iter in 0..max_iter {
        let y: Vec<Vec<f64>> = x.iter().map(|xj| lu.solve(&m.mul_vec(xj))).collect();
        let ky: Vec<Vec<f64>> = y.iter().map(|yj| k.mul_vec(yj)).collect();
        let my: Vec<Vec<f64>> = y.iter().map(|yj| m.mul_vec(yj)).collect();
        let mut kr = vec![0.0; p * p];
        let mut mr = vec![0.0; p * p];
        for a in 0..p {
            for b in 0..p {
                kr[a * p + b] = super::dot(&y[a], &ky[b]);
                mr[a * p + b] = super::dot(&y[a], &my[b]);
            }
        }
        for a in 0..p {
            for b in (a + 1)..p {
                let s = 0.5 * (kr[a * p + b] + kr[b * p + a]);
                kr[a * p + b] = s;
                kr[b * p + a] = s;
                let s = 0.5 * (mr[a * p + b] + mr[b * p + a]);
                mr[a * p + b] = s;
                mr[b * p + a] = s;
            }
        }
        let l = cholesky(&mr, p).ok_or(Error::Breakdown { solver: "subspace iteration", iteration: iter })?;
        // C = L^{-1} Kr L^{-T}
        let linv_kr = lower_solve_cols(&l, &kr, p);
        let c_t = lower_solve_cols(&l, &transpose(&linv_kr, p), p);
        let c = transpose(&c_t, p);
        let (vals, z) = symmetric_eigen(&c, p);
        // Q = L^{-T} Z
        let q = upper_t_solve_cols(&l, &z, p);
        x = (0..p)
            .map(|j| {
                let mut col = vec![0.0; n];
                for (a, ya) in y.iter().enumerate() {
                    let w = q[a * p + j];
                    if w != 0.0 {
                        super::axpy(w, ya, &mut col);
                    }
                }
                col
            })
            .collect();
        let converged = vals[..count].iter().zip(&prev).all(|(v, pv)| (v - pv).abs() <= tol * v.abs().max(1.0));
        prev.copy_from_slice(&vals[..count]);
        if converged {
            x.truncate(count);
            return Ok((prev, x));
        }
    }
    Err(Error::NonConvergence { solver: "subspace iteration", iterations: max_iter, residual: f64::NAN })
}

fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

/// Solves `L X = B` column by column (`L` lower triangular).
fn lower_solve_cols(l: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut x = b.to_vec();
    for j in 0..n {
        for i in 0..n {
            let mut s = x[i * n + j];
            for k in 0..i {
                s -= l[i * n + k] * x[k * n + j];
            }
            x[i * n + j] = s / l[i * n + i];
        }
    }
    x
}

/// Solves `L^T X = B` column by column.
fn upper_t_solve_cols(l: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut x = b.to_vec();
    for j in 0..n {
        for i in (0..n).rev() {
            let mut s = x[i * n + j];
            for k in (i + 1)..n {
                s -= l[k * n + i] * x[k * n + j];
            }
            x[i * n + j] = s / l[i * n + i];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;

    #[test]
    fn jacobi_diagonalizes_symmetric_matrix() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0];
        let (vals, vecs) = symmetric_eigen(&a, 3);
        for j in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|k| a[i * 3 + k] * vecs[k * 3 + j]).sum();
                assert!((av - vals[j] * vecs[i * 3 + j]).abs() < 1e-12);
            }
        }
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        let tr: f64 = vals.iter().sum();
        assert!((tr - 8.0).abs() < 1e-12);
    }

    #[test]
    fn pencil_of_path_laplacian() {
        // Dirichlet-free path graph: eigenvalues 2 - 2 cos(pi k / n).
        let n = 30;
        let mut kb = TripletBuilder::new(n, n);
        let mut mb = TripletBuilder::new(n, n);
        for i in 0..n {
            let deg = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            kb.push(i, i, deg);
            if i + 1 < n {
                kb.push(i, i + 1, -1.0);
                kb.push(i + 1, i, -1.0);
            }
            mb.push(i, i, 1.0);
        }
        let (vals, _) = generalized_lowest_eigenpairs(&kb.build(true), &mb.build(true), 4, 1e-12, 500).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * libm::cos(core::f64::consts::PI * k as f64 / n as f64);
            assert!((v - exact).abs() < 1e-8, "{k}: {v} vs {exact}");
        }
    }
}
