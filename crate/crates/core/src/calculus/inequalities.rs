//! Ratios whose uniform boundedness over fields and meshes is the discrete
//! counterpart of the functional inequalities used in the analysis. The
//! discrete `H^2` seminorm is `||M_L^{-1} K f||`, a diagnostic stand-in
//! rather than a true second-derivative norm.

use super::{check_len, l2_norm, l2_norm_vec, rate_of_strain, stiffness_matrix, Element, GAUSS3};
use crate::mesh::SurfaceMesh;
use crate::{Result, Vec3};

/// Standard norms of one nodal scalar field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldNorms {
    pub l2: f64,
    pub grad: f64,
    pub h1: f64,
    pub laplacian: f64,
    pub h2: f64,
    pub max: f64,
}

impl FieldNorms {
    pub fn new(mesh: &SurfaceMesh, f: &[f64]) -> Result<Self> {
        check_len(f.len(), mesh.vertex_count())?;
        let l2 = l2_norm(mesh, f);
        let k = stiffness_matrix(mesh);
        let kf = k.mul_vec(f);
        let grad = libm::sqrt(super::dot_nonneg(f, &kf));
        let laplacian = libm::sqrt(kf.iter().zip(mesh.vertex_areas()).map(|(v, a)| v * v / a).sum::<f64>());
        let max = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(Self {
            l2,
            grad,
            h1: libm::sqrt(l2 * l2 + grad * grad),
            laplacian,
            h2: libm::sqrt(l2 * l2 + grad * grad + laplacian * laplacian),
            max,
        })
    }
}

/// `(int |f|^p)^(1/p)` with the Gauss rule.
pub fn lp_norm(mesh: &SurfaceMesh, f: &[f64], p: f64) -> f64 {
    let mut s = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        for q in &GAUSS3 {
            s += e.area / 3.0 * libm::pow(e.interpolate(f, q).abs(), p);
        }
    }
    libm::pow(s, 1.0 / p)
}

/// `||f||_Lp / (sqrt(p) ||f||^(2/p) ||f||_H1^(1 - 2/p))`.
pub fn gagliardo_nirenberg_ratio(mesh: &SurfaceMesh, f: &[f64], p: f64) -> Result<f64> {
    let n = FieldNorms::new(mesh, f)?;
    let lp = lp_norm(mesh, f, p);
    Ok(lp / (libm::sqrt(p) * libm::pow(n.l2, 2.0 / p) * libm::pow(n.h1, 1.0 - 2.0 / p)))
}

/// `||v||_H1 / (||v|| + ||E_S(v)||)` for a tangential nodal field.
pub fn korn_ratio(mesh: &SurfaceMesh, v: &[Vec3]) -> Result<f64> {
    check_len(v.len(), mesh.vertex_count())?;
    let l2 = l2_norm_vec(mesh, v);
    let mut grad_sq = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        grad_sq += e.area * e.projector().matmul(&e.vector_gradient(v)).norm_sq();
    }
    let strain = libm::sqrt(super::triangle_matrix_norm_sq(mesh, &rate_of_strain(mesh, v)?));
    Ok(libm::sqrt(l2 * l2 + grad_sq) / (l2 + strain))
}

/// `||f||_inf / (||f||^(1/2) ||f||_H2^(1/2))`.
pub fn agmon_ratio(mesh: &SurfaceMesh, f: &[f64]) -> Result<f64> {
    let n = FieldNorms::new(mesh, f)?;
    Ok(n.max / libm::sqrt(n.l2 * n.h2))
}
