//! P1 finite-element calculus on triangulated surfaces.
//!
//! Piecewise-linear nodal fields; gradients are constant per triangle and lie
//! in the triangle plane. Nonlinear integrands use the three-point Gauss rule
//! [`GAUSS3`] with weights `area / 3`; bilinear P1 forms are integrated
//! exactly.

mod inequalities;
mod poisson;
mod transport;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

pub use inequalities::{agmon_ratio, gagliardo_nirenberg_ratio, korn_ratio, lp_norm, FieldNorms};
pub use poisson::{hsharp_norm, solve_poisson_mean_zero, PoissonSolver};
pub use transport::{
    check_transport_gradient, check_transport_identity, check_transport_mixed, check_transport_strain, TransportStencil,
};

use crate::linalg::{generalized_lowest_eigenpairs, SparseOperator, TripletBuilder};
use crate::mesh::{tangent_basis, SurfaceMesh};
use crate::{Error, Mat3, Result, Vec3};

/// Barycentric coordinates of the three-point Gauss rule (degree 2).
pub const GAUSS3: [[f64; 3]; 3] =
    [[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]];

/// Nodal scalar field on one mesh snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    time: f64,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(time: f64, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("scalar field value at vertex {i}")));
        }
        Ok(Self { time, values })
    }

    pub fn zeros(time: f64, n: usize) -> Self {
        Self { time, values: vec![0.0; n] }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Errors unless the field has one value per vertex of `mesh`.
    pub fn check_len(&self, mesh: &SurfaceMesh) -> Result<()> {
        check_len(self.values.len(), mesh.vertex_count())
    }
}

impl Deref for ScalarField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Nodal 3-vector field on one mesh snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    time: f64,
    values: Vec<Vec3>,
    /// Set when the field was checked to satisfy `|v_i . n_i| <= tol |v_i|`.
    tangential_tol: Option<f64>,
}

impl VectorField {
    pub fn new(time: f64, values: Vec<Vec3>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector field value at vertex {i}")));
        }
        Ok(Self { time, values, tangential_tol: None })
    }

    /// Builds a field and checks tangentiality against the vertex normals.
    pub fn tangential(mesh: &SurfaceMesh, time: f64, values: Vec<Vec3>, tol: f64) -> Result<Self> {
        check_len(values.len(), mesh.vertex_count())?;
        let mut f = Self::new(time, values)?;
        for (i, (v, n)) in f.values.iter().zip(mesh.vertex_normals()).enumerate() {
            if v.dot(*n).abs() > tol * v.norm() {
                return Err(Error::Parameter(format!(
                    "vector field is not tangential at vertex {i}: |v.n| = {:e}",
                    v.dot(*n).abs()
                )));
            }
        }
        f.tangential_tol = Some(tol);
        Ok(f)
    }

    pub fn zeros(time: f64, n: usize) -> Self {
        Self { time, values: vec![Vec3::ZERO; n], tangential_tol: None }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec3> {
        self.values
    }

    pub fn tangential_tol(&self) -> Option<f64> {
        self.tangential_tol
    }

    pub fn check_len(&self, mesh: &SurfaceMesh) -> Result<()> {
        check_len(self.values.len(), mesh.vertex_count())
    }
}

impl Deref for VectorField {
    type Target = [Vec3];
    fn deref(&self) -> &[Vec3] {
        &self.values
    }
}

pub(crate) fn dot_nonneg(a: &[f64], b: &[f64]) -> f64 {
    crate::linalg::dot(a, b).max(0.0)
}

pub(crate) fn check_len(got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

/// Per-triangle P1 data: area, unit normal and barycentric gradients.
#[derive(Clone, Copy, Debug)]
pub struct Element {
    pub vertices: [usize; 3],
    pub area: f64,
    pub normal: Vec3,
    pub grad: [Vec3; 3],
}

impl Element {
    pub fn new(mesh: &SurfaceMesh, t: usize) -> Self {
        let vertices = mesh.triangles()[t];
        let p = vertices.map(|i| mesh.positions()[i]);
        let cr = (p[1] - p[0]).cross(p[2] - p[0]);
        let twice_area = cr.norm();
        let normal = cr * (1.0 / twice_area);
        let grad = [0, 1, 2].map(|k| normal.cross(p[(k + 2) % 3] - p[(k + 1) % 3]) * (1.0 / twice_area));
        Element { vertices, area: 0.5 * twice_area, normal, grad }
    }

    /// Face tangent projector `I - n n^T`.
    pub fn projector(&self) -> Mat3 {
        Mat3::tangent_projector(self.normal)
    }

    pub fn gradient(&self, f: &[f64]) -> Vec3 {
        self.grad[0] * f[self.vertices[0]] + self.grad[1] * f[self.vertices[1]] + self.grad[2] * f[self.vertices[2]]
    }

    /// Full ambient gradient of a vector field, `(grad v)_{ab} = d_b v_a`,
    /// restricted to the face plane.
    pub fn vector_gradient(&self, v: &[Vec3]) -> Mat3 {
        let mut g = Mat3::ZERO;
        for k in 0..3 {
            g += v[self.vertices[k]].outer(self.grad[k]);
        }
        g
    }

    pub fn divergence(&self, v: &[Vec3]) -> f64 {
        (0..3).map(|k| v[self.vertices[k]].dot(self.grad[k])).sum()
    }

    pub fn interpolate(&self, f: &[f64], lambda: &[f64; 3]) -> f64 {
        lambda[0] * f[self.vertices[0]] + lambda[1] * f[self.vertices[1]] + lambda[2] * f[self.vertices[2]]
    }

    pub fn interpolate_vec(&self, v: &[Vec3], lambda: &[f64; 3]) -> Vec3 {
        v[self.vertices[0]] * lambda[0] + v[self.vertices[1]] * lambda[1] + v[self.vertices[2]] * lambda[2]
    }

    /// Normalized interpolation of the vertex normals.
    pub fn smooth_normal(&self, mesh: &SurfaceMesh, lambda: &[f64; 3]) -> Vec3 {
        self.interpolate_vec(mesh.vertex_normals(), lambda).normalized()
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        (f[self.vertices[0]] + f[self.vertices[1]] + f[self.vertices[2]]) / 3.0
    }
}

pub fn elements(mesh: &SurfaceMesh) -> Vec<Element> {
    (0..mesh.triangle_count()).map(|t| Element::new(mesh, t)).collect()
}

/// `P sym(g) P`.
#[inline]
pub fn strain_from_gradient(g: &Mat3, p: &Mat3) -> Mat3 {
    p.matmul(&g.sym()).matmul(p)
}

/// Consistent P1 mass matrix.
pub fn mass_matrix(mesh: &SurfaceMesh) -> SparseOperator {
    let mut b = TripletBuilder::with_capacity(mesh.vertex_count(), mesh.vertex_count(), 9 * mesh.triangle_count());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.triangle_areas()[t];
        for i in 0..3 {
            for j in 0..3 {
                b.push(tri[i], tri[j], if i == j { a / 6.0 } else { a / 12.0 });
            }
        }
    }
    b.build(true)
}

/// Row-sum lumped mass, equal to the barycentric vertex areas.
pub fn lumped_mass(mesh: &SurfaceMesh) -> Vec<f64> {
    mesh.vertex_areas().to_vec()
}

/// Cotangent stiffness `K_ij = int grad chi_i . grad chi_j`.
pub fn stiffness_matrix(mesh: &SurfaceMesh) -> SparseOperator {
    let mut b = TripletBuilder::with_capacity(mesh.vertex_count(), mesh.vertex_count(), 9 * mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        for i in 0..3 {
            for j in 0..3 {
                b.push(e.vertices[i], e.vertices[j], e.area * e.grad[i].dot(e.grad[j]));
            }
        }
    }
    b.build(true)
}

/// Weighted P1 stiffness `int w_T grad chi_i . grad chi_j` with one weight
/// per triangle.
pub fn weighted_stiffness_matrix(mesh: &SurfaceMesh, weights: &[f64]) -> SparseOperator {
    let mut b = TripletBuilder::with_capacity(mesh.vertex_count(), mesh.vertex_count(), 9 * mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        for i in 0..3 {
            for j in 0..3 {
                b.push(e.vertices[i], e.vertices[j], weights[t] * e.area * e.grad[i].dot(e.grad[j]));
            }
        }
    }
    b.build(true)
}

/// Piecewise-constant tangential gradient, one vector per triangle.
pub fn tangential_gradient(mesh: &SurfaceMesh, f: &[f64]) -> Result<Vec<Vec3>> {
    check_len(f.len(), mesh.vertex_count())?;
    Ok((0..mesh.triangle_count()).map(|t| Element::new(mesh, t).gradient(f)).collect())
}

/// Rate-of-strain `P sym(grad v) P` per triangle, with `P` built from the
/// interpolated vertex normal at the centroid.
pub fn rate_of_strain(mesh: &SurfaceMesh, v: &[Vec3]) -> Result<Vec<Mat3>> {
    check_len(v.len(), mesh.vertex_count())?;
    let c = [1.0 / 3.0; 3];
    Ok((0..mesh.triangle_count())
        .map(|t| {
            let e = Element::new(mesh, t);
            let p = Mat3::tangent_projector(e.smooth_normal(mesh, &c));
            strain_from_gradient(&e.vector_gradient(v), &p)
        })
        .collect())
}

/// Tangential divergence per triangle.
pub fn divergence(mesh: &SurfaceMesh, v: &[Vec3]) -> Result<Vec<f64>> {
    check_len(v.len(), mesh.vertex_count())?;
    Ok((0..mesh.triangle_count()).map(|t| Element::new(mesh, t).divergence(v)).collect())
}

/// Area-weighted average of per-triangle vectors onto the vertices.
pub fn nodal_average(mesh: &SurfaceMesh, per_triangle: &[Vec3]) -> Result<Vec<Vec3>> {
    check_len(per_triangle.len(), mesh.triangle_count())?;
    let mut out = vec![Vec3::ZERO; mesh.vertex_count()];
    let mut w = vec![0.0; mesh.vertex_count()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.triangle_areas()[t];
        for &i in tri {
            out[i] += per_triangle[t] * a;
            w[i] += a;
        }
    }
    for (o, wi) in out.iter_mut().zip(&w) {
        *o = *o * (1.0 / wi);
    }
    Ok(out)
}

/// Vertex gradients of a P1 field from a least-squares quadratic fit over
/// the one-ring in the vertex tangent plane. The result is tangent to the
/// vertex normal. Unlike the area average of face gradients, its error is
/// smooth on irregular meshes, so its divergence converges at first order.
/// Vertices whose ring cannot determine a quadratic fall back to the
/// average.
pub fn recovered_gradient(mesh: &SurfaceMesh, f: &[f64]) -> Result<Vec<Vec3>> {
    check_len(f.len(), mesh.vertex_count())?;
    let x = mesh.positions();
    let mut fallback: Option<Vec<Vec3>> = None;
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let n = mesh.vertex_normals()[i];
        let (t1, t2) = tangent_basis(n);
        let mut a = [[0.0; 5]; 5];
        let mut b = [0.0; 5];
        let mut scale = 0.0_f64;
        for &j in mesh.topology().neighbors(i) {
            let d = x[j] - x[i];
            scale = scale.max(d.norm());
        }
        for &j in mesh.topology().neighbors(i) {
            let d = (x[j] - x[i]) * (1.0 / scale);
            let (u, v) = (d.dot(t1), d.dot(t2));
            let row = [u, v, u * u, u * v, v * v];
            for r in 0..5 {
                for c in 0..5 {
                    a[r][c] += row[r] * row[c];
                }
                b[r] += row[r] * (f[j] - f[i]);
            }
        }
        match solve_dense(a, b) {
            Some(c) => out.push((t1 * c[0] + t2 * c[1]) * (1.0 / scale)),
            None => {
                let avg = match &fallback {
                    Some(v) => v,
                    None => fallback.insert(nodal_average(mesh, &tangential_gradient(mesh, f)?)?),
                };
                out.push(Mat3::tangent_projector(n).mul_vec(avg[i]));
            }
        }
    }
    Ok(out)
}

/// Gaussian elimination with partial pivoting; `None` when a pivot falls
/// below `1e-10` of the largest diagonal entry.
fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    let tol = 1e-10 * a.iter().enumerate().fold(0.0_f64, |m, (i, r)| m.max(r[i].abs()));
    for c in 0..N {
        let p = (c..N).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if !(a[p][c].abs() > tol) {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..N {
            let m = a[r][c] / a[c][c];
            for k in c..N {
                a[r][k] -= m * a[c][k];
            }
            b[r] -= m * b[c];
        }
    }
    let mut x = [0.0; N];
    for r in (0..N).rev() {
        let s: f64 = (r + 1..N).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// `sqrt(f^T M f)` with the consistent mass matrix.
pub fn l2_norm(mesh: &SurfaceMesh, f: &[f64]) -> f64 {
    libm::sqrt(l2_inner(mesh, f, f).max(0.0))
}

/// `f^T M g`, assembled triangle by triangle.
pub fn l2_inner(mesh: &SurfaceMesh, f: &[f64], g: &[f64]) -> f64 {
    let mut s = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.triangle_areas()[t];
        let (f0, f1, f2) = (f[tri[0]], f[tri[1]], f[tri[2]]);
        let (g0, g1, g2) = (g[tri[0]], g[tri[1]], g[tri[2]]);
        s += a / 12.0 * (2.0 * (f0 * g0 + f1 * g1 + f2 * g2) + f0 * (g1 + g2) + f1 * (g0 + g2) + f2 * (g0 + g1));
    }
    s
}

/// L2 norm of a nodal vector field.
pub fn l2_norm_vec(mesh: &SurfaceMesh, v: &[Vec3]) -> f64 {
    let mut s = 0.0;
    for k in 0..3 {
        let c: Vec<f64> = v.iter().map(|x| x[k]).collect();
        s += l2_inner(mesh, &c, &c);
    }
    libm::sqrt(s.max(0.0))
}

/// `sum_T |T| |g_T|^2` for per-triangle vectors.
pub fn triangle_norm_sq(mesh: &SurfaceMesh, g: &[Vec3]) -> f64 {
    g.iter().zip(mesh.triangle_areas()).map(|(v, a)| a * v.norm_sq()).sum()
}

/// `sum_T |T| |E_T|^2` for per-triangle matrices.
pub fn triangle_matrix_norm_sq(mesh: &SurfaceMesh, e: &[Mat3]) -> f64 {
    e.iter().zip(mesh.triangle_areas()).map(|(m, a)| a * m.norm_sq()).sum()
}

/// `sum_T |T| f_T^2` for per-triangle scalars.
pub fn triangle_scalar_norm_sq(mesh: &SurfaceMesh, f: &[f64]) -> f64 {
    f.iter().zip(mesh.triangle_areas()).map(|(v, a)| a * v * v).sum()
}

/// `int f` with the consistent mass (equal to the lumped sum).
pub fn integral(mesh: &SurfaceMesh, f: &[f64]) -> f64 {
    mesh.lumped_integral(f)
}

/// Normal penalty form `weight * int (V . n)(W . n)` on nodal 3-vectors,
/// ordered `(3 i + a)`, with `n` the interpolated vertex normal at the Gauss
/// points.
pub fn normal_penalty_matrix(mesh: &SurfaceMesh, weight: f64) -> SparseOperator {
    let n3 = 3 * mesh.vertex_count();
    let mut b = TripletBuilder::with_capacity(n3, n3, 81 * mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        let mut local = [[Mat3::ZERO; 3]; 3];
        for q in &GAUSS3 {
            let n = e.smooth_normal(mesh, q);
            let nn = n.outer(n);
            let w = weight * e.area / 3.0;
            for i in 0..3 {
                for j in 0..3 {
                    local[i][j] += nn * (w * q[i] * q[j]);
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                for a in 0..3 {
                    for c in 0..3 {
                        b.push(3 * e.vertices[i] + a, 3 * e.vertices[j] + c, local[i][j].0[a][c]);
                    }
                }
            }
        }
    }
    b.build(true)
}

/// `sqrt(int (V . n)^2)` with the same quadrature as the penalty form.
pub fn normal_residual(mesh: &SurfaceMesh, v: &[Vec3]) -> f64 {
    let mut s = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        for q in &GAUSS3 {
            let vn = e.interpolate_vec(v, q).dot(e.smooth_normal(mesh, q));
            s += e.area / 3.0 * vn * vn;
        }
    }
    libm::sqrt(s)
}

/// Lowest `count` eigenvalues of `K x = lambda M x`, ascending; the first is
/// the (numerically zero) constant mode.
pub fn laplace_beltrami_spectrum(mesh: &SurfaceMesh, count: usize) -> Result<Vec<f64>> {
    if count == 0 || count > mesh.vertex_count() {
        return Err(Error::Parameter(format!(
            "cannot compute {count} eigenvalues on {} vertices",
            mesh.vertex_count()
        )));
    }
    let k = stiffness_matrix(mesh);
    let m = mass_matrix(mesh);
    let (vals, _) = generalized_lowest_eigenpairs(&k, &m, count, 1e-10, 500)?;
    Ok(vals)
}
