//! Finite-difference checks of the transport identities on a moving mesh.
//!
//! Each check compares the central difference of a time-dependent integral
//! over three consecutive snapshots with the identity's right-hand side
//! assembled on the middle snapshot. Material derivatives are per-vertex
//! central differences and the surface velocity is the vertex velocity
//! `(x_next - x_prev) / (2 dt)`. All geometric quantities are per-triangle
//! (face normal, face projector), for which each identity holds exactly in
//! continuous time; the residual is therefore `O(dt^2)`.

use alloc::vec::Vec;

use super::{check_len, Element};
use crate::mesh::SurfaceMesh;
use crate::{Error, Mat3, Result, Vec3};

/// Three consecutive snapshots `t - dt`, `t`, `t + dt` of one surface.
#[derive(Clone, Copy)]
pub struct TransportStencil<'a> {
    pub prev: &'a SurfaceMesh,
    pub mid: &'a SurfaceMesh,
    pub next: &'a SurfaceMesh,
    pub dt: f64,
}

impl<'a> TransportStencil<'a> {
    pub fn new(prev: &'a SurfaceMesh, mid: &'a SurfaceMesh, next: &'a SurfaceMesh, dt: f64) -> Result<Self> {
        if !mid.same_connectivity(prev) || !mid.same_connectivity(next) {
            return Err(Error::MismatchedConnectivity);
        }
        if !(dt > 0.0) {
            return Err(Error::Parameter("stencil time step must be positive".into()));
        }
        Ok(Self { prev, mid, next, dt })
    }

    pub fn velocity(&self) -> Vec<Vec3> {
        let s = 0.5 / self.dt;
        self.next.positions().iter().zip(self.prev.positions()).map(|(a, b)| (*a - *b) * s).collect()
    }

    fn central<T: Copy + core::ops::Sub<Output = T> + core::ops::Mul<f64, Output = T>>(
        &self,
        prev: &[T],
        next: &[T],
    ) -> Vec<T> {
        let s = 0.5 / self.dt;
        next.iter().zip(prev).map(|(a, b)| (*a - *b) * s).collect()
    }

    fn difference(&self, prev: f64, next: f64) -> f64 {
        (next - prev) * (0.5 / self.dt)
    }

    fn check_scalar(&self, f: &[&[f64]; 3]) -> Result<()> {
        f.iter().try_for_each(|x| check_len(x.len(), self.mid.vertex_count()))
    }

    fn check_vector(&self, f: &[&[Vec3]; 3]) -> Result<()> {
        f.iter().try_for_each(|x| check_len(x.len(), self.mid.vertex_count()))
    }

    fn meshes(&self) -> [&'a SurfaceMesh; 3] {
        [self.prev, self.mid, self.next]
    }
}

fn triangle_mass_product(e: &Element, f: &[f64], g: &[f64]) -> f64 {
    let [i, j, k] = e.vertices;
    let (f0, f1, f2) = (f[i], f[j], f[k]);
    let (g0, g1, g2) = (g[i], g[j], g[k]);
    e.area / 12.0 * (2.0 * (f0 * g0 + f1 * g1 + f2 * g2) + f0 * (g1 + g2) + f1 * (g0 + g2) + f2 * (g0 + g1))
}

fn mean_vec(e: &Element, v: &[Vec3]) -> Vec3 {
    (v[e.vertices[0]] + v[e.vertices[1]] + v[e.vertices[2]]) * (1.0 / 3.0)
}

/// `d/dt int eta phi = int eta' phi + int eta phi' + int eta phi div V`.
pub fn check_transport_identity(s: &TransportStencil, eta: [&[f64]; 3], phi: [&[f64]; 3]) -> Result<f64> {
    s.check_scalar(&eta)?;
    s.check_scalar(&phi)?;
    let integral = |k: usize| -> f64 {
        let m = s.meshes()[k];
        (0..m.triangle_count()).map(|t| triangle_mass_product(&Element::new(m, t), eta[k], phi[k])).sum()
    };
    let lhs = s.difference(integral(0), integral(2));
    let w = s.velocity();
    let deta = s.central(eta[0], eta[2]);
    let dphi = s.central(phi[0], phi[2]);
    let mut rhs = 0.0;
    for t in 0..s.mid.triangle_count() {
        let e = Element::new(s.mid, t);
        rhs += triangle_mass_product(&e, &deta, phi[1])
            + triangle_mass_product(&e, eta[1], &dphi)
            + triangle_mass_product(&e, eta[1], phi[1]) * e.divergence(&w);
    }
    Ok((lhs - rhs).abs())
}

/// `d/dt int grad eta . grad phi` with the strain correction
/// `-2 int grad phi . E(V) grad eta`.
pub fn check_transport_gradient(s: &TransportStencil, eta: [&[f64]; 3], phi: [&[f64]; 3]) -> Result<f64> {
    s.check_scalar(&eta)?;
    s.check_scalar(&phi)?;
    let integral = |k: usize| -> f64 {
        let m = s.meshes()[k];
        (0..m.triangle_count())
            .map(|t| {
                let e = Element::new(m, t);
                e.area * e.gradient(eta[k]).dot(e.gradient(phi[k]))
            })
            .sum()
    };
    let lhs = s.difference(integral(0), integral(2));
    let w = s.velocity();
    let deta = s.central(eta[0], eta[2]);
    let dphi = s.central(phi[0], phi[2]);
    let mut rhs = 0.0;
    for t in 0..s.mid.triangle_count() {
        let e = Element::new(s.mid, t);
        let (ge, gp) = (e.gradient(eta[1]), e.gradient(phi[1]));
        let strain = super::strain_from_gradient(&e.vector_gradient(&w), &e.projector());
        rhs += e.area
            * (e.gradient(&deta).dot(gp) + ge.dot(e.gradient(&dphi)) + ge.dot(gp) * e.divergence(&w)
                - 2.0 * gp.dot(strain.mul_vec(ge)));
    }
    Ok((lhs - rhs).abs())
}

/// `d/dt int grad f . g` for a tangential `g`, realized as the face-tangential
/// part `P_T g` of the nodal field.
pub fn check_transport_mixed(s: &TransportStencil, f: [&[f64]; 3], g: [&[Vec3]; 3]) -> Result<f64> {
    s.check_scalar(&f)?;
    s.check_vector(&g)?;
    let tangential_mean = |m: &SurfaceMesh, t: usize, g: &[Vec3]| -> (Element, Vec3) {
        let e = Element::new(m, t);
        let gm = mean_vec(&e, g);
        (e, gm - e.normal * e.normal.dot(gm))
    };
    let integral = |k: usize| -> f64 {
        let m = s.meshes()[k];
        (0..m.triangle_count())
            .map(|t| {
                let (e, gt) = tangential_mean(m, t, g[k]);
                e.area * e.gradient(f[k]).dot(gt)
            })
            .sum()
    };
    let lhs = s.difference(integral(0), integral(2));
    let w = s.velocity();
    let df = s.central(f[0], f[2]);
    let mut rhs = 0.0;
    for t in 0..s.mid.triangle_count() {
        let (e, gt) = tangential_mean(s.mid, t, g[1]);
        let (_, gp) = tangential_mean(s.prev, t, g[0]);
        let (_, gn) = tangential_mean(s.next, t, g[2]);
        let dg = (gn - gp) * (0.5 / s.dt);
        let gf = e.gradient(f[1]);
        let d = e.vector_gradient(&w);
        rhs += e.area
            * (gf.dot(dg) + e.gradient(&df).dot(gt) - gt.dot(d.transpose().mul_vec(gf))
                + gf.dot(gt) * e.divergence(&w));
    }
    Ok((lhs - rhs).abs())
}

/// `d/dt int eta E(u) : E(v)` with the projector-rate and gradient-rate
/// corrections written through `S(n n^T grad V)`.
pub fn check_transport_strain(s: &TransportStencil, eta: [&[f64]; 3], u: [&[Vec3]; 3], v: [&[Vec3]; 3]) -> Result<f64> {
    s.check_scalar(&eta)?;
    s.check_vector(&u)?;
    s.check_vector(&v)?;
    let integral = |k: usize| -> f64 {
        let m = s.meshes()[k];
        (0..m.triangle_count())
            .map(|t| {
                let e = Element::new(m, t);
                let p = e.projector();
                let eu = super::strain_from_gradient(&e.vector_gradient(u[k]), &p);
                let ev = super::strain_from_gradient(&e.vector_gradient(v[k]), &p);
                e.area * e.mean(eta[k]) * eu.ddot(&ev)
            })
            .sum()
    };
    let lhs = s.difference(integral(0), integral(2));
    let w = s.velocity();
    let deta = s.central(eta[0], eta[2]);
    let du = s.central(u[0], u[2]);
    let dv = s.central(v[0], v[2]);
    let mut rhs = 0.0;
    for t in 0..s.mid.triangle_count() {
        let e = Element::new(s.mid, t);
        let p = e.projector();
        let d = e.vector_gradient(&w);
        let gu = e.vector_gradient(u[1]);
        let gv = e.vector_gradient(v[1]);
        let (hu, hv) = (gu.sym(), gv.sym());
        let eu = strain_from(&gu, &p);
        let ev = strain_from(&gv, &p);
        let sn = e.normal.outer(e.normal).matmul(&d).sym();
        let eta_m = e.mean(eta[1]);
        let tangential_gu = p.matmul(&gu);
        let tangential_gv = p.matmul(&gv);
        let tangential_d = p.matmul(&d);
        let base = eu.ddot(&ev);
        let sum = e.mean(&deta) * base
            + eta_m * strain_from(&e.vector_gradient(&du), &p).ddot(&ev)
            + eta_m * eu.ddot(&strain_from(&e.vector_gradient(&dv), &p))
            + 2.0 * eta_m * sn.matmul(&hu).ddot(&ev)
            + 2.0 * eta_m * hu.matmul(&sn).ddot(&ev)
            + 2.0 * eta_m * eu.ddot(&sn.matmul(&hv))
            + 2.0 * eta_m * eu.ddot(&hv.matmul(&sn))
            - eta_m * tangential_gu.matmul(&tangential_d).sym().ddot(&ev)
            - eta_m * eu.ddot(&tangential_gv.matmul(&tangential_d).sym())
            + eta_m * base * e.divergence(&w);
        rhs += e.area * sum;
    }
    Ok((lhs - rhs).abs())
}

fn strain_from(g: &Mat3, p: &Mat3) -> Mat3 {
    super::strain_from_gradient(g, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_icosphere, evolve_step, NormalVelocityLaw};

    #[test]
    fn stationary_constant_fields_have_zero_residual() {
        let m = build_icosphere(2, 1.0).unwrap();
        let s = TransportStencil::new(&m, &m, &m, 0.01).unwrap();
        let ones = alloc::vec![1.0; m.vertex_count()];
        let r = check_transport_identity(&s, [&ones, &ones, &ones], [&ones, &ones, &ones]).unwrap();
        assert!(r <= 1e-12);
    }

    #[test]
    fn mismatched_connectivity_is_rejected() {
        let a = build_icosphere(1, 1.0).unwrap();
        let b = build_icosphere(2, 1.0).unwrap();
        assert!(matches!(TransportStencil::new(&a, &b, &a, 0.1), Err(Error::MismatchedConnectivity)));
    }

    #[test]
    fn area_rate_matches_on_evolving_sphere() {
        let law = NormalVelocityLaw::Linear { amplitude: 1.0 };
        let dt = 1e-3;
        let m0 = build_icosphere(3, 1.0).unwrap();
        let m1 = evolve_step(&m0, &law, 0.0, dt, false).unwrap();
        let m2 = evolve_step(&m1, &law, dt, dt, false).unwrap();
        let s = TransportStencil::new(&m0, &m1, &m2, dt).unwrap();
        let ones = alloc::vec![1.0; m0.vertex_count()];
        let r = check_transport_identity(&s, [&ones, &ones, &ones], [&ones, &ones, &ones]).unwrap();
        assert!(r < 1e-5, "residual {r}");
    }
}
