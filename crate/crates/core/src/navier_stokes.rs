//! Lift of the prescribed normal motion and one linearized step of the
//! tangential momentum equation for the divergence-free velocity part.
//!
//! Unknowns are nodal ambient 3-vectors `V` (ordered `3 i + a`) and a P1
//! pressure. Tangentiality is imposed by a normal penalty, the divergence
//! constraint weakly with Brezzi-Pitkaranta stabilization:
//!
//! ```text
//! [ A   G ] [V]   [f]        G_(ia),j = int chi_i d_a chi_j
//! [ G^T -S] [p] = [0]        S = stab sum_T h_T^2 int grad chi_i . grad chi_j
//! ```
//!
//! The time derivative uses `sigma = sqrt(rho)`:
//! `int sigma+ (sigma+ V+ - sigma V*) . W / dt` with
//! `V* = V - dt phi+ grad mu+ / rho(phi)`. Together with the skew-symmetric
//! convection this makes the kinetic energy balance exact on a fixed
//! surface, and the capillary force `-phi grad mu` is carried entirely by
//! `V*`, matching the transporting velocity of the phase-field step.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cahn_hilliard::PhaseState;
use crate::calculus::{
    check_len, mass_matrix, normal_penalty_matrix, normal_residual, recovered_gradient, stiffness_matrix, Element,
    PoissonSolver, ScalarField, VectorField, GAUSS3,
};
use crate::linalg::{conjugate_gradient, FactorCache, SparseOperator, TripletBuilder};
use crate::material::MaterialParams;
use crate::mesh::SurfaceMesh;
use crate::{Error, Mat3, Result, Vec3};

/// Default Brezzi-Pitkaranta coefficient.
pub const DEFAULT_STABILIZATION: f64 = 0.1;
/// Relative residual target of the saddle-point solve.
pub const MOMENTUM_TOL: f64 = 1e-12;

/// Divergence-free velocity part, pressure and lift on one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub time: f64,
    pub velocity: VectorField,
    /// Mean-zero pressure.
    pub pressure: ScalarField,
    pub u_hat: VectorField,
    /// `(1/2) int rho(phi) |V|^2`
    pub kinetic_energy: f64,
}

impl FlowState {
    pub fn at_rest(mesh: &SurfaceMesh, time: f64) -> Self {
        let n = mesh.vertex_count();
        Self {
            time,
            velocity: VectorField::zeros(time, n),
            pressure: ScalarField::zeros(time, n),
            u_hat: VectorField::zeros(time, n),
            kinetic_energy: 0.0,
        }
    }

    /// Initial state with a prescribed velocity and lift.
    pub fn new(
        mesh: &SurfaceMesh,
        phase: &PhaseState,
        params: &MaterialParams,
        velocity: Vec<Vec3>,
        u_hat: Vec<Vec3>,
    ) -> Result<Self> {
        check_len(velocity.len(), mesh.vertex_count())?;
        let kinetic_energy = kinetic_energy(mesh, &velocity, &phase.phi, params);
        let t = phase.time;
        Ok(Self {
            time: t,
            velocity: VectorField::new(t, velocity)?,
            pressure: ScalarField::zeros(t, mesh.vertex_count()),
            u_hat: VectorField::new(t, u_hat)?,
            kinetic_energy,
        })
    }
}

/// Normal velocity and its tangential lift on one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct Lift {
    pub normal_velocity: Vec<f64>,
    /// Mean-zero potential with `-Delta Pi = H v_n`.
    pub potential: ScalarField,
    /// `grad Pi`, recovered at the vertices.
    pub u_hat: VectorField,
    /// Relative residual of the Poisson solve.
    pub solver_residual: f64,
}

/// Solves `-Delta Pi = H v_n` with the curvature-weighted load
/// `b_i = |A_i| H_i v_i`, whose entries sum to zero once `v_n` is compatible,
/// and recovers `grad Pi` at the vertices by a quadratic patch fit.
pub fn compute_lift(mesh: &SurfaceMesh, time: f64, normal_velocity: &[f64]) -> Result<Lift> {
    let n = mesh.vertex_count();
    check_len(normal_velocity.len(), n)?;
    let h = mesh.vertex_mean_curvature();
    let load: Vec<f64> = (0..n).map(|i| mesh.curvature_areas()[i] * h[i] * normal_velocity[i]).collect();
    let (pi, report) = PoissonSolver::new(mesh).solve_load(load)?;
    let u_hat = recovered_gradient(mesh, &pi)?;
    Ok(Lift {
        normal_velocity: normal_velocity.to_vec(),
        potential: ScalarField::new(time, pi)?,
        u_hat: VectorField::new(time, u_hat)?,
        solver_residual: report.relative_residual,
    })
}

/// `||div u_hat + H v_n||_L2` with the face divergence of the recovered lift.
pub fn lift_divergence_residual(mesh: &SurfaceMesh, lift: &Lift) -> Result<f64> {
    check_len(lift.u_hat.len(), mesh.vertex_count())?;
    let hv: Vec<f64> = mesh.vertex_mean_curvature().iter().zip(&lift.normal_velocity).map(|(h, v)| h * v).collect();
    let mut s = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        let d = e.divergence(&lift.u_hat);
        for q in &GAUSS3 {
            let r = d + e.interpolate(&hv, q);
            s += e.area / 3.0 * r * r;
        }
    }
    Ok(libm::sqrt(s))
}

/// `J = -((rho1 - rho2)/2) grad mu`, one vector per triangle.
pub fn assemble_j_rho(mesh: &SurfaceMesh, mu: &[f64], params: &MaterialParams) -> Result<Vec<Vec3>> {
    check_len(mu.len(), mesh.vertex_count())?;
    let c = params.flux_coefficient();
    Ok((0..mesh.triangle_count()).map(|t| Element::new(mesh, t).gradient(mu) * c).collect())
}

/// `(1/2) int rho(phi) |V|^2` with the Gauss rule.
pub fn kinetic_energy(mesh: &SurfaceMesh, v: &[Vec3], phi: &[f64], params: &MaterialParams) -> f64 {
    let mut s = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        for q in &GAUSS3 {
            s += e.area / 6.0 * params.density(e.interpolate(phi, q)) * e.interpolate_vec(v, q).norm_sq();
        }
    }
    s
}

/// Rate of strain at a Gauss point: face gradient, projector from the
/// interpolated vertex normal.
fn gauss_strain(mesh: &SurfaceMesh, e: &Element, g: &Mat3, q: &[f64; 3]) -> (Mat3, Mat3) {
    let p = Mat3::tangent_projector(e.smooth_normal(mesh, q));
    (p.matmul(&g.sym()).matmul(&p), p)
}

/// `int w(phi) |E_S(V)|^2` with the quadrature of the viscous form.
pub fn strain_energy(mesh: &SurfaceMesh, v: &[Vec3], weight: impl Fn(f64) -> f64, phi: &[f64]) -> f64 {
    let mut s = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        let g = e.vector_gradient(v);
        for q in &GAUSS3 {
            let (es, _) = gauss_strain(mesh, &e, &g, q);
            s += e.area / 3.0 * weight(e.interpolate(phi, q)) * es.norm_sq();
        }
    }
    s
}

/// Viscous block `2 int nu(phi) E_S(V) : E_S(W)` on `(3 i + a)` ordering.
pub fn viscous_matrix(mesh: &SurfaceMesh, phi: &[f64], params: &MaterialParams) -> SparseOperator {
    let n3 = 3 * mesh.vertex_count();
    let mut b = TripletBuilder::with_capacity(n3, n3, 81 * mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        push_viscous(&mut b, mesh, &e, phi, params);
    }
    b.build(true)
}

fn push_viscous(b: &mut TripletBuilder, mesh: &SurfaceMesh, e: &Element, phi: &[f64], params: &MaterialParams) {
    let mut local = [[Mat3::ZERO; 3]; 3];
    for q in &GAUSS3 {
        let p = Mat3::tangent_projector(e.smooth_normal(mesh, q));
        let w = 2.0 * params.viscosity(e.interpolate(phi, q)) * e.area / 3.0;
        let pg = e.grad.map(|g| p.mul_vec(g));
        for i in 0..3 {
            for j in 0..3 {
                // E(e_a chi_i) : E(e_c chi_j) = (P_ac (Pg_i . Pg_j) + (Pg_j)_a (Pg_i)_c) / 2
                let s = pg[i].dot(pg[j]);
                local[i][j] += (p * s + pg[j].outer(pg[i])) * (0.5 * w);
            }
        }
    }
    push_local(b, e, &local);
}

fn push_local(b: &mut TripletBuilder, e: &Element, local: &[[Mat3; 3]; 3]) {
    for i in 0..3 {
        for j in 0..3 {
            for a in 0..3 {
                for c in 0..3 {
                    let v = local[i][j].0[a][c];
                    if v != 0.0 {
                        b.push(3 * e.vertices[i] + a, 3 * e.vertices[j] + c, v);
                    }
                }
            }
        }
    }
}

/// `G_(ia),j = int chi_i d_a chi_j`, so `V^T G p = int V . grad p`.
pub fn pressure_gradient_matrix(mesh: &SurfaceMesh) -> SparseOperator {
    let n = mesh.vertex_count();
    let mut b = TripletBuilder::with_capacity(3 * n, n, 27 * mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        for i in 0..3 {
            for j in 0..3 {
                for a in 0..3 {
                    b.push(3 * e.vertices[i] + a, e.vertices[j], e.area / 3.0 * e.grad[j][a]);
                }
            }
        }
    }
    b.build(false)
}

/// `stab sum_T h_T^2 int_T grad chi_i . grad chi_j`.
pub fn pressure_stabilization_matrix(mesh: &SurfaceMesh, stab: f64) -> SparseOperator {
    let n = mesh.vertex_count();
    let mut b = TripletBuilder::with_capacity(n, n, 9 * mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        let h = mesh.triangle_diameter(t);
        for i in 0..3 {
            for j in 0..3 {
                b.push(e.vertices[i], e.vertices[j], stab * h * h * e.area * e.grad[i].dot(e.grad[j]));
            }
        }
    }
    b.build(true)
}

fn flatten(v: &[Vec3]) -> Vec<f64> {
    v.iter().flat_map(|x| x.0).collect()
}

fn unflatten(x: &[f64]) -> Vec<Vec3> {
    x.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()
}

/// Weak divergence residual `G^T V - S p` in the lumped dual norm.
pub fn divergence_residual(mesh: &SurfaceMesh, v: &[Vec3], pressure: &[f64], stab: f64) -> Result<f64> {
    check_len(v.len(), mesh.vertex_count())?;
    check_len(pressure.len(), mesh.vertex_count())?;
    let g = pressure_gradient_matrix(mesh).transpose().mul_vec(&flatten(v));
    let s = pressure_stabilization_matrix(mesh, stab).mul_vec(pressure);
    Ok(libm::sqrt(g.iter().zip(&s).zip(mesh.vertex_areas()).map(|((a, b), w)| (a - b) * (a - b) / w).sum::<f64>()))
}

/// `sqrt(sum_T |T| |P_T grad V|^2)`.
pub fn velocity_gradient_norm(mesh: &SurfaceMesh, v: &[Vec3]) -> f64 {
    let mut s = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        s += e.area * e.vector_gradient(v).norm_sq();
    }
    libm::sqrt(s)
}

/// Knobs of one momentum step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NsOptions {
    /// Normal penalty weight; `None` selects `1e4 nu_min / h_mean`.
    pub penalty_weight: Option<f64>,
    pub stabilization: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NsOptions {
    fn default() -> Self {
        Self {
            penalty_weight: None,
            stabilization: DEFAULT_STABILIZATION,
            tolerance: MOMENTUM_TOL,
            max_iterations: 200,
        }
    }
}

impl NsOptions {
    pub fn penalty(&self, mesh: &SurfaceMesh, params: &MaterialParams) -> f64 {
        self.penalty_weight.unwrap_or_else(|| 1e4 * params.nu_min() / mesh.mean_edge_length())
    }
}

/// Solver bookkeeping of one momentum step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NsReport {
    pub iterations: usize,
    pub relative_residual: f64,
    /// `G^T V - S p` in the lumped dual norm.
    pub divergence_residual: f64,
    /// `sqrt(int (V . n)^2)`
    pub normal_residual: f64,
    pub velocity_gradient: f64,
    /// `p^T S p`, the dissipation added by the stabilization.
    pub stabilization_work: f64,
    /// `penalty int (V . n)^2`
    pub penalty_work: f64,
}

/// Everything one momentum step reads.
#[derive(Clone, Copy)]
pub struct NsInputs<'a> {
    pub mesh_old: &'a SurfaceMesh,
    pub mesh_new: &'a SurfaceMesh,
    pub flow: &'a FlowState,
    pub lift: &'a Lift,
    pub phase_old: &'a PhaseState,
    pub phase_new: &'a PhaseState,
    pub params: &'a MaterialParams,
    pub dt: f64,
}

/// Advances `V` to the new snapshot. The phase field must already be
/// advanced; `phase_new.mu` supplies the capillary force and the flux `J`.
pub fn ns_step(inp: &NsInputs, opts: &NsOptions) -> Result<(FlowState, NsReport)> {
    ns_step_cached(inp, opts, &mut FactorCache::default())
}

/// [`ns_step`] reusing the factorization held in `cache` as preconditioner.
pub fn ns_step_cached(inp: &NsInputs, opts: &NsOptions, cache: &mut FactorCache) -> Result<(FlowState, NsReport)> {
    let NsInputs { mesh_old, mesh_new, flow, lift, phase_old, phase_new, params, dt } = *inp;
    let n = mesh_new.vertex_count();
    if !mesh_new.same_connectivity(mesh_old) {
        return Err(Error::MismatchedConnectivity);
    }
    for len in [flow.velocity.len(), flow.u_hat.len(), lift.u_hat.len(), lift.normal_velocity.len()] {
        check_len(len, n)?;
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    if let Some(i) = lift.normal_velocity.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("normal velocity at vertex {i}")));
    }

    let phi_old: &[f64] = &phase_old.phi;
    let phi: &[f64] = &phase_new.phi;
    let mu: &[f64] = &phase_new.mu;
    let v_old: &[Vec3] = &flow.velocity;
    let uh: &[Vec3] = &lift.u_hat;
    let uh_old: &[Vec3] = &flow.u_hat;
    let vn: &[f64] = &lift.normal_velocity;
    let vn_sq: Vec<f64> = vn.iter().map(|v| v * v).collect();
    let shape = mesh_new.vertex_shape_operator();
    let flux = params.flux_coefficient();
    let penalty = opts.penalty(mesh_new, params);
    if !(penalty >= 0.0 && penalty.is_finite()) {
        return Err(Error::Parameter(format!("penalty weight must be non-negative, got {penalty}")));
    }

    let n3 = 3 * n;
    let mut a = TripletBuilder::with_capacity(n3, n3, 200 * mesh_new.triangle_count());
    let mut rhs = vec![0.0; n3 + n];

    for t in 0..mesh_new.triangle_count() {
        let e = Element::new(mesh_new, t);
        let e_old = Element::new(mesh_old, t);
        let w_new = e.area / 3.0;
        let w_old = e_old.area / 3.0;
        let gmu = e.gradient(mu);
        let j = gmu * flux;
        let grad_uh = e.vector_gradient(uh);
        let grad_vnsq = e.gradient(&vn_sq);
        let mut local = [[Mat3::ZERO; 3]; 3];

        for q in &GAUSS3 {
            let s_new = e.interpolate(phi, q);
            let s_old = e.interpolate(phi_old, q);
            let rho = params.density(s_new);
            let rho_old = params.density(s_old);
            let sigma = libm::sqrt(rho);
            let sigma_old = libm::sqrt(rho_old);
            let nu = params.viscosity(s_new);
            let vn_q = e.interpolate(vn, q);
            let hq = interpolate_mat(shape, &e, q);
            let uh_q = e.interpolate_vec(uh, q);
            let (es_uh, _) = gauss_strain(mesh_new, &e, &grad_uh, q);
            let transport = (e.interpolate_vec(v_old, q) + uh_q) * rho_old + j;

            // zeroth-order blocks: rho grad(u_hat) V + rho v_n H V
            let zeroth = (grad_uh + hq * vn_q) * rho;
            for i in 0..3 {
                for k in 0..3 {
                    let m = q[i] * q[k];
                    local[i][k] += Mat3::IDENTITY * (w_new * rho * m / dt) + zeroth * (w_new * m);
                    // skew convection (1/2)[(a . grad chi_k) chi_i - (a . grad chi_i) chi_k]
                    let c = 0.5 * w_new * (q[i] * transport.dot(e.grad[k]) - q[k] * transport.dot(e.grad[i]));
                    local[i][k] += Mat3::IDENTITY * c;
                }
            }

            // explicit forcing tested against W = e_a chi_i
            let v_star_old = e_old.interpolate_vec(v_old, q) * (w_old * sigma * sigma_old / dt);
            let capillary = gmu * (-w_new * sigma / sigma_old * s_new);
            let uh_rate = (uh_q - e.interpolate_vec(uh_old, q)) * (-w_new * rho / dt);
            let uh_conv = grad_uh.mul_vec(uh_q * rho + j) * (-w_new);
            let curvature = hq.mul_vec(uh_q * rho + j) * (-w_new * vn_q);
            let centrifugal = grad_vnsq * (0.5 * w_new * rho);
            let point = v_star_old + capillary + uh_rate + uh_conv + curvature + centrifugal;
            // -2 int nu (v_n H + E_S(u_hat)) : E_S(W)
            let stress = (hq * vn_q + es_uh) * (-2.0 * w_new * nu);
            let p = Mat3::tangent_projector(e.smooth_normal(mesh_new, q));
            for i in 0..3 {
                let pg = p.mul_vec(e.grad[i]);
                let div_form = p.matmul(&stress).matmul(&p).mul_vec(pg);
                let f = point * q[i] + div_form;
                for c in 0..3 {
                    rhs[3 * e.vertices[i] + c] += f[c];
                }
            }
        }
        push_local(&mut a, &e, &local);
        push_viscous(&mut a, mesh_new, &e, phi, params);
    }
    let a = a.build(false).linear_combination(1.0, &normal_penalty_matrix(mesh_new, penalty), 1.0);

    let g = pressure_gradient_matrix(mesh_new);
    let s = pressure_stabilization_matrix(mesh_new, opts.stabilization);
    let mut sys = TripletBuilder::with_capacity(n3 + n, n3 + n, a.nnz() + 2 * g.nnz() + s.nnz() + 1);
    sys.push_block(&a, 0, 0, 1.0);
    // pressure dof 0 is pinned to zero; the mean is fixed afterwards
    for (r, c, v) in g.triplets().filter(|t| t.1 != 0) {
        sys.push(r, n3 + c, v);
        sys.push(n3 + c, r, v);
    }
    for (r, c, v) in s.triplets() {
        if r != 0 && c != 0 {
            sys.push(n3 + r, n3 + c, -v);
        }
    }
    sys.push(n3, n3, 1.0);
    let sys = sys.build(false);

    // zero pressure guess: the step must not depend on the incoming gauge
    let mut x = flatten(v_old);
    x.resize(n3 + n, 0.0);
    let report = cache
        .solve(&sys, &rhs, &mut x, opts.tolerance, opts.max_iterations)
        .map_err(|err| Error::StepFailure { reason: format!("momentum solve failed: {err}"), history: vec![] })?;
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("momentum solution entry {i}")));
    }

    let (vx, px) = x.split_at(n3);
    let velocity = unflatten(vx);
    let mut pressure = px.to_vec();
    let mean = mesh_new.lumped_integral(&pressure) / mesh_new.surface_area();
    pressure.iter_mut().for_each(|p| *p -= mean);

    let stabilization_work = s.bilinear(&pressure, &pressure);
    let normal = normal_residual(mesh_new, &velocity);
    let time = phase_new.time;
    let next = FlowState {
        time,
        kinetic_energy: kinetic_energy(mesh_new, &velocity, phi, params),
        velocity: VectorField::new(time, velocity)?,
        pressure: ScalarField::new(time, pressure)?,
        u_hat: lift.u_hat.clone(),
    };
    let div = divergence_residual(mesh_new, &next.velocity, &next.pressure, opts.stabilization)?;
    Ok((
        next.clone(),
        NsReport {
            iterations: report.iterations,
            relative_residual: report.relative_residual,
            divergence_residual: div,
            normal_residual: normal,
            velocity_gradient: velocity_gradient_norm(mesh_new, &next.velocity),
            stabilization_work,
            penalty_work: penalty * normal * normal,
        },
    ))
}

fn interpolate_mat(m: &[Mat3], e: &Element, q: &[f64; 3]) -> Mat3 {
    m[e.vertices[0]] * q[0] + m[e.vertices[1]] * q[1] + m[e.vertices[2]] * q[2]
}

/// Weak residual of the density balance
/// `d/dt int rho chi_i - int (J + rho u) . grad chi_i`
/// with the affine density split into its mean and phase parts, measured in
/// the dual norm of `K + M`. The mean part uses the stabilized discrete
/// divergence so that matched densities reproduce the constraint residual.
#[allow(clippy::too_many_arguments)]
pub fn density_transport_residual(
    mesh_old: &SurfaceMesh,
    mesh_new: &SurfaceMesh,
    phase_old: &PhaseState,
    phase_new: &PhaseState,
    flow: &FlowState,
    params: &MaterialParams,
    dt: f64,
    stab: f64,
) -> Result<f64> {
    let n = mesh_new.vertex_count();
    if !mesh_new.same_connectivity(mesh_old) {
        return Err(Error::MismatchedConnectivity);
    }
    let mean = 0.5 * (params.rho1_tilde + params.rho2_tilde);
    let slope = params.density_slope();
    let g = pressure_gradient_matrix(mesh_new).transpose();
    let div_v = g.mul_vec(&flatten(&flow.velocity));
    let div_uh = g.mul_vec(&flatten(&flow.u_hat));
    let sp = pressure_stabilization_matrix(mesh_new, stab).mul_vec(&flow.pressure);
    let m_new = mass_matrix(mesh_new);
    let k_new = stiffness_matrix(mesh_new);
    let m_phi_new = m_new.mul_vec(&phase_new.phi);
    let m_phi_old = mass_matrix(mesh_old).mul_vec(&phase_old.phi);
    let k_mu = k_new.mul_vec(&phase_new.mu);
    let u: Vec<Vec3> = flow.velocity.iter().zip(flow.u_hat.iter()).map(|(a, b)| *a + *b).collect();
    let mut transport = vec![0.0; n];
    for t in 0..mesh_new.triangle_count() {
        let e = Element::new(mesh_new, t);
        for q in &GAUSS3 {
            let f = e.area / 3.0 * e.interpolate(&phase_new.phi, q);
            let uq = e.interpolate_vec(&u, q);
            for k in 0..3 {
                transport[e.vertices[k]] += f * uq.dot(e.grad[k]);
            }
        }
    }
    let (a_new, a_old) = (mesh_new.vertex_areas(), mesh_old.vertex_areas());
    let r: Vec<f64> = (0..n)
        .map(|i| {
            mean * ((a_new[i] - a_old[i]) / dt - (div_v[i] - sp[i]) - div_uh[i])
                + slope * ((m_phi_new[i] - m_phi_old[i]) / dt - transport[i] + k_mu[i])
        })
        .collect();
    dual_norm_h1(mesh_new, &r)
}

/// `sqrt(r^T (K + M)^{-1} r)`.
pub fn dual_norm_h1(mesh: &SurfaceMesh, r: &[f64]) -> Result<f64> {
    let op = stiffness_matrix(mesh).linear_combination(1.0, &mass_matrix(mesh), 1.0);
    let mut z = vec![0.0; r.len()];
    conjugate_gradient(&op, r, &mut z, 1e-12, 20 * r.len().max(10))?;
    Ok(libm::sqrt(r.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().max(0.0)))
}
