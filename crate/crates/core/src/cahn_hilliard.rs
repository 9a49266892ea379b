//! One implicit step of the convective Cahn-Hilliard system on a moving
//! mesh, and its energy, mean-potential and separation diagnostics.
//!
//! For nodal unknowns `(phi+, mu+)` on the new snapshot:
//!
//! ```text
//! M+ phi+ - M phi + dt (m K+ mu+ - C(phi+, u)) = 0
//! M+ mu+ = K+ phi+ + f(phi+) - theta0 M+ phi
//! ```
//!
//! with `f_i = int F'(phi+) chi_i` by the Gauss rule and the conservative
//! transport form `C_i = int phi+ u . grad chi_i`. Every column of `K` and
//! of `C` sums to zero, so `1^T M+ phi+ = 1^T M phi` up to solver error.
//!
//! When coupled to the momentum step, the transporting velocity is
//! `u = V* + u_hat` with `V* = V - gamma dt phi+ grad mu+ / rho(phi)`
//! evaluated at the Gauss points. The same `V*` enters the momentum time
//! derivative, which is what makes the kinetic and free energies exchange
//! exactly.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::calculus::{check_len, mass_matrix, stiffness_matrix, Element, ScalarField, GAUSS3};
use crate::linalg::{conjugate_gradient, FactorCache, SparseOperator, TripletBuilder};
use crate::material::MaterialParams;
use crate::mesh::SurfaceMesh;
use crate::{Error, Result, Vec3};

/// Phase field and chemical potential on one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState {
    pub time: f64,
    pub phi: ScalarField,
    pub mu: ScalarField,
    /// `1 - max_i |phi_i|`
    pub separation_margin: f64,
    /// `int phi`
    pub total_mass: f64,
}

impl PhaseState {
    /// Builds a state from `phi`, computing the consistent `mu` by a mass
    /// solve. Requires `max |phi| < 1`.
    pub fn new(mesh: &SurfaceMesh, params: &MaterialParams, time: f64, phi: Vec<f64>) -> Result<Self> {
        check_len(phi.len(), mesh.vertex_count())?;
        if let Some(&s) = phi.iter().find(|s| !(s.abs() < 1.0)) {
            return Err(Error::SingularArgument(s));
        }
        let phi = ScalarField::new(time, phi)?;
        let mass = mass_matrix(mesh);
        let k = stiffness_matrix(mesh);
        let (f, _) = potential_load(mesh, params, &phi)?;
        let kphi = k.mul_vec(&phi);
        let mphi = mass.mul_vec(&phi);
        let rhs: Vec<f64> = (0..phi.len()).map(|i| kphi[i] + f[i] - params.theta0 * mphi[i]).collect();
        let mut mu = vec![0.0; phi.len()];
        conjugate_gradient(&mass, &rhs, &mut mu, 1e-14, 10 * phi.len().max(10))?;
        Self::from_parts(mesh, time, phi.into_values(), mu)
    }

    /// Wraps already consistent fields.
    pub fn from_parts(mesh: &SurfaceMesh, time: f64, phi: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        check_len(phi.len(), mesh.vertex_count())?;
        check_len(mu.len(), mesh.vertex_count())?;
        let separation_margin = 1.0 - phi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let total_mass = mesh.lumped_integral(&phi);
        Ok(Self {
            time,
            phi: ScalarField::new(time, phi)?,
            mu: ScalarField::new(time, mu)?,
            separation_margin,
            total_mass,
        })
    }
}

/// Knobs of one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChOptions {
    /// Scales the diffusive term; 1 in the model, 0 for pure transport tests.
    pub mobility_factor: f64,
    /// `gamma` in `V* = V - gamma dt phi+ grad mu+ / rho`; 1 when coupled to
    /// the momentum step, 0 standalone.
    pub kinetic_coupling: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for ChOptions {
    fn default() -> Self {
        Self { mobility_factor: 1.0, kinetic_coupling: 0.0, max_iterations: 60, tolerance: 1e-10 }
    }
}

/// Newton bookkeeping of one step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChReport {
    pub iterations: usize,
    /// Combined residual before each iteration and after the last one.
    pub residual_history: Vec<f64>,
}

/// `f_i = int F'(phi) chi_i` and the Gauss-rule `int F(phi)`.
fn potential_load(mesh: &SurfaceMesh, params: &MaterialParams, phi: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut f = vec![0.0; mesh.vertex_count()];
    let mut energy = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        let w = e.area / 3.0;
        for q in &GAUSS3 {
            let s = e.interpolate(phi, q);
            let d = params.df(s)?;
            energy += w * params.f(s)?;
            for k in 0..3 {
                f[e.vertices[k]] += w * d * q[k];
            }
        }
    }
    Ok((f, energy))
}

/// `(1/2) phi^T K phi`, `int Psi(phi)` and `mu^T K mu`.
pub fn ch_energy(mesh: &SurfaceMesh, state: &PhaseState, params: &MaterialParams) -> Result<(f64, f64, f64)> {
    let k = stiffness_matrix(mesh);
    let gl = 0.5 * k.bilinear(&state.phi, &state.phi);
    let pot = potential_energy(mesh, params, &state.phi)?;
    Ok((gl, pot, k.bilinear(&state.mu, &state.mu)))
}

/// `int Psi(phi)` with the Gauss rule (exact for the quadratic part).
pub fn potential_energy(mesh: &SurfaceMesh, params: &MaterialParams, phi: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        for q in &GAUSS3 {
            s += e.area / 3.0 * params.psi(e.interpolate(phi, q))?;
        }
    }
    Ok(s)
}

fn dual_norm(r: &[f64], lumped: &[f64]) -> f64 {
    libm::sqrt(r.iter().zip(lumped).map(|(v, a)| v * v / a).sum::<f64>())
}

/// Advances `(phi, mu)` from `mesh_old` to `mesh_new`. `velocity` is the
/// tangential transport velocity `V + u_hat` at the new vertices.
pub fn ch_step(
    mesh_old: &SurfaceMesh,
    mesh_new: &SurfaceMesh,
    state: &PhaseState,
    velocity: &[Vec3],
    params: &MaterialParams,
    dt: f64,
    opts: &ChOptions,
) -> Result<(PhaseState, ChReport)> {
    ch_step_cached(mesh_old, mesh_new, state, velocity, params, dt, opts, &mut FactorCache::default())
}

/// [`ch_step`] reusing the factorization held in `cache` for the Newton
/// systems.
#[allow(clippy::too_many_arguments)]
pub fn ch_step_cached(
    mesh_old: &SurfaceMesh,
    mesh_new: &SurfaceMesh,
    state: &PhaseState,
    velocity: &[Vec3],
    params: &MaterialParams,
    dt: f64,
    opts: &ChOptions,
    cache: &mut FactorCache,
) -> Result<(PhaseState, ChReport)> {
    let n = mesh_new.vertex_count();
    if !mesh_new.same_connectivity(mesh_old) {
        return Err(Error::MismatchedConnectivity);
    }
    check_len(velocity.len(), n)?;
    if let Some(i) = velocity.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("transport velocity at vertex {i}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    if !(state.separation_margin > 0.0) {
        return Err(Error::Parameter("initial phase field is not separated from +-1".into()));
    }
    params.validate_solver_bounds()?;

    let elements: Vec<Element> = (0..mesh_new.triangle_count()).map(|t| Element::new(mesh_new, t)).collect();
    let mass_new = mass_matrix(mesh_new);
    let k_new = stiffness_matrix(mesh_new);
    let lumped = mesh_new.vertex_areas();
    let phi_old: &[f64] = &state.phi;
    let m_old_phi = mass_matrix(mesh_old).mul_vec(phi_old);
    let m_new_phi_old = mass_new.mul_vec(phi_old);
    let mobility = params.mobility * opts.mobility_factor;
    let gamma = opts.kinetic_coupling;
    let limit = 1.0 - params.eps_guard;

    let mut phi = phi_old.to_vec();
    let mut mu = state.mu.to_vec();
    let mut history = Vec::new();

    let residual = |phi: &[f64], mu: &[f64]| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let (f, _) = potential_load(mesh_new, params, phi)?;
        let conv = convection(&elements, phi, mu, phi_old, velocity, params, gamma * dt);
        let mphi = mass_new.mul_vec(phi);
        let kmu = k_new.mul_vec(mu);
        let kphi = k_new.mul_vec(phi);
        let mmu = mass_new.mul_vec(mu);
        let r_phi: Vec<f64> = (0..n).map(|i| mphi[i] - m_old_phi[i] + dt * (mobility * kmu[i] - conv[i])).collect();
        let r_mu: Vec<f64> = (0..n).map(|i| mmu[i] - kphi[i] - f[i] + params.theta0 * m_new_phi_old[i]).collect();
        let scaled: Vec<f64> = r_phi.iter().map(|v| v / dt).collect();
        let norm = dual_norm(&scaled, lumped) + dual_norm(&r_mu, lumped);
        Ok((r_phi, r_mu, norm))
    };

    let (mut r_phi, mut r_mu, mut norm) = residual(&phi, &mu)?;
    history.push(norm);
    let mut iterations = 0;
    loop {
        let mu_l2 = crate::calculus::l2_norm(mesh_new, &mu);
        if norm <= opts.tolerance * (1.0 + mu_l2) {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::StepFailure {
                reason: format!("phase-field Newton iteration stalled after {iterations} iterations"),
                history,
            });
        }
        iterations += 1;
        let jac = jacobian(&elements, &mass_new, &k_new, &phi, &mu, phi_old, velocity, params, dt, mobility, gamma)?;
        let rhs: Vec<f64> = r_phi.iter().chain(&r_mu).map(|v| -v).collect();
        let mut step = vec![0.0; 2 * n];
        cache.solve(&jac, &rhs, &mut step, 1e-13, 200)?;
        let (dphi, dmu) = step.split_at(n);

        // largest step keeping every nodal value inside the guard band
        let mut alpha: f64 = 1.0;
        for i in 0..n {
            let target = phi[i] + dphi[i];
            if target.abs() > limit {
                let bound = if dphi[i] > 0.0 { limit - phi[i] } else { -limit - phi[i] };
                alpha = alpha.min(0.9 * bound / dphi[i]);
            }
        }
        if !(alpha > 0.0) {
            return Err(Error::StepFailure { reason: "guard band leaves no admissible step".into(), history });
        }
        let mut accepted = None;
        for _ in 0..30 {
            let trial_phi: Vec<f64> = (0..n).map(|i| phi[i] + alpha * dphi[i]).collect();
            let trial_mu: Vec<f64> = (0..n).map(|i| mu[i] + alpha * dmu[i]).collect();
            debug_assert!(trial_phi.iter().all(|v| v.abs() <= limit));
            let (a, b, tn) = residual(&trial_phi, &trial_mu)?;
            if tn <= (1.0 - 1e-4 * alpha) * norm || tn <= opts.tolerance * 1e-2 {
                accepted = Some((trial_phi, trial_mu, a, b, tn));
                break;
            }
            alpha *= 0.5;
        }
        let Some((p, m, a, b, tn)) = accepted else {
            return Err(Error::StepFailure { reason: "line search failed to reduce the residual".into(), history });
        };
        phi = p;
        mu = m;
        r_phi = a;
        r_mu = b;
        norm = tn;
        history.push(norm);
    }

    let next = PhaseState::from_parts(mesh_new, state.time + dt, phi, mu)?;
    if !(next.separation_margin >= params.eps_guard) {
        return Err(Error::StepFailure { reason: "accepted iterate left the guard band".into(), history });
    }
    Ok((next, ChReport { iterations, residual_history: history }))
}

/// Transport load `C_i = int phi u* . grad chi_i`, with
/// `u* = u - c phi grad mu / rho(phi_old)` and `c = gamma dt`.
fn convection(
    elements: &[Element],
    phi: &[f64],
    mu: &[f64],
    phi_old: &[f64],
    velocity: &[Vec3],
    params: &MaterialParams,
    c: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; phi.len()];
    for e in elements {
        let gmu = e.gradient(mu);
        let w = e.area / 3.0;
        for q in &GAUSS3 {
            let s = e.interpolate(phi, q);
            let mut u = e.interpolate_vec(velocity, q);
            if c != 0.0 {
                u -= gmu * (c * s / params.density(e.interpolate(phi_old, q)));
            }
            for k in 0..3 {
                out[e.vertices[k]] += w * s * u.dot(e.grad[k]);
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn jacobian(
    elements: &[Element],
    mass: &SparseOperator,
    k: &SparseOperator,
    phi: &[f64],
    mu: &[f64],
    phi_old: &[f64],
    velocity: &[Vec3],
    params: &MaterialParams,
    dt: f64,
    mobility: f64,
    gamma: f64,
) -> Result<SparseOperator> {
    let n = phi.len();
    let c = gamma * dt;
    let mut b = TripletBuilder::with_capacity(2 * n, 2 * n, 4 * mass.nnz() + 18 * elements.len());
    b.push_block(mass, 0, 0, 1.0);
    b.push_block(k, 0, n, dt * mobility);
    b.push_block(k, n, 0, -1.0);
    b.push_block(mass, n, n, 1.0);
    for e in elements {
        let gmu = e.gradient(mu);
        let w = e.area / 3.0;
        let mut d_phi = [[0.0; 3]; 3];
        let mut d_mu = [[0.0; 3]; 3];
        let mut d_f = [[0.0; 3]; 3];
        for q in &GAUSS3 {
            let s = e.interpolate(phi, q);
            let rho = params.density(e.interpolate(phi_old, q));
            let u = e.interpolate_vec(velocity, q) - gmu * (c * s / rho);
            let f2 = params.d2f(s)?;
            for i in 0..3 {
                let gi = e.grad[i];
                for j in 0..3 {
                    d_phi[i][j] += w * q[j] * (u.dot(gi) - c * s * gmu.dot(gi) / rho);
                    d_mu[i][j] -= w * c * s * s / rho * e.grad[j].dot(gi);
                    d_f[i][j] += w * f2 * q[i] * q[j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let (vi, vj) = (e.vertices[i], e.vertices[j]);
                b.push(vi, vj, -dt * d_phi[i][j]);
                if c != 0.0 {
                    b.push(vi, n + vj, -dt * d_mu[i][j]);
                }
                b.push(n + vi, vj, -d_f[i][j]);
            }
        }
    }
    Ok(b.build(false))
}

/// The two sides of the mean-potential estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanMuReport {
    /// `|int mu| / |Gamma|`
    pub mean_mu: f64,
    /// `(C1 |int F'(phi)(phi - mean0)| + C2) / |Gamma0| + theta0 |mean0|`
    pub bound_rhs: f64,
    /// `mean_mu / bound_rhs`, diagnostic only.
    pub ratio: f64,
}

/// Evaluates the mean-potential estimate with `m = (|mean0| + 1) / 2`,
/// `delta1 = min(mean0 + m, m - mean0)`, `C1 = 1 / delta1` and
/// `C2 = 2 F'(m) |Gamma0|`. The chemical-potential mean is taken from the
/// discrete identity `int mu = int F'(phi) - theta0 int phi`.
pub fn mean_mu_bound_report(
    mesh: &SurfaceMesh,
    state: &PhaseState,
    params: &MaterialParams,
    initial_mean: f64,
    initial_area: f64,
) -> Result<MeanMuReport> {
    if !(initial_mean.abs() < 1.0 - 1e-9) {
        return Err(Error::InvalidMean(initial_mean));
    }
    let area = mesh.surface_area();
    let mean_mu = (mesh.lumped_integral(&state.mu) / area).abs();
    let m = 0.5 * (initial_mean.abs() + 1.0);
    let delta1 = (initial_mean + m).min(m - initial_mean);
    let c1 = 1.0 / delta1;
    let c2 = 2.0 * params.df(m)?.abs() * initial_area;
    let mut weighted = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = Element::new(mesh, t);
        for q in &GAUSS3 {
            let s = e.interpolate(&state.phi, q);
            weighted += e.area / 3.0 * params.df(s)? * (s - initial_mean);
        }
    }
    let bound_rhs = (c1 * weighted.abs() + c2) / initial_area + params.theta0 * initial_mean.abs();
    Ok(MeanMuReport { mean_mu, bound_rhs, ratio: mean_mu / bound_rhs })
}

/// Smallest separation margin of a trajectory and the per-state series.
pub fn separation_monitor<'a>(trajectory: impl IntoIterator<Item = &'a PhaseState>) -> (f64, Vec<f64>) {
    let series: Vec<f64> = trajectory.into_iter().map(|s| s.separation_margin).collect();
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    (if series.is_empty() { 1.0 } else { min }, series)
}

/// `||a - b||_#` for two fields of (nominally) equal mass. The mean of the
/// difference, which is rounding noise for conserved trajectories, is
/// removed before the inverse Laplacian is applied.
pub fn sharp_distance(mesh: &SurfaceMesh, a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a.len(), mesh.vertex_count())?;
    check_len(b.len(), mesh.vertex_count())?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = mesh.lumped_integral(&d) / mesh.surface_area();
    let centered: Vec<f64> = d.iter().map(|v| v - mean).collect();
    crate::calculus::hsharp_norm(mesh, &centered)
}

/// Human-readable summary of a failed step for diagnostic bundles.
pub fn describe_failure(err: &Error) -> String {
    match err {
        Error::StepFailure { reason, history } => {
            format!("{reason}; last residuals {:?}", &history[history.len().saturating_sub(5)..])
        }
        other => format!("{other}"),
    }
}
