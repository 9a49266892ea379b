//! The coupled time loop and its per-step energy ledger.
//!
//! One step from `t` to `t + dt`: move the mesh, lift the new normal
//! velocity, advance the phase field with the old `V` plus the new lift,
//! then advance `V` with the new `phi` and `mu`. A failed step is retried
//! as two half steps, recursively, at most [`MAX_HALVINGS`] levels deep.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cahn_hilliard::{ch_energy, ch_step_cached, mean_mu_bound_report, ChOptions, PhaseState};
use crate::calculus::{mass_matrix, stiffness_matrix, GAUSS3};
use crate::linalg::FactorCache;
use crate::material::MaterialParams;
use crate::mesh::{build_icosphere, evolve_step, sample_normal_velocity, NormalVelocityLaw, SurfaceMesh};
use crate::navier_stokes::{
    compute_lift, density_transport_residual, divergence_residual, lift_divergence_residual, ns_step_cached,
    strain_energy, velocity_gradient_norm, FlowState, Lift, NsInputs, NsOptions, DEFAULT_STABILIZATION,
};
use crate::{Error, Result, Vec3};

/// Depth of the step-halving retry.
pub const MAX_HALVINGS: u32 = 5;

/// Initial phase field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialPhase {
    Constant {
        value: f64,
    },
    /// `mean + amplitude Y_l` with the zonal harmonic of degree 1 or 2 in
    /// `z / |x|`.
    Harmonic {
        mean: f64,
        amplitude: f64,
        degree: u32,
    },
    /// `mean` plus seeded uniform noise in `[-amplitude, amplitude]`,
    /// smoothed by `smoothing_passes` lumped Laplacian passes.
    Random {
        mean: f64,
        amplitude: f64,
        seed: u64,
        smoothing_passes: u32,
    },
}

/// Initial divergence-free velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialVelocity {
    Zero,
    /// Rigid rotation `omega x x`.
    Rotation {
        omega: Vec3,
    },
}

/// A complete, validated-on-use scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub radius: f64,
    pub subdivision: u32,
    pub law: NormalVelocityLaw,
    pub project_compatible: bool,
    pub initial_phase: InitialPhase,
    pub initial_velocity: InitialVelocity,
    pub material: MaterialParams,
    pub dt: f64,
    pub t_end: f64,
    /// `None` selects `1e4 nu_min / h_mean`.
    pub penalty_weight: Option<f64>,
    pub stabilization: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            subdivision: 3,
            law: NormalVelocityLaw::Stationary,
            project_compatible: true,
            initial_phase: InitialPhase::Constant { value: 0.0 },
            initial_velocity: InitialVelocity::Zero,
            material: MaterialParams::default(),
            dt: 1e-3,
            t_end: 1e-1,
            penalty_weight: None,
            stabilization: DEFAULT_STABILIZATION,
        }
    }
}

impl ScenarioConfig {
    /// Stationary unit sphere with seeded noise around zero.
    pub fn spinodal(subdivision: u32, seed: u64) -> Self {
        Self {
            subdivision,
            initial_phase: InitialPhase::Random { mean: 0.0, amplitude: 0.05, seed, smoothing_passes: 5 },
            ..Self::default()
        }
    }

    /// Unit sphere breathing with `v_n = a cos(omega t) z`.
    pub fn oscillating(subdivision: u32, amplitude: f64, frequency: f64, seed: u64) -> Self {
        Self { law: NormalVelocityLaw::Oscillating { amplitude, frequency }, ..Self::spinodal(subdivision, seed) }
    }

    /// Checks everything that does not need the mesh.
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(Error::Parameter(format!("t_end must be at least dt, got {}", self.t_end)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Parameter(format!("radius must be positive, got {}", self.radius)));
        }
        if let Some(w) = self.penalty_weight {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Parameter(format!("penalty weight must be positive, got {w}")));
            }
        }
        if !(self.stabilization > 0.0 && self.stabilization.is_finite()) {
            return Err(Error::Parameter(format!("stabilization must be positive, got {}", self.stabilization)));
        }
        match self.initial_phase {
            InitialPhase::Constant { value: m }
            | InitialPhase::Harmonic { mean: m, .. }
            | InitialPhase::Random { mean: m, .. } => {
                if !(m.abs() < 1.0) {
                    return Err(Error::InvalidMean(m));
                }
            }
        }
        if let InitialPhase::Harmonic { degree, .. } = self.initial_phase {
            if !(1..=2).contains(&degree) {
                return Err(Error::Parameter(format!("harmonic degree must be 1 or 2, got {degree}")));
            }
        }
        match self.law {
            NormalVelocityLaw::Stationary => {}
            NormalVelocityLaw::Linear { amplitude } | NormalVelocityLaw::Oscillating { amplitude, .. } => {
                if !amplitude.is_finite() {
                    return Err(Error::Parameter("normal velocity amplitude must be finite".into()));
                }
            }
        }
        Ok(())
    }

    fn ns_options(&self) -> NsOptions {
        NsOptions { penalty_weight: self.penalty_weight, stabilization: self.stabilization, ..NsOptions::default() }
    }
}

/// Nodal initial phase field on `mesh`.
pub fn initial_phase_field(mesh: &SurfaceMesh, init: &InitialPhase) -> Vec<f64> {
    let x = mesh.positions();
    match *init {
        InitialPhase::Constant { value } => vec![value; x.len()],
        InitialPhase::Harmonic { mean, amplitude, degree } => x
            .iter()
            .map(|p| {
                let c = p.z() / p.norm();
                mean + amplitude * if degree == 1 { c } else { 0.5 * (3.0 * c * c - 1.0) }
            })
            .collect(),
        InitialPhase::Random { mean, amplitude, seed, smoothing_passes } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut phi: Vec<f64> = x
                .iter()
                .map(|_| {
                    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                    mean + amplitude * (2.0 * u - 1.0)
                })
                .collect();
            let k = stiffness_matrix(mesh);
            let diag = k.diagonal();
            for _ in 0..smoothing_passes {
                // damped Jacobi step of the lumped heat equation
                let kphi = k.mul_vec(&phi);
                phi.iter_mut().zip(kphi.iter().zip(&diag)).for_each(|(p, (r, d))| *p -= 0.5 * r / d);
            }
            phi
        }
    }
}

/// Nodal initial velocity, projected onto the vertex tangent planes.
pub fn initial_velocity_field(mesh: &SurfaceMesh, init: &InitialVelocity) -> Vec<Vec3> {
    match *init {
        InitialVelocity::Zero => vec![Vec3::ZERO; mesh.vertex_count()],
        InitialVelocity::Rotation { omega } => mesh
            .positions()
            .iter()
            .zip(mesh.vertex_normals())
            .map(|(x, n)| {
                let v = omega.cross(*x);
                v - *n * n.dot(v)
            })
            .collect(),
    }
}

/// One ledger row.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LedgerRecord {
    pub time: f64,
    pub e_kin: f64,
    pub e_grad: f64,
    pub e_pot: f64,
    pub e_tot: f64,
    /// `2 int nu |E_S(V)|^2 + int |grad mu|^2`
    pub dissipation: f64,
    pub mass: f64,
    pub area: f64,
    pub volume: f64,
    pub separation_margin: f64,
    pub divergence_residual: f64,
    pub normal_residual: f64,
    pub mean_mu: f64,
    pub mubar_ratio: f64,
    pub density_residual: f64,
    /// Step that produced this row; zero for the initial row.
    pub dt: f64,
    /// `||E_S(V)||^2`
    pub strain_sq: f64,
    /// `||grad mu||^2`
    pub grad_mu_sq: f64,
    /// `||grad V||`, the scale of the divergence bound.
    pub velocity_gradient: f64,
    /// `|int H v_n| / int |H v_n|` of the compatible normal velocity.
    pub compatibility: f64,
    /// `||div u_hat + H v_n||`
    pub lift_residual: f64,
}

impl LedgerRecord {
    pub const COLUMNS: [&'static str; 15] = [
        "t",
        "E_kin",
        "E_grad",
        "E_pot",
        "E_tot",
        "dissipation",
        "mass",
        "area",
        "volume",
        "sep_margin",
        "div_res",
        "normal_res",
        "mean_mu",
        "mubar_ratio",
        "rho_transport_res",
    ];

    /// Values in [`Self::COLUMNS`] order.
    pub fn columns(&self) -> [f64; 15] {
        [
            self.time,
            self.e_kin,
            self.e_grad,
            self.e_pot,
            self.e_tot,
            self.dissipation,
            self.mass,
            self.area,
            self.volume,
            self.separation_margin,
            self.divergence_residual,
            self.normal_residual,
            self.mean_mu,
            self.mubar_ratio,
            self.density_residual,
        ]
    }

    /// Inverse of [`Self::columns`]; the auxiliary fields are zero.
    pub fn from_columns(c: &[f64; 15]) -> Self {
        Self {
            time: c[0],
            e_kin: c[1],
            e_grad: c[2],
            e_pot: c[3],
            e_tot: c[4],
            dissipation: c[5],
            mass: c[6],
            area: c[7],
            volume: c[8],
            separation_margin: c[9],
            divergence_residual: c[10],
            normal_residual: c[11],
            mean_mu: c[12],
            mubar_ratio: c[13],
            density_residual: c[14],
            ..Self::default()
        }
    }

    /// Index into [`Self::COLUMNS`].
    pub fn column_index(name: &str) -> Option<usize> {
        Self::COLUMNS.iter().position(|c| *c == name)
    }
}

/// Append-only, time-monotone sequence of [`LedgerRecord`]s.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyLedger {
    records: Vec<LedgerRecord>,
    /// `max(0, -min Psi)`
    potential_floor: f64,
}

impl EnergyLedger {
    pub fn new(params: &MaterialParams) -> Self {
        Self { records: Vec::new(), potential_floor: (-params.psi_min()).max(0.0) }
    }

    pub fn records(&self) -> &[LedgerRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn potential_floor(&self) -> f64 {
        self.potential_floor
    }

    /// Appends a row; rejects non-finite entries, a time going backwards and
    /// a potential energy below `-floor * area`.
    pub fn push(&mut self, r: LedgerRecord) -> Result<()> {
        if let Some(i) = r.columns().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("ledger column {}", LedgerRecord::COLUMNS[i])));
        }
        if let Some(last) = self.records.last() {
            if !(r.time > last.time) {
                return Err(Error::Parameter(format!("ledger time {} does not advance past {}", r.time, last.time)));
            }
        }
        if r.e_pot < -self.potential_floor * r.area * (1.0 + 1e-12) - 1e-12 {
            return Err(Error::Parameter(format!("potential energy {} below its floor", r.e_pot)));
        }
        self.records.push(r);
        Ok(())
    }
}

/// Result of [`verify_energy_inequality`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    /// Smallest `C >= 0` with `r_n <= C (1 + E_hat_n)` for every step.
    pub c_hat: f64,
    /// Step attaining `c_hat`, if any step is positive.
    pub worst_step: Option<usize>,
    /// Largest `r_n`.
    pub max_rate: f64,
}

/// Fits the growth constant of the shifted energy
/// `E_hat = E_tot + max(0, -min Psi) |Gamma|` through
/// `r_n = (E_hat_{n+1} - E_hat_n)/dt + nu_min ||E_S(V)||^2 + ||grad mu||^2 / 4`.
pub fn verify_energy_inequality(ledger: &EnergyLedger, params: &MaterialParams) -> EnergyReport {
    let floor = (-params.psi_min()).max(0.0);
    let shifted = |r: &LedgerRecord| r.e_tot + floor * r.area;
    let mut report = EnergyReport { c_hat: 0.0, worst_step: None, max_rate: f64::NEG_INFINITY };
    for (n, w) in ledger.records().windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        let dt = b.time - a.time;
        let rate = (shifted(b) - shifted(a)) / dt + params.nu_min() * b.strain_sq + 0.25 * b.grad_mu_sq;
        report.max_rate = report.max_rate.max(rate);
        let c = rate / (1.0 + shifted(a));
        if c > report.c_hat {
            report.c_hat = c;
            report.worst_step = Some(n);
        }
    }
    report
}

/// Diagnostics of one accepted step, beyond the ledger row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepDiagnostics {
    pub ch_iterations: usize,
    pub ns_iterations: usize,
    pub halvings: u32,
}

/// Running coupled simulation.
pub struct Simulation {
    config: ScenarioConfig,
    mesh: SurfaceMesh,
    phase: PhaseState,
    flow: FlowState,
    lift: Lift,
    ledger: EnergyLedger,
    initial_mean: f64,
    initial_area: f64,
    steps: usize,
    ch_cache: FactorCache,
    ns_cache: FactorCache,
}

impl Simulation {
    /// Builds the initial mesh and fields and records the `t = 0` row.
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let mesh = build_icosphere(config.subdivision, config.radius)?;
        let phi = initial_phase_field(&mesh, &config.initial_phase);
        Self::start(config, mesh, phi)
    }

    /// Like [`Simulation::new`] but with nodal initial values `phi` on the
    /// scenario mesh; `config.initial_phase` is ignored.
    pub fn with_phase(config: ScenarioConfig, phi: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let mesh = build_icosphere(config.subdivision, config.radius)?;
        if phi.len() != mesh.vertex_count() {
            return Err(Error::Dimension { expected: mesh.vertex_count(), got: phi.len() });
        }
        Self::start(config, mesh, phi)
    }

    fn start(config: ScenarioConfig, mesh: SurfaceMesh, phi: Vec<f64>) -> Result<Self> {
        let params = config.material;
        if let Some(i) = phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("initial phase field at vertex {i}")));
        }
        let max = phi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(max <= 1.0 - params.eps_guard) {
            return Err(Error::Parameter(format!("initial phase field reaches |phi| = {max}")));
        }
        let area = mesh.surface_area();
        let mean = mesh.lumped_integral(&phi) / area;
        if !(mean.abs() < 1.0) {
            return Err(Error::InvalidMean(mean));
        }
        let phase = PhaseState::new(&mesh, &params, 0.0, phi)?;
        let vn = sample_normal_velocity(&mesh, &config.law, 0.0, config.project_compatible)?;
        let lift = compute_lift(&mesh, 0.0, &vn)?;
        let v0 = initial_velocity_field(&mesh, &config.initial_velocity);
        let flow = FlowState::new(&mesh, &phase, &params, v0, lift.u_hat.to_vec())?;
        let mut sim = Self {
            config,
            mesh,
            phase,
            flow,
            lift,
            ledger: EnergyLedger::new(&params),
            initial_mean: mean,
            initial_area: area,
            steps: 0,
            ch_cache: FactorCache::default(),
            ns_cache: FactorCache::default(),
        };
        let row = sim.record(&sim.current(), None, 0.0, 0.0)?;
        sim.ledger.push(row)?;
        Ok(sim)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        &self.mesh
    }

    pub fn phase(&self) -> &PhaseState {
        &self.phase
    }

    pub fn flow(&self) -> &FlowState {
        &self.flow
    }

    pub fn lift(&self) -> &Lift {
        &self.lift
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> EnergyLedger {
        self.ledger
    }

    pub fn time(&self) -> f64 {
        self.phase.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn initial_mean(&self) -> f64 {
        self.initial_mean
    }

    pub fn is_finished(&self) -> bool {
        self.time() >= self.config.t_end * (1.0 - 1e-12)
    }

    /// Full surface velocity `V + u_hat + v_n n`, for visualization.
    pub fn surface_velocity(&self) -> Vec<Vec3> {
        let n = self.mesh.vertex_normals();
        (0..self.mesh.vertex_count())
            .map(|i| self.flow.velocity[i] + self.lift.u_hat[i] + n[i] * self.lift.normal_velocity[i])
            .collect()
    }

    /// Advances by `min(dt, t_end - t)` with the halving retry.
    pub fn step(&mut self) -> Result<StepDiagnostics> {
        let dt = self.config.dt.min(self.config.t_end - self.time());
        if !(dt > 0.0) {
            return Err(Error::Parameter("simulation already reached t_end".into()));
        }
        let mut diag = StepDiagnostics::default();
        let mut failures = Vec::new();
        self.advance(dt, 0, &mut diag, &mut failures)?;
        Ok(diag)
    }

    /// Steps until `t_end`, calling `observer` after every accepted step.
    pub fn run(&mut self, mut observer: impl FnMut(&Simulation, &StepDiagnostics)) -> Result<()> {
        while !self.is_finished() {
            let d = self.step()?;
            observer(self, &d);
        }
        Ok(())
    }

    fn advance(&mut self, dt: f64, depth: u32, diag: &mut StepDiagnostics, failures: &mut Vec<String>) -> Result<()> {
        match self.try_step(dt) {
            Ok((accepted, ch, ns)) => {
                let Accepted { mesh, phase, flow, lift, row } = accepted;
                self.ledger.push(row)?;
                self.mesh = mesh;
                self.phase = phase;
                self.flow = flow;
                self.lift = lift;
                self.steps += 1;
                diag.ch_iterations += ch;
                diag.ns_iterations += ns;
                diag.halvings = diag.halvings.max(depth);
                Ok(())
            }
            Err(err) if depth < MAX_HALVINGS && retryable(&err) => {
                failures.push(format!("t = {:.6e}, dt = {dt:.3e}: {err}", self.time()));
                self.advance(0.5 * dt, depth + 1, diag, failures)?;
                self.advance(0.5 * dt, depth + 1, diag, failures)
            }
            Err(err) => {
                failures.push(format!("t = {:.6e}, dt = {dt:.3e}: {err}", self.time()));
                let history = match &err {
                    Error::StepFailure { history, .. } => history.clone(),
                    _ => Vec::new(),
                };
                Err(Error::StepFailure {
                    reason: format!("step failed after {depth} halvings; attempts: {}", failures.join(" | ")),
                    history,
                })
            }
        }
    }

    fn try_step(&mut self, dt: f64) -> Result<(Accepted, usize, usize)> {
        let c = self.config.clone();
        let params = c.material;
        let t = self.time();
        let mesh_new = evolve_step(&self.mesh, &c.law, t, dt, c.project_compatible)?;
        let vn = sample_normal_velocity(&mesh_new, &c.law, t + dt, c.project_compatible)?;
        let lift = compute_lift(&mesh_new, t + dt, &vn)?;
        let transport: Vec<Vec3> = self.flow.velocity.iter().zip(lift.u_hat.iter()).map(|(a, b)| *a + *b).collect();
        let ch_opts = ChOptions { kinetic_coupling: 1.0, ..ChOptions::default() };
        let (phase, ch) =
            ch_step_cached(&self.mesh, &mesh_new, &self.phase, &transport, &params, dt, &ch_opts, &mut self.ch_cache)?;
        let inputs = NsInputs {
            mesh_old: &self.mesh,
            mesh_new: &mesh_new,
            flow: &self.flow,
            lift: &lift,
            phase_old: &self.phase,
            phase_new: &phase,
            params: &params,
            dt,
        };
        let (flow, ns) = ns_step_cached(&inputs, &c.ns_options(), &mut self.ns_cache)?;
        let density = density_transport_residual(
            &self.mesh,
            &mesh_new,
            &self.phase,
            &phase,
            &flow,
            &params,
            dt,
            c.stabilization,
        )?;
        let next = Accepted { mesh: mesh_new, phase, flow, lift, row: LedgerRecord::default() };
        let row = self.record(&next, Some(ns.divergence_residual), density, dt)?;
        Ok((Accepted { row, ..next }, ch.iterations, ns.iterations))
    }

    fn current(&self) -> Accepted {
        Accepted {
            mesh: self.mesh.clone(),
            phase: self.phase.clone(),
            flow: self.flow.clone(),
            lift: self.lift.clone(),
            row: LedgerRecord::default(),
        }
    }

    fn record(&self, s: &Accepted, divergence: Option<f64>, density: f64, dt: f64) -> Result<LedgerRecord> {
        let params = &self.config.material;
        let mesh = &s.mesh;
        let (e_grad, e_pot, grad_mu_sq) = ch_energy(mesh, &s.phase, params)?;
        let v: &[Vec3] = &s.flow.velocity;
        let strain_nu = strain_energy(mesh, v, |x| params.viscosity(x), &s.phase.phi);
        let strain_sq = strain_energy(mesh, v, |_| 1.0, &s.phase.phi);
        let divergence = match divergence {
            Some(d) => d,
            None => divergence_residual(mesh, v, &s.flow.pressure, self.config.stabilization)?,
        };
        let mubar = mean_mu_bound_report(mesh, &s.phase, params, self.initial_mean, self.initial_area)?;
        let vn = &s.lift.normal_velocity;
        let signed = mesh.curvature_integral(vn);
        let total: f64 =
            (0..vn.len()).map(|i| (mesh.curvature_areas()[i] * mesh.vertex_mean_curvature()[i] * vn[i]).abs()).sum();
        Ok(LedgerRecord {
            time: s.phase.time,
            e_kin: s.flow.kinetic_energy,
            e_grad,
            e_pot,
            e_tot: s.flow.kinetic_energy + e_grad + e_pot,
            dissipation: 2.0 * strain_nu + params.mobility * grad_mu_sq,
            mass: s.phase.total_mass,
            area: mesh.surface_area(),
            volume: mesh.volume_enclosed(),
            separation_margin: s.phase.separation_margin,
            divergence_residual: divergence,
            normal_residual: crate::calculus::normal_residual(mesh, v),
            mean_mu: mubar.mean_mu,
            mubar_ratio: mubar.ratio,
            density_residual: density,
            dt,
            strain_sq,
            grad_mu_sq,
            velocity_gradient: velocity_gradient_norm(mesh, v),
            compatibility: if total > 0.0 { signed.abs() / total } else { 0.0 },
            lift_residual: lift_divergence_residual(mesh, &s.lift)?,
        })
    }
}

/// Candidate state of one step, committed only when the step succeeds.
struct Accepted {
    mesh: SurfaceMesh,
    phase: PhaseState,
    flow: FlowState,
    lift: Lift,
    row: LedgerRecord,
}

fn retryable(err: &Error) -> bool {
    !matches!(
        err,
        Error::Parameter(_) | Error::Dimension { .. } | Error::MismatchedConnectivity | Error::InvalidMean(_)
    )
}

/// Runs a scenario to `t_end`.
pub fn simulate(config: ScenarioConfig) -> Result<Simulation> {
    let mut sim = Simulation::new(config)?;
    sim.run(|_, _| {})?;
    Ok(sim)
}

/// Smallest `Lambda` with `d_n <= exp(Lambda t_n) d_0` over a sampled
/// distance history; `times[0]` is the reference time. Negative values mean
/// contraction. `None` for fewer than two samples or a zero initial distance.
pub fn contraction_exponent(times: &[f64], distances: &[f64]) -> Option<f64> {
    if times.len() != distances.len() || times.len() < 2 || !(distances[0] > 0.0) {
        return None;
    }
    let (t0, d0) = (times[0], distances[0]);
    times[1..]
        .iter()
        .zip(&distances[1..])
        .map(|(t, d)| libm::log(d / d0) / (t - t0))
        .fold(None, |m: Option<f64>, l| Some(m.map_or(l, |m| m.max(l))))
}

/// `int phi` computed with the consistent mass, for cross-checking the
/// lumped value stored in the state.
pub fn consistent_mass(mesh: &SurfaceMesh, phi: &[f64]) -> f64 {
    let ones = vec![1.0; mesh.vertex_count()];
    mass_matrix(mesh).bilinear(&ones, phi)
}

/// `int phi^2` with the Gauss rule, equal to `phi^T M phi`.
pub fn gauss_l2_sq(mesh: &SurfaceMesh, phi: &[f64]) -> f64 {
    let mut s = 0.0;
    for t in 0..mesh.triangle_count() {
        let e = crate::calculus::Element::new(mesh, t);
        for q in &GAUSS3 {
            let v = e.interpolate(phi, q);
            s += e.area / 3.0 * v * v;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_scenario_is_flat() {
        let cfg = ScenarioConfig { subdivision: 2, dt: 0.01, t_end: 0.05, ..ScenarioConfig::default() };
        let sim = simulate(cfg).unwrap();
        let rows = sim.ledger().records();
        assert_eq!(rows.len(), 6);
        for r in rows {
            assert!(r.e_tot.abs() < 1e-14 && r.e_kin == 0.0 && r.mass.abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let c = ScenarioConfig { initial_phase: InitialPhase::Constant { value: 1.5 }, ..ScenarioConfig::default() };
        assert!(matches!(Simulation::new(c), Err(Error::InvalidMean(_))));
        let c = ScenarioConfig { dt: 0.0, ..ScenarioConfig::default() };
        assert!(Simulation::new(c).is_err());
        let c = ScenarioConfig { t_end: 1e-4, ..ScenarioConfig::default() };
        assert!(Simulation::new(c).is_err());
    }

    #[test]
    fn random_field_is_seeded() {
        let m = build_icosphere(2, 1.0).unwrap();
        let init = InitialPhase::Random { mean: 0.0, amplitude: 0.05, seed: 7, smoothing_passes: 5 };
        let a = initial_phase_field(&m, &init);
        assert_eq!(a, initial_phase_field(&m, &init));
        assert!(a.iter().all(|v| v.abs() <= 0.05));
        let other = InitialPhase::Random { mean: 0.0, amplitude: 0.05, seed: 8, smoothing_passes: 5 };
        assert_ne!(a, initial_phase_field(&m, &other));
    }
}
