//! Acceptance battery. Runs every criterion on its own thread and prints one
//! `PASS`/`FAIL` line per criterion, then exits non-zero if any failed.
//!
//! Built with `harness = false` so the summary is printed even when cargo
//! captures test output.

use std::process::ExitCode;
use std::thread;

use surfflow_core::cahn_hilliard::{ch_step, sharp_distance, ChOptions, PhaseState};
use surfflow_core::calculus::{
    check_transport_gradient, check_transport_identity, check_transport_mixed, check_transport_strain,
    laplace_beltrami_spectrum, rate_of_strain, triangle_matrix_norm_sq, TransportStencil,
};
use surfflow_core::material::MaterialParams;
use surfflow_core::mesh::{build_icosphere, evolve_step, sample_normal_velocity, NormalVelocityLaw, SurfaceMesh};
use surfflow_core::navier_stokes::{compute_lift, lift_divergence_residual};
use surfflow_core::sim::{
    contraction_exponent, initial_phase_field, verify_energy_inequality, EnergyLedger, InitialPhase, InitialVelocity,
    LedgerRecord, ScenarioConfig, Simulation,
};
use surfflow_core::Vec3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(cfg: ScenarioConfig) -> EnergyLedger {
    let mut sim = Simulation::new(cfg).expect("scenario builds");
    sim.run(|_, _| {}).expect("scenario runs to t_end");
    sim.into_ledger()
}

fn order(coarse: f64, fine: f64, levels: f64) -> f64 {
    (coarse / fine).log2() / levels
}

/// Stationary spinodal scenario at the default parameters, 1000 steps.
fn stationary_run() -> EnergyLedger {
    run(ScenarioConfig { t_end: 1.0, ..ScenarioConfig::spinodal(3, 2024) })
}

/// Breathing sphere, 1000 steps.
fn oscillating_run() -> EnergyLedger {
    run(ScenarioConfig { t_end: 1.0, ..ScenarioConfig::oscillating(3, 0.5, 6.0, 2024) })
}

/// Radius-2 sphere, where the lowest harmonic is linearly unstable at the
/// default parameters, so the noise actually separates into two phases.
fn separating_run() -> EnergyLedger {
    run(ScenarioConfig { radius: 2.0, dt: 0.1, t_end: 60.0, ..ScenarioConfig::spinodal(3, 7) })
}

fn operator_battery() -> Outcome {
    let m4 = build_icosphere(4, 1.0).unwrap();
    let ev = laplace_beltrami_spectrum(&m4, 16).unwrap();
    let dev = |range: std::ops::Range<usize>, exact: f64| {
        ev[range].iter().fold(0.0_f64, |m, l| m.max((l - exact).abs() / exact))
    };
    let (d1, d2, d3) = (dev(1..4, 2.0), dev(4..9, 6.0), dev(9..16, 12.0));
    let h_dev = m4.vertex_mean_curvature().iter().fold(0.0_f64, |m, h| m.max((h - 2.0).abs() / 2.0));
    let omega = Vec3::new(0.3, -0.7, 0.5);
    let strain: Vec<f64> = (3..=5)
        .map(|level| {
            let m = build_icosphere(level, 1.0).unwrap();
            let v: Vec<Vec3> = m.positions().iter().map(|x| omega.cross(*x)).collect();
            triangle_matrix_norm_sq(&m, &rate_of_strain(&m, &v).unwrap()).sqrt()
        })
        .collect();
    let shrink = [strain[0] / strain[1], strain[1] / strain[2]];
    let pass = d1 <= 0.02 && d2 <= 0.04 && d3 <= 0.06 && h_dev <= 0.025 && shrink.iter().all(|s| *s >= 1.7);
    outcome(
        pass,
        format!(
            "eigenvalue deviations {d1:.2e}/{d2:.2e}/{d3:.2e} (limits 2%/4%/6%), H deviation {h_dev:.2e}, \
             Killing strain shrink {:.2}x, {:.2}x",
            shrink[0], shrink[1]
        ),
    )
}

fn mass_conservation(stationary: &EnergyLedger, oscillating: &EnergyLedger) -> Outcome {
    let drift = |l: &EnergyLedger| {
        let r = l.records();
        let m0 = r[0].mass;
        let scale = m0.abs().max(r[0].area * 1e-3);
        r.iter().fold(0.0_f64, |m, x| m.max((x.mass - m0).abs() / scale))
    };
    let (a, b) = (drift(stationary), drift(oscillating));
    let steps = stationary.len().min(oscillating.len()) - 1;
    outcome(
        a <= 1e-8 && b <= 1e-8 && steps >= 1000,
        format!("relative mass drift {a:.2e} (stationary), {b:.2e} (oscillating) over {steps} steps"),
    )
}

fn inextensibility(oscillating: &EnergyLedger) -> Outcome {
    let r = oscillating.records();
    let a0 = r[0].area;
    let drift = r.iter().fold(0.0_f64, |m, x| m.max((x.area - a0).abs() / a0));
    let compat = r.iter().fold(0.0_f64, |m, x| m.max(x.compatibility));
    outcome(
        drift <= 1e-3 && compat <= 1e-10,
        format!("relative area drift {drift:.2e}, worst |int H v_n| / int |H v_n| = {compat:.2e}"),
    )
}

fn energy(stationary: &EnergyLedger, halving: &[f64]) -> Outcome {
    let r = stationary.records();
    let mut worst = f64::NEG_INFINITY;
    for w in r.windows(2) {
        worst = worst.max((w[1].e_tot - w[0].e_tot) / (1.0 + w[0].e_tot.abs()));
    }
    let steps = r.len() - 1;
    let spread = halving.windows(2).fold(0.0_f64, |m, w| m.max((w[0] - w[1]).abs() / w[0].max(w[1])));
    let finite = halving.iter().all(|c| c.is_finite());
    outcome(
        worst <= 1e-12 && steps >= 1000 && finite && spread <= 0.2,
        format!(
            "worst scaled energy increase {worst:.2e} over {steps} stationary steps; C_hat under dt-halving {:?} \
             (largest relative change {spread:.2e})",
            halving.iter().map(|c| format!("{c:.4e}")).collect::<Vec<_>>()
        ),
    )
}

fn separation(all: &[&EnergyLedger], stationary: &EnergyLedger, separating: &EnergyLedger) -> Outcome {
    let worst = all.iter().flat_map(|l| l.records()).fold(1.0_f64, |m, r| m.min(r.separation_margin));
    let stable = |l: &EnergyLedger| {
        let r = l.records();
        let last = r.last().unwrap().separation_margin;
        let half = r[r.len() / 2..].iter().fold(f64::INFINITY, |m, x| m.min(x.separation_margin));
        (half / last, last)
    };
    let (s0, d0) = stable(stationary);
    let (s1, d1) = stable(separating);
    outcome(
        worst >= 1e-9 && s0 >= 0.9 && s1 >= 0.9,
        format!(
            "smallest margin over all runs {worst:.3e}; final-half min / final: {s0:.4} (unit sphere, delta {d0:.3e}), \
             {s1:.4} (radius 2, delta {d1:.3e})"
        ),
    )
}

fn lift_order() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mut res, mut poisson, mut h) = (Vec::new(), Vec::new(), Vec::new());
    for level in 3..=5 {
        let m = build_icosphere(level, 1.0).unwrap();
        let vn = sample_normal_velocity(&m, &NormalVelocityLaw::Linear { amplitude: 1.0 }, 0.0, true).unwrap();
        let lift = compute_lift(&m, 0.0, &vn).unwrap();
        res.push(lift_divergence_residual(&m, &lift).unwrap());
        poisson.push(lift.solver_residual);
        h.push(m.max_edge_length());
    }
    (res, poisson, h)
}

fn divergence_splitting(all: &[&EnergyLedger]) -> Outcome {
    let (res, poisson, h) = lift_order();
    let p = order(res[0], res[2], 2.0);
    let c = (0..3).map(|k| (res[k] - poisson[k]) / h[k]).fold(0.0_f64, f64::max);
    let mut ratio = 0.0_f64;
    for r in all.iter().flat_map(|l| l.records().iter().skip(1)) {
        ratio = ratio.max(if r.velocity_gradient > 0.0 {
            r.divergence_residual / r.velocity_gradient
        } else if r.divergence_residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    outcome(
        p >= 0.9 && ratio <= 1e-8,
        format!(
            "lift residuals {:.3e}/{:.3e}/{:.3e} (order {p:.2}, C = {c:.3}); worst div V / grad V = {ratio:.2e}",
            res[0], res[1], res[2]
        ),
    )
}

fn transport_residual(level: u32, dt: f64) -> f64 {
    let law = NormalVelocityLaw::Oscillating { amplitude: 0.5, frequency: 6.0 };
    let m0 = build_icosphere(level, 1.0).unwrap();
    let m1 = evolve_step(&m0, &law, 0.0, dt, true).unwrap();
    let m2 = evolve_step(&m1, &law, dt, dt, true).unwrap();
    let ms = [&m0, &m1, &m2];
    let s = TransportStencil::new(&m0, &m1, &m2, dt).unwrap();
    let scalar = |f: &dyn Fn(Vec3, f64) -> f64| -> Vec<Vec<f64>> {
        (0..3).map(|k| ms[k].positions().iter().map(|&x| f(x, k as f64 * dt)).collect()).collect()
    };
    let tangent = |f: &dyn Fn(Vec3, f64) -> Vec3| -> Vec<Vec<Vec3>> {
        (0..3)
            .map(|k| {
                let m: &SurfaceMesh = ms[k];
                m.positions()
                    .iter()
                    .zip(m.vertex_normals())
                    .map(|(&x, &n)| {
                        let w = f(x, k as f64 * dt);
                        w - n * n.dot(w)
                    })
                    .collect()
            })
            .collect()
    };
    let eta = scalar(&|x, t| t.cos() + x.x() * x.y());
    let phi = scalar(&|x, t| x.z() + (2.0 * t).sin() * x.x());
    let u = tangent(&|x, t| Vec3::new(0.3, -0.2, 1.0).cross(x) * (1.0 + t));
    let v = tangent(&|x, t| Vec3::new(x.y(), t.cos(), x.x() * x.z()));
    let e3 = [&eta[0][..], &eta[1], &eta[2]];
    let p3 = [&phi[0][..], &phi[1], &phi[2]];
    let u3 = [&u[0][..], &u[1], &u[2]];
    let v3 = [&v[0][..], &v[1], &v[2]];
    check_transport_identity(&s, e3, p3).unwrap()
        + check_transport_gradient(&s, e3, p3).unwrap()
        + check_transport_mixed(&s, p3, u3).unwrap()
        + check_transport_strain(&s, e3, u3, v3).unwrap()
}

fn transport_identities() -> Outcome {
    let r: Vec<f64> = (3..=5).map(|level| transport_residual(level, 0.02 / f64::from(1u32 << (level - 3)))).collect();
    let p = order(r[0], r[2], 2.0);
    outcome(
        p >= 1.8,
        format!(
            "combined residuals {:.3e}/{:.3e}/{:.3e} at levels 3-5 with dt = h-scaled, order {p:.2}",
            r[0], r[1], r[2]
        ),
    )
}

fn density_config(dt: f64, material: MaterialParams, velocity: InitialVelocity) -> ScenarioConfig {
    ScenarioConfig {
        initial_phase: InitialPhase::Harmonic { mean: 0.1, amplitude: 0.4, degree: 2 },
        initial_velocity: velocity,
        material,
        dt,
        t_end: 0.02,
        ..ScenarioConfig::default()
    }
}

fn density_transport() -> Outcome {
    let rotation = InitialVelocity::Rotation { omega: Vec3::new(1.0, 0.5, 0.0) };
    let dts = [4e-3, 2e-3, 1e-3, 5e-4];
    let finals: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            run(density_config(dt, MaterialParams::default(), rotation)).records().last().unwrap().density_residual
        })
        .collect();
    // least-squares slope of log r against log dt
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = finals.iter().map(|r| r.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    let matched = MaterialParams { rho1_tilde: 2.0, rho2_tilde: 2.0, ..MaterialParams::default() };
    let worst_matched = run(density_config(1e-3, matched, InitialVelocity::Zero))
        .records()
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.density_residual));
    outcome(
        slope >= 0.9 && worst_matched <= 1e-10,
        format!(
            "final residuals {:?} for dt = {dts:?} (order {slope:.2}); matched densities worst {worst_matched:.2e}",
            finals.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn y2_perturbation(mesh: &SurfaceMesh, phi: &[f64], eps: f64) -> Vec<f64> {
    let y2: Vec<f64> = mesh.positions().iter().map(|p| 1.5 * p.z() * p.z() - 0.5).collect();
    let mean = mesh.lumped_integral(&y2) / mesh.surface_area();
    phi.iter().zip(&y2).map(|(a, y)| a + eps * (y - mean)).collect()
}

fn contraction() -> Outcome {
    let cfg = ScenarioConfig { t_end: 0.2, ..ScenarioConfig::spinodal(3, 3) };
    let mesh = build_icosphere(3, 1.0).unwrap();
    let phi0 = initial_phase_field(&mesh, &cfg.initial_phase);
    let phi1 = y2_perturbation(&mesh, &phi0, 1e-6);
    let mut a = Simulation::with_phase(cfg.clone(), phi0).unwrap();
    let mut b = Simulation::with_phase(cfg, phi1).unwrap();
    let (mut ts, mut ds) = (Vec::new(), Vec::new());
    loop {
        ts.push(a.time());
        ds.push(sharp_distance(a.mesh(), &a.phase().phi, &b.phase().phi).unwrap());
        if a.is_finished() {
            break;
        }
        a.step().unwrap();
        b.step().unwrap();
    }
    let lambda = contraction_exponent(&ts, &ds);

    // uncoupled, zero velocity, convex potential
    let p = MaterialParams { theta: 0.8, theta0: 0.6, ..MaterialParams::default() };
    let phi0 =
        initial_phase_field(&mesh, &InitialPhase::Random { mean: 0.1, amplitude: 0.3, seed: 1, smoothing_passes: 3 });
    let phi1 = y2_perturbation(&mesh, &phi0, 1e-6);
    let mut sa = PhaseState::new(&mesh, &p, 0.0, phi0).unwrap();
    let mut sb = PhaseState::new(&mesh, &p, 0.0, phi1).unwrap();
    let zero = vec![Vec3::ZERO; mesh.vertex_count()];
    let d0 = sharp_distance(&mesh, &sa.phi, &sb.phi).unwrap();
    let (mut prev, mut monotone) = (d0, true);
    for _ in 0..100 {
        sa = ch_step(&mesh, &mesh, &sa, &zero, &p, 1e-3, &ChOptions::default()).unwrap().0;
        sb = ch_step(&mesh, &mesh, &sb, &zero, &p, 1e-3, &ChOptions::default()).unwrap().0;
        let d = sharp_distance(&mesh, &sa.phi, &sb.phi).unwrap();
        monotone &= d <= prev;
        prev = d;
    }
    outcome(
        lambda.is_some_and(f64::is_finite) && monotone && prev < d0,
        format!(
            "coupled: distance {:.3e} -> {:.3e}, fitted Lambda {:.3}; zero velocity, theta0 <= theta: {d0:.3e} -> {prev:.3e} \
             (monotone {monotone})",
            ds[0],
            ds.last().unwrap(),
            lambda.unwrap_or(f64::NAN)
        ),
    )
}

fn determinism() -> Outcome {
    let cfg = ScenarioConfig { t_end: 0.05, ..ScenarioConfig::oscillating(3, 0.5, 6.0, 99) };
    let bits = |l: &EnergyLedger| -> Vec<u64> {
        l.records().iter().flat_map(|r: &LedgerRecord| r.columns().map(f64::to_bits)).collect()
    };
    let (a, b) = (run(cfg.clone()), run(cfg));
    outcome(bits(&a) == bits(&b) && a == b, format!("{} rows compared bit for bit", a.len()))
}

fn main() -> ExitCode {
    let results: Vec<(u32, &str, Outcome)> = thread::scope(|s| {
        let stationary = s.spawn(stationary_run);
        let oscillating = s.spawn(oscillating_run);
        let separating = s.spawn(separating_run);
        let halving = s.spawn(|| {
            [2e-3, 1e-3, 5e-4]
                .map(|dt| {
                    let cfg = ScenarioConfig { dt, t_end: 0.2, ..ScenarioConfig::oscillating(3, 0.5, 6.0, 5) };
                    let params = cfg.material;
                    verify_energy_inequality(&run(cfg), &params).c_hat
                })
                .to_vec()
        });
        let c1 = s.spawn(operator_battery);
        let c7 = s.spawn(transport_identities);
        let c8 = s.spawn(density_transport);
        let c9 = s.spawn(contraction);
        let c10 = s.spawn(determinism);
        let (st, os, sep) = (stationary.join().unwrap(), oscillating.join().unwrap(), separating.join().unwrap());
        let all = [&st, &os, &sep];
        vec![
            (1, "operator battery", c1.join().unwrap()),
            (2, "mass conservation", mass_conservation(&st, &os)),
            (3, "inextensibility", inextensibility(&os)),
            (4, "energy dissipation", energy(&st, &halving.join().unwrap())),
            (5, "strict separation", separation(&all, &st, &sep)),
            (6, "divergence splitting", divergence_splitting(&all)),
            (7, "transport identities", c7.join().unwrap()),
            (8, "density transport", c8.join().unwrap()),
            (9, "contraction", c9.join().unwrap()),
            (10, "determinism", c10.join().unwrap()),
        ]
    });
    let mut failed = 0;
    for (k, name, o) in &results {
        println!("criterion {k:>2} {:<22} {}  {}", name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
