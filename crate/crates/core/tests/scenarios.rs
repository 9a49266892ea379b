use surfflow_core::material::MaterialParams;
use surfflow_core::sim::{
    contraction_exponent, simulate, verify_energy_inequality, EnergyLedger, InitialPhase, InitialVelocity,
    LedgerRecord, ScenarioConfig, Simulation,
};
use surfflow_core::{Error, Vec3};

fn ledger(cfg: ScenarioConfig) -> EnergyLedger {
    simulate(cfg).expect("scenario runs").into_ledger()
}

fn last_energy(l: &EnergyLedger) -> f64 {
    l.records().last().unwrap().e_tot
}

#[test]
fn stationary_spinodal_loses_energy_and_keeps_mass() {
    let cfg = ScenarioConfig { dt: 1e-2, t_end: 0.3, ..ScenarioConfig::spinodal(3, 11) };
    let l = ledger(cfg.clone());
    assert_eq!(l.len(), 31);
    let m0 = l.records()[0].mass;
    for w in l.records().windows(2) {
        assert!(w[1].e_tot <= w[0].e_tot + 1e-12, "{} -> {}", w[0].e_tot, w[1].e_tot);
        assert!((w[1].mass - m0).abs() <= 1e-12);
        assert!(w[1].separation_margin > 0.0);
    }
    assert!(verify_energy_inequality(&l, &cfg.material).c_hat <= 1e-8);
}

#[test]
fn energy_growth_constant_follows_a_power_of_the_amplitude() {
    let c = |a: f64| {
        let cfg = ScenarioConfig { subdivision: 2, dt: 2e-3, t_end: 0.2, ..ScenarioConfig::oscillating(2, a, 6.0, 5) };
        verify_energy_inequality(&ledger(cfg.clone()), &cfg.material).c_hat
    };
    let (c1, c2, c4) = (c(0.1), c(0.2), c(0.4));
    assert!(c1 > 0.0 && c1 < c2 && c2 < c4, "{c1:e} {c2:e} {c4:e}");
    // near a quiescent phase field the worst step is fed by the kinetic
    // energy the lift injects, which is quadratic in the amplitude
    for (lo, hi) in [(c1, c2), (c2, c4)] {
        let power = (hi / lo).log2();
        assert!((1.0..=2.2).contains(&power), "{c1:e} {c2:e} {c4:e}");
    }
}

#[test]
fn halving_the_step_barely_moves_the_final_energy() {
    for base in [
        ScenarioConfig { t_end: 0.1, ..ScenarioConfig::spinodal(2, 9) },
        ScenarioConfig { t_end: 0.1, ..ScenarioConfig::oscillating(2, 0.5, 6.0, 9) },
    ] {
        let coarse = last_energy(&ledger(ScenarioConfig { dt: 2e-3, ..base.clone() }));
        let fine = last_energy(&ledger(ScenarioConfig { dt: 1e-3, ..base }));
        assert!((coarse - fine).abs() <= 0.05 * fine.abs(), "{coarse} vs {fine}");
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = ScenarioConfig {
        subdivision: 2,
        dt: 5e-3,
        t_end: 0.05,
        initial_velocity: InitialVelocity::Rotation { omega: Vec3::new(0.0, 0.3, 1.0) },
        ..ScenarioConfig::oscillating(2, 0.3, 4.0, 77)
    };
    let (a, b) = (ledger(cfg.clone()), ledger(cfg));
    for (x, y) in a.records().iter().zip(b.records()) {
        assert_eq!(x.columns().map(f64::to_bits), y.columns().map(f64::to_bits));
    }
}

#[test]
fn explicit_phase_must_match_the_mesh() {
    let cfg = ScenarioConfig { subdivision: 1, ..ScenarioConfig::default() };
    match Simulation::with_phase(cfg.clone(), vec![0.1; 5]) {
        Err(Error::Dimension { expected: 42, got: 5 }) => {}
        Err(e) => panic!("unexpected error {e}"),
        Ok(_) => panic!("accepted a short phase field"),
    }
    assert!(Simulation::with_phase(cfg.clone(), vec![f64::NAN; 42]).is_err());
    let sim = Simulation::with_phase(cfg, vec![0.25; 42]).unwrap();
    assert!((sim.initial_mean() - 0.25).abs() < 1e-14);
}

#[test]
fn invalid_scenarios_are_rejected() {
    let hot = MaterialParams { theta: 2.0, theta0: 1.0, ..MaterialParams::default() };
    assert!(Simulation::new(ScenarioConfig { material: hot, ..ScenarioConfig::default() }).is_err());
    assert!(Simulation::new(ScenarioConfig { dt: 0.0, ..ScenarioConfig::default() }).is_err());
    let pure = ScenarioConfig { initial_phase: InitialPhase::Constant { value: 1.0 }, ..ScenarioConfig::default() };
    assert!(Simulation::new(pure).is_err());
}

#[test]
fn contraction_exponent_of_an_exponential() {
    let times: Vec<f64> = (0..10).map(|k| 0.1 * k as f64).collect();
    let d: Vec<f64> = times.iter().map(|t| 0.3 * (-2.0 * t).exp()).collect();
    let lambda = contraction_exponent(&times, &d).unwrap();
    assert!((lambda + 2.0).abs() < 1e-10, "{lambda}");
    assert!(contraction_exponent(&times[..1], &d[..1]).is_none());
    assert!(contraction_exponent(&times, &d[..3]).is_none());
    assert!(contraction_exponent(&times, &[0.0; 10]).is_none());
}

#[test]
fn ledger_columns_round_trip() {
    let mut c = [0.0; 15];
    for (k, v) in c.iter_mut().enumerate() {
        *v = (k as f64 + 0.5) * 1.25e-3;
    }
    assert_eq!(LedgerRecord::from_columns(&c).columns(), c);
    assert_eq!(LedgerRecord::column_index("E_tot"), Some(4));
    assert_eq!(LedgerRecord::column_index("rho_transport_res"), Some(14));
    assert_eq!(LedgerRecord::column_index("missing"), None);
}
