use proptest::prelude::*;
use serde_json::json;
use surfflow::config::{document_from_value, parse_config, print_config, set_path, RunConfig};
use surfflow::IoError;
use surfflow_core::mesh::NormalVelocityLaw;
use surfflow_core::sim::{InitialPhase, ScenarioConfig};

fn config_error(text: &str) -> (String, String) {
    match parse_config(text) {
        Err(IoError::Config { path, message }) => (path, message),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn minimal_document_gets_the_defaults() {
    let c = parse_config(r#"{"surface":{"kind":"sphere","subdivision":3}}"#).unwrap();
    let s = &c.scenario;
    assert_eq!(s.subdivision, 3);
    assert_eq!(s.dt, 1e-3);
    assert_eq!((s.material.theta, s.material.theta0), (0.8, 1.6));
    assert_eq!(s.law, NormalVelocityLaw::Stationary);
    assert!(matches!(s.initial_phase, InitialPhase::Random { seed: 0, smoothing_passes: 5, .. }));
    assert!(c.output.obj);
    assert_eq!(parse_config("{}").unwrap(), c);
}

#[test]
fn inverted_temperatures_name_the_ordering() {
    let (path, msg) = config_error(r#"{"material":{"theta":2.0,"theta0":1.0}}"#);
    assert_eq!(path, "material.theta");
    assert!(msg.contains("theta < theta0"), "{msg}");
}

#[test]
fn pure_initial_phase_is_rejected() {
    let (path, msg) = config_error(r#"{"initial":{"phase":{"kind":"constant","value":1.5}}}"#);
    assert_eq!(path, "initial.phase.value");
    assert!(msg.contains("|mean| < 1"), "{msg}");
}

#[test]
fn unknown_keys_are_rejected_with_their_path() {
    assert_eq!(config_error(r#"{"surface":{"subdivison":3}}"#).0, "surface.subdivison");
    assert_eq!(config_error(r#"{"outputs":{}}"#).0, "outputs");
    assert_eq!(config_error(r#"{"initial":{"phase":{"kind":"random","sed":1}}}"#).0, "initial.phase");
    assert_eq!(config_error(r#"{"stepping":{"dt":"fast"}}"#).0, "stepping.dt");
    assert_eq!(config_error(r#"{"surface":{"kind":"torus"}}"#).0, "surface.kind");
}

#[test]
fn semantic_errors_name_the_field() {
    for (doc, path) in [
        (r#"{"stepping":{"dt":-1}}"#, "stepping.dt"),
        (r#"{"stepping":{"dt":0.5,"t_end":0.1}}"#, "stepping.t_end"),
        (r#"{"stepping":{"penalty_weight":0}}"#, "stepping.penalty_weight"),
        (r#"{"surface":{"radius":0}}"#, "surface.radius"),
        (r#"{"surface":{"subdivision":9}}"#, "surface.subdivision"),
        (r#"{"initial":{"phase":{"kind":"harmonic","amplitude":0.1,"degree":3}}}"#, "initial.phase.degree"),
        (r#"{"material":{"mobility":2}}"#, "material"),
        (r#"{"output":{"svg_columns":["E_tot","E_total"]}}"#, "output.svg_columns[1]"),
    ] {
        assert_eq!(config_error(doc).0, path, "{doc}");
    }
}

#[test]
fn syntax_errors_carry_line_and_column() {
    match parse_config("{\n  \"surface\": {,}\n}") {
        Err(IoError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 15)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_config("{} {}"), Err(IoError::Syntax { .. })));
    assert!(matches!(parse_config(""), Err(IoError::Syntax { .. })));
}

#[test]
fn dotted_paths_are_assigned() {
    let mut v = json!({"material": {"theta": 0.5}});
    set_path(&mut v, "material.theta0", json!(1.2)).unwrap();
    set_path(&mut v, "initial.phase.kind", json!("constant")).unwrap();
    let c = RunConfig::from_document(&document_from_value(v).unwrap()).unwrap();
    assert_eq!((c.scenario.material.theta, c.scenario.material.theta0), (0.5, 1.2));
    assert_eq!(c.scenario.initial_phase, InitialPhase::Constant { value: 0.0 });
    let mut v = json!({"material": 3});
    assert!(set_path(&mut v, "material.theta", json!(1)).is_err());
    assert!(set_path(&mut v, "a..b", json!(1)).is_err());
}

#[test]
fn seed_override_only_touches_random_phases() {
    let mut c = parse_config("{}").unwrap();
    assert!(c.set_seed(42));
    assert!(matches!(c.scenario.initial_phase, InitialPhase::Random { seed: 42, .. }));
    let mut c = parse_config(r#"{"initial":{"phase":{"kind":"constant","value":0.2}}}"#).unwrap();
    assert!(!c.set_seed(42));
}

fn scenario_strategy() -> impl Strategy<Value = String> {
    (
        (0u32..=5, 0.1f64..4.0, 0usize..3, -1.0f64..1.0, 0.0f64..10.0, any::<bool>()),
        (0usize..3, -0.9f64..0.9, 0.0f64..0.5, any::<u64>(), 0u32..10, 1u32..=2),
        (0.05f64..1.0, 0.0f64..2.0, 0.1f64..5.0, 0.1f64..5.0, 1e-5f64..1e-1, 1.0f64..100.0),
        (proptest::option::of(1.0f64..1e6), any::<bool>(), 0usize..50),
    )
        .prop_map(|((sub, radius, law, amp, freq, proj), (ph, mean, pamp, seed, passes, degree), (theta, gap, rho1, nu2, dt, ratio), (pen, rot, every))| {
            let law = ["stationary", "linear", "oscillating"][law];
            let phase = match ph {
                0 => json!({"kind": "constant", "value": mean}),
                1 => json!({"kind": "harmonic", "mean": mean, "amplitude": pamp, "degree": degree}),
                _ => json!({"kind": "random", "mean": mean, "amplitude": pamp, "seed": seed, "smoothing_passes": passes}),
            };
            let velocity = if rot { json!({"kind": "rotation", "omega": [0.1, amp, freq]}) } else { json!({"kind": "zero"}) };
            json!({
                "surface": {"subdivision": sub, "radius": radius},
                "evolution": {"law": law, "amplitude": amp, "frequency": freq, "project_compatible": proj},
                "initial": {"phase": phase, "velocity": velocity},
                "material": {"theta": theta, "theta0": theta + gap + 1e-3, "rho1": rho1, "nu2": nu2},
                "stepping": {"dt": dt, "t_end": dt * ratio, "penalty_weight": pen},
                "output": {"snapshot_every": every},
            })
            .to_string()
        })
}

proptest! {
    #[test]
    fn normalization_is_idempotent(text in scenario_strategy()) {
        let once = parse_config(&text).unwrap();
        let printed = print_config(&once);
        let twice = parse_config(&printed).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(printed, print_config(&twice));
    }
}

#[test]
fn printed_defaults_match_the_core_defaults() {
    let c = parse_config(r#"{"initial":{"phase":{"kind":"constant"}}}"#).unwrap();
    assert_eq!(c.scenario, ScenarioConfig::default());
}
