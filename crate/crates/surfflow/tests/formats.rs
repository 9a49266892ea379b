use surfflow::invariants::{first_violation, Bounds};
use surfflow::ledger_csv::{ledger_to_csv, parse_ledger_csv, read_ledger_csv, write_ledger_csv};
use surfflow::obj::{colors_path, mesh_to_obj, phase_color, read_obj_field, write_mesh_obj};
use surfflow::svg::{render_timeseries_svg, timeseries_svg};
use surfflow::IoError;
use surfflow_core::mesh::build_icosphere;
use surfflow_core::sim::{simulate, LedgerRecord, ScenarioConfig};

const HEADER: &str = "t,E_kin,E_grad,E_pot,E_tot,dissipation,mass,area,volume,sep_margin,div_res,normal_res,mean_mu,mubar_ratio,rho_transport_res";

fn three_step_ledger() -> Vec<LedgerRecord> {
    let cfg = ScenarioConfig { subdivision: 1, dt: 1e-2, t_end: 3e-2, ..ScenarioConfig::oscillating(1, 0.3, 5.0, 4) };
    simulate(cfg).unwrap().ledger().records().to_vec()
}

#[test]
fn empty_ledger_is_header_only() {
    assert_eq!(ledger_to_csv(&[]), format!("{HEADER}\n"));
    assert!(parse_ledger_csv(&ledger_to_csv(&[])).unwrap().is_empty());
}

#[test]
fn three_steps_give_four_rows_that_round_trip() {
    let records = three_step_ledger();
    let text = ledger_to_csv(&records);
    assert_eq!(text.lines().count(), 5);
    assert!(!text.contains('\r'));
    assert!(text.starts_with(HEADER));
    let back = parse_ledger_csv(&text).unwrap();
    assert_eq!(back.len(), 4);
    for (a, b) in records.iter().zip(&back) {
        assert_eq!(a.columns().map(f64::to_bits), b.columns().map(f64::to_bits));
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.csv");
    write_ledger_csv(&records, &path).unwrap();
    assert_eq!(read_ledger_csv(&path).unwrap(), back);
    // nothing but the target is left behind by the atomic write
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn values_carry_seventeen_significant_digits() {
    let mut c = [0.0; 15];
    c[0] = 0.1;
    c[4] = -1.0 / 3.0;
    c[9] = f64::MIN_POSITIVE;
    let text = ledger_to_csv(&[LedgerRecord::from_columns(&c)]);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("1.0000000000000001e-1,"), "{row}");
    assert!(row.contains(",-3.3333333333333331e-1,"), "{row}");
    assert_eq!(parse_ledger_csv(&text).unwrap()[0].columns(), c);
}

#[test]
fn malformed_csv_is_rejected() {
    assert!(matches!(parse_ledger_csv("t,E\n1,2\n"), Err(IoError::Csv(_))));
    let bad = format!("{HEADER}\n{}\n", ["x"; 15].join(","));
    assert!(matches!(parse_ledger_csv(&bad), Err(IoError::Csv(_))));
}

#[test]
fn unwritable_paths_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("ledger.csv");
    assert!(matches!(write_ledger_csv(&[], &path), Err(IoError::Write { .. })));
}

#[test]
fn obj_keeps_fields_in_comments_and_colors_in_a_sidecar() {
    let m = build_icosphere(1, 1.0).unwrap();
    let phi: Vec<f64> = m.positions().iter().map(|x| 0.9 * x.z()).collect();
    let text = mesh_to_obj(&m, 0.5, &[("phi", &phi)]).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 42);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 80);
    assert_eq!(read_obj_field(&text, "phi").unwrap(), phi);
    assert!(read_obj_field(&text, "mu").is_none());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snap.obj");
    let written = write_mesh_obj(&m, 0.5, &[("phi", &phi)], &path).unwrap();
    assert_eq!(written, vec![path.clone(), colors_path(&path)]);
    let colors = std::fs::read_to_string(colors_path(&path)).unwrap();
    assert_eq!(colors.lines().count(), 42);
    assert!(mesh_to_obj(&m, 0.0, &[("phi", &phi[..3])]).is_err());
}

#[test]
fn phase_colors_run_from_blue_to_red() {
    assert_eq!(phase_color(-1.0), [0.0, 0.0, 1.0]);
    assert_eq!(phase_color(0.0), [1.0, 1.0, 1.0]);
    assert_eq!(phase_color(1.0), [1.0, 0.0, 0.0]);
    assert_eq!(phase_color(f64::NAN), [1.0, 1.0, 1.0]);
}

#[test]
fn svg_has_one_series_per_column() {
    let records = three_step_ledger();
    let svg = timeseries_svg(&records, &["E_tot", "mass"]).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(matches!(timeseries_svg(&records, &["E_total"]), Err(IoError::UnknownColumn(c)) if c == "E_total"));
    assert!(timeseries_svg(&[], &["E_tot"]).unwrap().contains("no data"));
    let dir = tempfile::tempdir().unwrap();
    render_timeseries_svg(&records, &["E_tot"], &dir.path().join("c.svg")).unwrap();
    assert_eq!(svg, timeseries_svg(&records, &["E_tot", "mass"]).unwrap());
}

#[test]
fn invariant_scan_names_the_first_broken_column() {
    let records = three_step_ledger();
    let b = Bounds::default();
    assert_eq!(first_violation(&records, false, true, &b), None);

    let mut bad = records.clone();
    bad[2].mass += 1e-3;
    bad[3].separation_margin = 0.0;
    let v = first_violation(&bad, false, true, &b).unwrap();
    assert_eq!((v.column, v.row), ("mass", 2));
    assert!(v.to_string().contains("column mass"));

    let mut bad = records.clone();
    bad[1].e_tot = bad[0].e_tot + 1.0;
    assert_eq!(first_violation(&bad, false, true, &b), None);
    assert_eq!(first_violation(&bad, true, true, &b).unwrap().column, "E_tot");

    let mut bad = records;
    bad[3].mean_mu = f64::NAN;
    assert_eq!(first_violation(&bad, false, true, &b).unwrap().column, "mean_mu");
}
