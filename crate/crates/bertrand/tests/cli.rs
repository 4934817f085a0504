//! Command-line surface tests: determinism, schema round trips, exit
//! codes.

use bertrand::cli::{self, parse_csv_table};
use std::path::PathBuf;

fn run_to_string(args: &[&str]) -> (i32, String) {
    let path = temp_path();
    let mut argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    argv.push("--output".into());
    argv.push(path.to_string_lossy().into_owned());
    let code = cli::run(argv);
    let out = std::fs::read_to_string(&path).unwrap_or_default();
    let _ = std::fs::remove_file(&path);
    (code, out)
}

fn temp_path() -> PathBuf {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!(
        "bertrand-cli-test-{}-{n}.out",
        std::process::id()
    ))
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "bertrand",
        "apsidal",
        "--potential",
        "powerlaw:-,nu=1,k=1",
        "--L",
        "0.5,1,2",
        "--E",
        "auto:5",
    ];
    let (c1, out1) = run_to_string(&args);
    let (c2, out2) = run_to_string(&args);
    assert_eq!(c1, 0);
    assert_eq!(c2, 0);
    assert!(!out1.is_empty());
    assert_eq!(out1, out2);
}

#[test]
fn apsidal_csv_schema_round_trips() {
    let (code, out) = run_to_string(&[
        "bertrand",
        "apsidal",
        "--potential",
        "powerlaw:-,nu=1,k=1",
        "--L",
        "1",
        "--E",
        "-0.7,-0.375,0.5",
    ]);
    assert_eq!(code, 0);
    let (_, header, rows) = parse_csv_table(&out).unwrap();
    assert_eq!(header, vec!["L", "E", "phi", "err_est", "status"]);
    assert_eq!(rows.len(), 3);
    for row in &rows {
        row[0].parse::<f64>().unwrap();
        row[1].parse::<f64>().unwrap();
        row[2].parse::<f64>().unwrap();
        row[3].parse::<f64>().unwrap();
        assert!(bertrand::apsidal::SweepStatus::parse(&row[4]).is_some(), "{}", row[4]);
    }
    assert_eq!(rows[0][4], "below_min");
    assert_eq!(rows[1][4], "ok");
    assert_eq!(rows[2][4], "unbounded");
    // The ok row carries the Kepler angle.
    let phi: f64 = rows[1][2].parse().unwrap();
    assert!((phi - std::f64::consts::PI).abs() < 1e-8);
}

#[test]
fn orbit_trace_schema_and_preamble() {
    let (code, out) = run_to_string(&[
        "bertrand",
        "orbit",
        "--potential",
        "powerlaw:+,nu=2,k=1",
        "--E",
        "3.0",
        "--span",
        "4pi",
    ]);
    assert_eq!(code, 0);
    let (preamble, header, rows) = parse_csv_table(&out).unwrap();
    assert!(preamble.contains(&"formulation=binet".to_string()), "{preamble:?}");
    assert!(preamble.contains(&"classification=closed(1,2)".to_string()), "{preamble:?}");
    assert_eq!(header, vec!["param", "r_or_x", "deriv", "phi_or_t", "energy"]);
    assert!(rows.len() > 10);
    let mut prev = f64::NEG_INFINITY;
    for row in &rows {
        let param: f64 = row[0].parse().unwrap();
        assert!(param > prev);
        prev = param;
        assert!(row[1].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn radial_orbit_formulation() {
    let (code, out) = run_to_string(&[
        "bertrand",
        "orbit",
        "--potential",
        "powerlaw:-,nu=1,k=1",
        "--E",
        "-0.375",
        "--span",
        "9.6737",
        "--formulation",
        "radial",
    ]);
    assert_eq!(code, 0);
    let (preamble, _, rows) = parse_csv_table(&out).unwrap();
    assert!(preamble.contains(&"formulation=radial".to_string()));
    assert!(preamble.contains(&"classification=closed(1,1)".to_string()));
    // Angle column grows monotonically in the radial formulation.
    let mut prev = -1.0;
    for row in &rows {
        let angle: f64 = row[3].parse().unwrap();
        assert!(angle >= prev);
        prev = angle;
    }
}

#[test]
fn invert_subcommand_matches_turning_width() {
    let (code, out) = run_to_string(&[
        "bertrand",
        "invert",
        "--potential",
        "powerlaw:-,nu=1,k=1",
        "--E",
        "-0.375",
        "--phi-const",
        "3.141592653589793",
    ]);
    assert_eq!(code, 0);
    let (_, header, rows) = parse_csv_table(&out).unwrap();
    assert_eq!(header, vec!["E", "delta_x", "status"]);
    let delta: f64 = rows[0][1].parse().unwrap();
    assert!((delta - 1.0).abs() < 1e-6, "{delta}");
}

#[test]
fn invert_from_potential_round_trips() {
    let (code, out) = run_to_string(&[
        "bertrand",
        "invert",
        "--potential",
        "powerlaw:+,nu=2,k=1",
        "--E",
        "2.0,3.0,5.0",
        "--from-potential",
        "--tol",
        "1e-7",
    ]);
    assert_eq!(code, 0);
    let (_, _, rows) = parse_csv_table(&out).unwrap();
    let p = bertrand::RadialProblem::natural(
        bertrand::PotentialSpec::power_law_positive(1.0, 2.0).unwrap(),
    )
    .unwrap();
    for row in &rows {
        assert_eq!(row[2], "ok");
        let e: f64 = row[0].parse().unwrap();
        let delta: f64 = row[1].parse().unwrap();
        let expected = bertrand::turning::turning_points(&p, e).unwrap().delta_x();
        assert!((delta - expected).abs() < 1e-5, "E={e}: {delta} vs {expected}");
    }
}

#[test]
fn scan_bertrand_emits_unique_root_row() {
    let (code, out) = run_to_string(&[
        "bertrand",
        "scan-bertrand",
        "--family",
        "attractive",
        "--nu",
        "0.05:1.95:0.01",
    ]);
    assert_eq!(code, 0);
    let (_, header, rows) = parse_csv_table(&out).unwrap();
    assert_eq!(
        header,
        vec!["family", "nu", "transcendental", "residual_sup", "fourth_order_violation", "verdict"]
    );
    let roots: Vec<&Vec<String>> = rows.iter().filter(|r| r[5] == "root").collect();
    assert_eq!(roots.len(), 1);
    let nu: f64 = roots[0][1].parse().unwrap();
    assert!((nu - 1.0).abs() <= 1e-10, "{nu}");
    for row in &rows {
        assert_eq!(row[0], "attractive");
        assert!(
            ["isochronous", "not_isochronous", "inconclusive", "root"].contains(&row[5].as_str()),
            "{}",
            row[5]
        );
    }
}

#[test]
fn perturb_reports_fixture_constraints() {
    let (code, out) = run_to_string(&[
        "bertrand",
        "perturb",
        "--potential",
        "powerlaw:+,nu=2,k=0.5",
    ]);
    assert_eq!(code, 0);
    let (_, header, rows) = parse_csv_table(&out).unwrap();
    assert_eq!(header, vec!["quantity", "value"]);
    let get = |name: &str| -> f64 {
        rows.iter()
            .find(|r| r[0] == name)
            .unwrap_or_else(|| panic!("missing row {name}"))[1]
            .parse()
            .unwrap()
    };
    assert!((get("a_1") + 1.0).abs() < 1e-12);
    assert!((get("a_2") - 1.25).abs() < 1e-12);
    assert!(get("gamma_check").abs() < 1e-12);
    assert!(get("fourth_order_violation").abs() < 1e-9);
}

#[test]
fn reconstruct_from_phi_csv() {
    let csv_path = temp_path();
    // Constant law pi/2 sampled on a coarse grid; linear interpolation is
    // exact for a constant.
    let mut text = String::from("rho,phi\n");
    for i in 0..10 {
        let rho = 0.4 + 0.2 * i as f64;
        text.push_str(&format!("{rho},{}\n", std::f64::consts::FRAC_PI_2));
    }
    std::fs::write(&csv_path, text).unwrap();
    let (code, out) = run_to_string(&[
        "bertrand",
        "reconstruct",
        "--phi-csv",
        csv_path.to_str().unwrap(),
        "--r",
        "0.5:2:0.05",
    ]);
    let _ = std::fs::remove_file(&csv_path);
    assert_eq!(code, 0);
    let (_, header, rows) = parse_csv_table(&out).unwrap();
    assert_eq!(header, vec!["r", "u", "du"]);
    // U' ~ r for the harmonic law: slope doubles from r=0.5 to r=1.0.
    let du_of = |target: f64| -> f64 {
        rows.iter()
            .map(|r| (r[0].parse::<f64>().unwrap(), r[2].parse::<f64>().unwrap()))
            .find(|(r, _)| (r - target).abs() < 1e-9)
            .unwrap()
            .1
    };
    let ratio = du_of(1.0) / du_of(0.5);
    assert!((ratio - 2.0).abs() < 1e-6, "{ratio}");
}

#[test]
fn json_output_mirrors_csv_rows() {
    let base = [
        "bertrand",
        "apsidal",
        "--potential",
        "powerlaw:-,nu=1,k=1",
        "--L",
        "1",
        "--E",
        "-0.375",
    ];
    let (_, csv) = run_to_string(&base);
    let mut json_args: Vec<&str> = base.to_vec();
    json_args.extend(["--format", "json"]);
    let (code, json) = run_to_string(&json_args);
    assert_eq!(code, 0);
    assert!(json.trim_start().starts_with('['));
    let (_, header, rows) = parse_csv_table(&csv).unwrap();
    for key in &header {
        assert!(json.contains(&format!("\"{key}\"")), "missing key {key}");
    }
    // The same formatted float appears in both outputs.
    assert!(json.contains(&rows[0][2]), "phi value differs between formats");
}

#[test]
fn exit_codes() {
    // Usage errors: 2.
    assert_eq!(cli::run(["bertrand", "apsidal", "--potential", "bogus", "--E", "1"]), 2);
    assert_eq!(cli::run(["bertrand", "nonsense-subcommand"]), 2);
    assert_eq!(
        cli::run([
            "bertrand",
            "apsidal",
            "--potential",
            "powerlaw:-,nu=1,k=1",
            "--E",
            "auto:0"
        ]),
        2
    );
    assert_eq!(
        cli::run([
            "bertrand",
            "invert",
            "--potential",
            "powerlaw:-,nu=1,k=1",
            "--E",
            "-0.375"
        ]),
        2,
        "invert without a law should be a usage error"
    );
    // Numerical failure: 3 (tolerance unreachable).
    let out = temp_path();
    let code = cli::run([
        "bertrand",
        "reconstruct",
        "--phi-const",
        "3.141592653589793",
        "--r",
        "0.5:2:0.01",
        "--tol",
        "1e-30",
        "--output",
        out.to_str().unwrap(),
    ]);
    let _ = std::fs::remove_file(&out);
    assert_eq!(code, 3);
    // Help: 0.
    assert_eq!(cli::run(["bertrand", "--help"]), 0);
}

#[test]
fn coupling_override_applies() {
    // --k 0.5 turns powerlaw:+ nu=2 k=1 into the unit Clairaut fixture,
    // whose a_1 is exactly -1.
    let (code, out) = run_to_string(&[
        "bertrand",
        "perturb",
        "--potential",
        "powerlaw:+,nu=2,k=1",
        "--k",
        "0.5",
    ]);
    assert_eq!(code, 0);
    let (_, _, rows) = parse_csv_table(&out).unwrap();
    let a1: f64 = rows.iter().find(|r| r[0] == "a_1").unwrap()[1].parse().unwrap();
    assert!((a1 + 1.0).abs() < 1e-12);
}
