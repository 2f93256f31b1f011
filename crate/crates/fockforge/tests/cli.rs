use std::collections::BTreeMap;

use fockforge::cli::*;
use fockforge::Error;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fockforge").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.split_whitespace()
        .find_map(|w| w.strip_prefix(&format!("{}=", key)))
        .unwrap_or_else(|| panic!("no `{}` in {}", key, text))
}

#[test]
fn slope_of_exact_power_laws() {
    let cubic: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|&k: &f64| (k, k.powi(3))).collect();
    let fit = fit_slope(&cubic, 1.0).unwrap();
    assert!((fit.slope - 3.0).abs() < 1e-9);
    assert!(fit.residual < 1e-9);
    let quartic: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|&k: &f64| (k, k.powi(4) / 5.0)).collect();
    let fit = fit_slope(&quartic, 0.5).unwrap();
    assert!((fit.slope - 4.0).abs() < 1e-9);
    assert_eq!(fit.window, 3);
}

#[test]
fn slope_window_uses_largest_k() {
    // a kink below K = 32 must not affect the top-half fit
    let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0]
        .iter()
        .map(|&k: &f64| (k, if k < 32.0 { 7.0 * k } else { k * k }))
        .collect();
    let fit = fit_slope(&pts, 0.5).unwrap();
    assert!((fit.slope - 2.0).abs() < 1e-9);
}

#[test]
fn slope_rejects_bad_series() {
    assert!(fit_slope(&[(1.0, 1.0), (2.0, 2.0), (4.0, 4.0)], 1.0).is_err());
    assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.0), (4.0, 4.0), (8.0, 8.0)], 1.0).is_err());
    assert!(fit_slope(&[(1.0, 1.0), (2.0, 2.0), (4.0, 4.0), (8.0, 8.0)], 0.0).is_err());
}

#[test]
fn k_ranges() {
    assert_eq!(parse_k_range("8..128").unwrap(), vec![8, 16, 32, 64, 128]);
    assert_eq!(parse_k_range("3..20").unwrap(), vec![3, 6, 12]);
    assert_eq!(parse_k_range("4, 5,9").unwrap(), vec![4, 5, 9]);
    for bad in ["", "0..8", "9..3", "a..b", "4,,5", "-2"] {
        assert!(parse_k_range(bad).is_err(), "{}", bad);
    }
}

#[test]
fn gatecount_csv_rows() {
    let rows = gatecount_series("builtin:phi4-lf", &[8, 16], &BTreeMap::new()).unwrap();
    let text = gatecount_csv(&rows).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), GATECOUNT_HEADER.to_vec());
    let recs: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(recs.len(), 2);
    assert_eq!(&recs[0][0], "8");
    assert_eq!(recs[0][6].parse::<u64>().unwrap(), rows[0].1.total);
    let sum: u64 = (1..6).map(|c| recs[1][c].parse::<u64>().unwrap()).sum();
    assert_eq!(sum, rows[1].1.total);
}

#[test]
fn encode_then_decode() {
    let (code, out, _) = run_cli(&["encode", "--model", "builtin:phi4-lf", "--K", "4", "--state", "(b,1,3)(b,2,1)"]);
    assert_eq!(code, 0);
    let hex = field(&out, "hex").to_string();
    let (code, out, _) = run_cli(&["decode", "--model", "builtin:phi4-lf", "--K", "4", "--bits", &hex]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "(b,1,3)(b,2,1)");
}

#[test]
fn state_literals() {
    let spec = load_model("builtin:yukawa-lf", Some(5), &BTreeMap::new(), None, None).unwrap();
    let s = parse_state(&spec, "(fbar,2,1) (b,1,3)").unwrap();
    assert_eq!(format_state(&spec, &s), "(b,1,3)(fbar,2,1)");
    assert!(parse_state(&spec, "vac").unwrap().is_empty());
    assert_eq!(format_state(&spec, &parse_state(&spec, "vac").unwrap()), "vac");
    for bad in ["(q,1,1)", "(b,1)", "(b,x,1)", "(b,1,1", "(b,1,1)(b,1,2)"] {
        assert!(parse_state(&spec, bad).is_err(), "{}", bad);
    }
}

#[test]
fn matelem_prints_both_routes() {
    let (code, out, _) = run_cli(&[
        "matelem", "--model", "builtin:boson-fusion", "--K", "5", "--state", "(b,1,5)", "--to", "(b,1,3)(b,2,1)",
    ]);
    assert_eq!(code, 0);
    let a: f64 = field(&out, "value").parse().unwrap();
    let b: f64 = field(&out, "bruteforce").parse().unwrap();
    assert!((a - 20f64.sqrt()).abs() < 1e-12 && (b - 20f64.sqrt()).abs() < 1e-12);
}

#[test]
fn enumerate_circuit_agrees_with_oracle() {
    for i in 1..=6 {
        let i = i.to_string();
        let base = ["enumerate", "--model", "builtin:phi4-lf", "--K", "3", "--state", "(b,1,1)(b,2,1)", "--i", &i];
        let (c1, plain, _) = run_cli(&base);
        let mut with_circuit = base.to_vec();
        with_circuit.push("--circuit");
        let (c2, circ, _) = run_cli(&with_circuit);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(field(&plain, "out"), field(&circ, "out"));
        assert_eq!(field(&plain, "a_flag"), field(&circ, "a_flag"));
    }
}

#[test]
fn walk_check_reports_small_deviations() {
    let (code, out, _) = run_cli(&["walk-check", "--model", "builtin:free-boson-lf", "--K", "3"]);
    assert_eq!(code, 0);
    assert!(field(&out, "isometry_deviation").parse::<f64>().unwrap() <= 1e-10);
    assert!(field(&out, "overlap_deviation").parse::<f64>().unwrap() <= 1e-10);
}

#[test]
fn gatecount_writes_csv_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let p = path.to_str().unwrap();
    let (code, out, _) = run_cli(&["gatecount", "--model", "builtin:phi4-et", "--K", "8..128", "--csv", p]);
    assert_eq!(code, 0);
    let slope: f64 = field(&out, "slope").parse().unwrap();
    assert!((3.6..=4.4).contains(&slope), "{}", slope);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn build_matrix_and_sparsity_run() {
    let (code, out, _) = run_cli(&["build-matrix", "--model", "builtin:phi4-lf", "--K", "4", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(!out.is_empty());
    let (code, out, _) = run_cli(&["sparsity", "--model", "builtin:phi4-lf", "--K", "4"]);
    assert_eq!(code, 0);
    assert_eq!(field(&out, "holds"), "true");
    let (code, out, _) = run_cli(&["estimate", "--model", "builtin:phi4-lf", "--K", "8", "--t", "1", "--eps", "1e-3"]);
    assert_eq!(code, 0);
    assert!(out.contains("sparsity_bound"));
}

#[test]
fn model_files_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.model");
    std::fs::write(
        &path,
        "model toy\ncutoffs light_front per_dim=(1,4) W=4 I=3\nparticle b statistics=boson species=0\n\
         interaction n: out(b:k) in(b:k2) coeff = 1\n",
    )
    .unwrap();
    let (code, out, _) = run_cli(&["enumerate", "--model", path.to_str().unwrap(), "--state", "(b,4,1)"]);
    assert_eq!(code, 0, "{}", out);
    assert_eq!(field(&out, "index_space"), "1");
}

#[test]
fn exit_codes() {
    let (code, _, err) = run_cli(&["bogus"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
    let (code, _, err) = run_cli(&["encode", "--model", "builtin:nope", "--state", "vac"]);
    assert_eq!(code, 3);
    assert!(err.contains("nope"));
    let (code, _, _) = run_cli(&["matelem", "--model", "builtin:phi4-lf", "--state", "(b,9,1)", "--to", "vac"]);
    assert_ne!(code, 0);
    assert_eq!(exit_code(&Error::CapExceeded { size: 30, cap: 10 }), 4);
    assert_eq!(exit_code(&Error::Invalid("x".into())), 3);
}

#[test]
fn sector_cap_from_environment() {
    std::env::set_var(fockforge::walk::SECTOR_CAP_ENV, "3");
    let (code, _, err) = run_cli(&["build-matrix", "--model", "builtin:phi4-lf", "--K", "6"]);
    std::env::remove_var(fockforge::walk::SECTOR_CAP_ENV);
    assert_eq!(code, 4, "{}", err);
}
