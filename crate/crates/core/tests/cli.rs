use std::f64::consts::PI;
use std::process::Command;

use cycmzv::arith::{parse_rational, rat, Rational};
use cycmzv::cli::run;
use cycmzv::cyclotomic::{one_minus_zeta, CycloElem};
use cycmzv::hoffman::Index;
use cycmzv::qseries::z_exact;
use serde_json::Value;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cycmzv").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = cli(args);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} {err}"));
    (code, v)
}

#[test]
fn eval_exact_depth_one() {
    let (code, v) = json(&["eval", "1", "--n", "5", "--exact", "--format", "json"]);
    assert_eq!(code, 0);
    let got = CycloElem::from_json_value(&v["value"]).unwrap();
    assert_eq!(got, one_minus_zeta(5).scale(&rat(2, 1)));

    let (_, v) = json(&["eval", "3", "--n", "9", "--format", "json"]);
    let got = CycloElem::from_json_value(&v["value"]).unwrap();
    assert_eq!(got, one_minus_zeta(9).pow(3).unwrap().scale(&rat(80, 24)));
}

#[test]
fn eval_csv_lists_power_basis() {
    let (code, out, _) = cli(&["eval", "1", "--n", "5", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines, ["power,coeff", "0,2", "1,-2", "2,0", "3,0"]);
}

#[test]
fn eval_numeric_matches_embedded_exact() {
    let (code, v) = json(&["eval", "2,1", "--n", "7", "--numeric", "--precision", "128", "--format", "json"]);
    assert_eq!(code, 0);
    let re = parse_decimal(v["value"]["re"].as_str().unwrap());
    let im = parse_decimal(v["value"]["im"].as_str().unwrap());
    let exact = z_exact(&Index::parse("2,1").unwrap(), 7)
        .embed_complex(1, 128)
        .unwrap()
        .to_c64();
    assert!((re - exact.re).abs() < 1e-12 && (im - exact.im).abs() < 1e-12);
}

fn parse_decimal(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn eval_rejects_bad_index() {
    assert_eq!(cli(&["eval", "2,x", "--n", "5"]).0, 2);
    assert_eq!(cli(&["eval", "0", "--n", "5"]).0, 2);
    assert_eq!(cli(&["eval", "1"]).0, 2);
    assert_eq!(cli(&["eval", "1", "--n", "5", "--exact", "--numeric"]).0, 2);
}

#[test]
fn verify_builtins() {
    assert_eq!(cli(&["verify", "hoffman-4-1", "--primes", "7..100", "--ring", "A"]).0, 0);
    assert_eq!(
        cli(&["verify", "duality", "--weight", "5", "--primes", "7..31", "--ring", "Acyc", "--star"]).0,
        0
    );
    assert_eq!(cli(&["verify", "star-5", "--n", "1..60"]).0, 0);
    assert_eq!(cli(&["verify", "star-5", "--primes", "7..60"]).0, 0);
    assert_eq!(cli(&["verify", "reversal", "--weight", "4", "--ring", "A", "--primes", "5..40"]).0, 0);
}

#[test]
fn verify_reports_failures() {
    // (4,1) - 2(3,1,1) vanishes in A but not in the cyclotomic ring
    let (code, v) = json(&["verify", "hoffman-4-1", "--primes", "7..31", "--ring", "Acyc", "--format", "json"]);
    assert_eq!(code, 1);
    assert_eq!(v["holds"], Value::Bool(false));
    let (code, _, _) = cli(&["verify", "duality", "--weight", "4", "--primes", "7..31"]);
    assert_eq!(code, 1);
}

#[test]
fn verify_relation_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rel.json");
    // reversal in weight three: z(2,1) + z(1,2) = 0 in A
    std::fs::write(
        &path,
        r#"[{"index": "2,1", "hbar": 0, "coeff": "1"}, {"index": "1,2", "hbar": 0, "coeff": "1"}]"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(cli(&["verify", p, "--ring", "A", "--primes", "5..50"]).0, 0);
    std::fs::write(&path, r#"[{"index": "2,1", "coeff": "1"}]"#).unwrap();
    assert_eq!(cli(&["verify", p, "--ring", "A", "--primes", "5..50"]).0, 1);
    std::fs::write(&path, "not json").unwrap();
    assert_eq!(cli(&["verify", p]).0, 2);
    assert_eq!(cli(&["verify", "no-such-file.json"]).0, 2);
    assert_eq!(cli(&["verify", "hoffman-4-1", "--primes", "9"]).0, 2);
}

#[test]
fn dimtable_bounds() {
    let (code, out, _) = cli(&["dimtable", "--kmax", "8", "--mode", "bounds"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k,num_indices,relation_rank,upper_bound");
    assert_eq!(lines.len(), 10);
    let last: Vec<&str> = lines[9].split(',').collect();
    assert_eq!((last[0], last[3]), ("8", "12"));

    let (code, out, _) = cli(&["dimtable", "--kmax", "0"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().collect::<Vec<_>>(), ["k,num_indices,relation_rank,upper_bound", "0,1,0,1"]);
}

#[test]
fn dimtable_observed_and_both() {
    let (code, out, _) = cli(&["dimtable", "--kmax", "3", "--primes", "13", "--mode", "observed"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().last().unwrap(), "3,4,2");

    let (code, v) = json(&["dimtable", "--kmax", "4", "--primes", "11,13", "--mode", "both", "--format", "json"]);
    assert_eq!(code, 0);
    let row = &v[4];
    assert_eq!(row["upper_bound"], 2);
    assert_eq!(row["observed"]["11"], 2);
    assert_eq!(row["observed"]["13"], 2);
}

#[test]
fn dimtable_extended_gate() {
    assert_eq!(cli(&["dimtable", "--kmax", "11"]).0, 2);
}

#[test]
fn limit_values() {
    let (code, v) = json(&["limit", "2", "--schedule", "1000:2:6", "--format", "json"]);
    assert_eq!(code, 0);
    let re: f64 = v["value"]["re"].as_str().unwrap().parse().unwrap();
    assert!((re - PI * PI / 3.0).abs() < 1e-4);
    assert_eq!(v["converged"], Value::Bool(true));

    let (code, v) = json(&["limit", "1", "--schedule", "1000:2:5", "--format", "json"]);
    assert_eq!(code, 0);
    let im: f64 = v["value"]["im"].as_str().unwrap().parse().unwrap();
    assert!((im + PI).abs() < 1e-4);
}

#[test]
fn limit_flags_non_convergence() {
    assert_eq!(cli(&["limit", "2", "--schedule", "10,20,40,80"]).0, 3);
    assert_eq!(cli(&["limit", "2", "--schedule", "1000:1:3"]).0, 2);
}

#[test]
fn json_output_is_deterministic() {
    let a = cli(&["limit", "2,1", "--schedule", "500:2:4", "--format", "json"]).1;
    let b = cli(&["--jobs", "1", "limit", "2,1", "--schedule", "500:2:4", "--format", "json"]).1;
    assert_eq!(a, b);
    let a = cli(&["eval", "3,1", "--n", "12", "--star", "--format", "json"]).1;
    let b = cli(&["eval", "3,1", "--n", "12", "--star", "--format", "json"]).1;
    assert_eq!(a, b);
}

#[test]
fn exact_rationals_are_strings() {
    let (_, v) = json(&["eval", "2", "--n", "6", "--format", "json"]);
    let coeffs = v["value"]["coeffs"].as_array().unwrap();
    assert!(coeffs.iter().all(Value::is_string));
    let c: Vec<Rational> = coeffs.iter().map(|c| parse_rational(c.as_str().unwrap()).unwrap()).collect();
    assert_eq!(CycloElem::from_coeffs(6, &c), z_exact(&Index::parse("2").unwrap(), 6));
}

#[test]
fn binary_exit_codes_and_env() {
    let bin = env!("CARGO_BIN_EXE_cycmzv");
    let st = Command::new(bin).args(["verify", "hoffman-4-1", "--ring", "A"]).env("CYCMZV_JOBS", "2").output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&st.stdout).contains("verified"));
    let st = Command::new(bin).args(["eval", "nope", "--n", "3"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let st = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(st.status.code(), Some(0));
}
