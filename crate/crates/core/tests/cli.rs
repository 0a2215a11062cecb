use std::process::Command;

use queue_pricing::cli::{self, fmt_sig, parse_csv, CSV_HEADER, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE};
use queue_pricing::{table1, PricingModel, PriorityRatio, Region};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("queue-pricing").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const REFERENCE_CONFIG: &str = r#"{
  "queue": {"lambda_p": 6, "mu": 12, "sigma": 0.2},
  "market": {"a": 120, "b": 0.1, "c": 0.3},
  "sla": {"s_p": [0.29, 0.35, 0.45, 0.75, 1, 8, 9.823, 10, 12, 19, 23, 32]}
}"#;

#[test]
fn optimize_reference_row() {
    let (code, out, _) = run(&["optimize", "--sp", "0.35", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let rows = parse_csv(&out).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r.region, Region::IMinus);
    assert_eq!(r.beta, Some(PriorityRatio::Finite(0.0)));
    assert!((r.lambda_s - 1.4556).abs() < 1e-3);
    assert!((r.theta.unwrap() - 1182.7).abs() < 0.5);
    assert!((r.s_s.unwrap() - 0.9242).abs() < 1e-3);
    assert!((r.revenue - 1721.54).abs() < 0.5);
}

#[test]
fn optimize_table_output_names_fields() {
    let (code, out, _) = run(&["optimize", "--sp", "8"]);
    assert_eq!(code, EXIT_OK);
    for key in ["region", "lambda_s", "beta", "theta", "s_s", "revenue", "binding"] {
        assert!(out.lines().any(|l| l.starts_with(key)), "missing {key} in\n{out}");
    }
}

#[test]
fn infeasible_service_level_exits_two() {
    let (code, out, err) = run(&["optimize", "--sp", "0.25"]);
    assert_eq!(code, EXIT_INFEASIBLE);
    assert!(out.is_empty());
    assert!(err.contains("0.281667"), "threshold not quoted: {err}");
}

#[test]
fn missing_mu_exits_one_and_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "bad.json",
        r#"{"queue": {"lambda_p": 6, "sigma": 0.2}, "market": {"a": 120, "b": 0.1, "c": 0.3}}"#,
    );
    let (code, _, err) = run(&["optimize", "--config", &cfg, "--sp", "1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("mu"), "{err}");
}

#[test]
fn invalid_values_name_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "neg.json",
        r#"{"queue": {"lambda_p": 6, "mu": -1, "sigma": 0.2}, "market": {"a": 120, "b": 0.1, "c": 0.3}}"#,
    );
    let (code, _, err) = run(&["optimize", "--config", &cfg, "--sp", "1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("queue.mu"), "{err}");

    let cfg = write_config(
        &dir,
        "extra.json",
        r#"{"queue": {"lambda_p": 6, "mu": 12, "sigma": 0.2, "k": 1}, "market": {"a": 120, "b": 0.1, "c": 0.3}}"#,
    );
    let (code, _, err) = run(&["optimize", "--config", &cfg, "--sp", "1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains('k'), "{err}");
}

#[test]
fn unreadable_config_and_bad_flags_exit_one() {
    assert_eq!(run(&["optimize", "--config", "/nonexistent/x.json", "--sp", "1"]).0, EXIT_USAGE);
    assert_eq!(run(&["optimize", "--sp", "abc"]).0, EXIT_USAGE);
    assert_eq!(run(&["optimize"]).0, EXIT_USAGE);
    assert_eq!(run(&["optimize", "--sp", "1", "--precision", "0"]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
}

#[test]
fn sweep_reference_levels_gives_twelve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "ref.json", REFERENCE_CONFIG);
    let (code, out, _) = run(&["sweep", "--config", &cfg]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = parse_csv(&out).unwrap();
    assert_eq!(rows.len(), 12);
    for (row, published) in rows.iter().zip(table1::ROWS.iter()) {
        assert_eq!(row.s_p, published.s_p);
        assert!((row.lambda_s - published.lambda_s).abs() < 6e-3);
        assert_eq!(row.beta.unwrap().is_infinite(), published.beta.is_infinite());
    }
}

#[test]
fn empty_range_exits_one() {
    assert_eq!(run(&["sweep", "--sp", "0.5:0.3:0.1"]).0, EXIT_USAGE);
    assert_eq!(run(&["sweep", "--sp", ""]).0, EXIT_USAGE);
    assert_eq!(run(&["sweep", "--sp", "0.3:0.5:0"]).0, EXIT_USAGE);
}

#[test]
fn range_sweep_revenue_increases() {
    let (code, out, _) = run(&["sweep", "--sp", "0.3:0.5:0.1"]);
    assert_eq!(code, EXIT_OK);
    let rows = parse_csv(&out).unwrap();
    assert_eq!(rows.len(), 3);
    let sps: Vec<f64> = rows.iter().map(|r| r.s_p).collect();
    assert_eq!(sps, vec![0.3, 0.4, 0.5]);
    assert!(rows.windows(2).all(|w| w[1].revenue > w[0].revenue));
}

#[test]
fn sweep_marks_infeasible_rows() {
    let (code, out, _) = run(&["sweep", "--sp", "0.2,0.35"]);
    assert_eq!(code, EXIT_OK);
    let rows = parse_csv(&out).unwrap();
    assert_eq!(rows[0].region, Region::Infeasible);
    assert_eq!(rows[0].beta, None);
    assert_eq!(rows[0].revenue, 0.0);
    assert_eq!(rows[1].region, Region::IMinus);
}

#[test]
fn csv_round_trip_full_precision() {
    let model = PricingModel::new(table1::queue(), table1::market()).unwrap();
    let sps = "0.29,0.6,1,8,9.823,15,19,32";
    let (code, out, _) = run(&["sweep", "--sp", sps, "--precision", "17"]);
    assert_eq!(code, EXIT_OK);
    let rows = parse_csv(&out).unwrap();
    for row in &rows {
        let p = model.optimize(row.s_p).unwrap();
        assert_eq!(row.region, p.region);
        assert_eq!(row.lambda_s, p.lambda_s);
        assert_eq!(row.beta, Some(p.beta));
        assert_eq!(row.theta, Some(p.theta));
        assert_eq!(row.s_s, Some(p.s_s));
        assert_eq!(row.revenue, p.revenue);
        assert_eq!(row.w_p, p.w_p);
        assert_eq!(row.sensitivity, model.sensitivity(row.s_p).ok());
        assert_eq!(row.binding, p.binding.label());
    }
}

#[test]
fn csv_round_trip_default_precision() {
    let (_, out, _) = run(&["sweep", "--sp", "0.29,1,12,23"]);
    let rows = parse_csv(&out).unwrap();
    // Every emitted value is already rounded, so rounding again is the identity.
    for row in &rows {
        for v in [row.lambda_s, row.revenue, row.w_p, row.theta.unwrap(), row.s_s.unwrap()] {
            assert_eq!(fmt_sig(v, 6).parse::<f64>().unwrap(), v);
        }
    }
    let (_, again, _) = run(&["sweep", "--sp", "0.29,1,12,23"]);
    assert_eq!(out, again);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let p = path.to_str().unwrap();
    let (code, out, _) = run(&["sweep", "--sp", "1,2", "--out", p]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(parse_csv(&text).unwrap().len(), 2);
}

#[test]
fn json_output_parses() {
    let (code, out, _) = run(&["sweep", "--sp", "1,20", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[1]["point"]["beta"], "inf");
}

#[test]
fn table1_flags_rows() {
    let (code, out, _) = run(&["table1", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 13);
    let flagged: Vec<&str> = lines[1..]
        .iter()
        .filter(|l| l.ends_with("published row inconsistent"))
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(flagged, vec!["1", "10", "12"], "{out}");
    // rows printed to fewer digits than the comparison tolerance
    let rounded: Vec<&str> = lines[1..]
        .iter()
        .filter(|l| l.ends_with(",mismatch"))
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(rounded, vec!["0.45", "23"], "{out}");
}

#[test]
fn ne_revenue_maximal_and_dynamics() {
    let (code, out, _) = run(&["ne", "--sp", "0.29", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["is_equilibrium"], true);
    assert!((v["report"]["revenue"].as_f64().unwrap() - 212.36).abs() < 0.5);

    let (code, out, _) = run(&["ne", "--sp", "0.45", "--lambda-s", "0", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["report"]["revenue"].as_f64().unwrap().abs() < 1e-6);

    let (code, out, _) = run(&["ne", "--sp", "0.45", "--lambda-s", "2", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["is_equilibrium"], true);
    assert!(v["report"]["revenue"].as_f64().unwrap() < v["revenue_maximal"].as_f64().unwrap());

    assert_eq!(run(&["ne", "--sp", "0.45", "--lambda-s", "4"]).0, EXIT_INFEASIBLE);
}

fn sim_config(dir: &tempfile::TempDir, lambda_s: f64) -> String {
    write_config(
        dir,
        "sim.json",
        &format!(
            r#"{{"queue": {{"lambda_p": 6, "mu": 12, "sigma": 0.2}},
               "market": {{"a": 120, "b": 0.1, "c": 0.3}},
               "sim": {{"seed": 11, "replications": 4, "departures_per_replication": 20000,
                        "lambda_s": {lambda_s}, "betas": [1]}}}}"#
        ),
    )
}

#[test]
fn simulate_fcfs_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sim_config(&dir, 3.0);
    let (code, out, _) = run(&["simulate", "--config", &cfg, "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let row = &v[0];
    let w = row["analytic_w_p"].as_f64().unwrap();
    assert_eq!(row["analytic_w_s"].as_f64().unwrap(), w);
    assert!((row["report"]["w_p_est"].as_f64().unwrap() - w).abs() < 0.1 * w);
    let (_, again, _) = run(&["simulate", "--config", &cfg, "--format", "json"]);
    assert_eq!(out, again);
    let (_, other, _) = run(&["simulate", "--config", &cfg, "--format", "json", "--seed", "12"]);
    assert_ne!(out, other);
}

#[test]
fn simulate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sim_config(&dir, 7.0);
    assert_eq!(run(&["simulate", "--config", &cfg]).0, EXIT_INFEASIBLE);
    assert_eq!(run(&["simulate", "--lambda-s", "1"]).0, EXIT_USAGE);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_queue-pricing");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["optimize", "--sp", "1"]), Some(EXIT_OK));
    assert_eq!(code(&["optimize", "--sp", "0.25"]), Some(EXIT_INFEASIBLE));
    assert_eq!(code(&["sweep", "--sp", "1:0:1"]), Some(EXIT_USAGE));
}
