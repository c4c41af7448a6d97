use std::fs;
use std::process::{Command, Output};

use ladder_cli::report::{Cell, Report};

fn ladder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ladder"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Report {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = ladder(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid report")
}

/// Exit code and the single stderr line of a failing run.
fn failure(args: &[&str]) -> (i32, String) {
    let out = ladder(args);
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    (out.status.code().unwrap(), err.trim_end().to_string())
}

fn float(c: &Cell) -> f64 {
    match c {
        Cell::Float(v) => *v,
        Cell::Int(v) => *v as f64,
        other => panic!("not numeric: {other:?}"),
    }
}

fn column(r: &Report, table: &str, col: &str) -> Vec<Cell> {
    let t = r.tables.iter().find(|t| t.name == table).expect("table present");
    let i = t.columns.iter().position(|c| c == col).expect("column present");
    t.rows.iter().map(|row| row[i].clone()).collect()
}

#[test]
fn circular_spectrum_matches_closed_form() {
    let r = json(&["spectrum", "--n", "20"]);
    assert_eq!(r.summary["levels"], 40);
    assert!(r.summary["closed_form_deviation"].as_f64().unwrap() <= 1e-10);
    assert!(r.summary["max_abs_im"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn moebius_spectrum_splits_into_parity_sectors() {
    let r = json(&["spectrum", "--n", "20", "--topology", "moebius"]);
    assert!(r.summary["closed_form_deviation"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r.summary["parity_counts"]["even"], 20);
    assert_eq!(r.summary["parity_counts"]["odd"], 20);
}

#[test]
fn too_small_ladder_is_invalid() {
    let (code, line) = failure(&["spectrum", "--n", "2"]);
    assert_eq!(code, 2);
    assert!(line.starts_with("error[invalid-parameter]"), "{line}");
}

#[test]
fn huckel_four_levels() {
    let r = json(&["effective", "huckel", "--n", "4"]);
    let labels: Vec<Cell> = column(&r, "levels", "label");
    let expect = ["alpha - 1.618 beta", "alpha - 0.618 beta", "alpha + 0.618 beta", "alpha + 1.618 beta"];
    assert_eq!(labels, expect.map(Cell::from).to_vec());
}

#[test]
fn spiral_is_defective_at_zero_eta() {
    let r = json(&["effective", "spiral", "--eta", "0"]);
    assert_eq!(r.summary["defective"], true);
}

#[test]
fn pt2x2_sweep_finds_eps_at_plus_minus_two() {
    let r = json(&["effective", "pt2x2", "--gamma", "0", "--xi", "1", "--sweep-delta", "-4", "4"]);
    let mut eps: Vec<f64> = column(&r, "ep_estimates", "parameter").iter().map(float).collect();
    eps.sort_by(f64::total_cmp);
    assert_eq!(eps.len(), 2);
    assert!((eps[0] + 2.0).abs() <= 1e-9 && (eps[1] - 2.0).abs() <= 1e-9, "{eps:?}");
    assert_eq!(r.summary["converged_eps"], 2);
}

#[test]
fn complex_alpha_four_by_four_has_no_eps() {
    let r = json(&["eps", "--preset", "fig3i"]);
    assert_eq!(r.summary["ep_estimates"], 0);
    assert_eq!(r.summary["pt_windows"], 0);
}

#[test]
fn four_by_four_pt_windows() {
    let r = json(&["eps", "--preset", "fig3f"]);
    assert_eq!(r.summary["closed_windows"], 2);
    assert_eq!(r.summary["converged_eps"], 4);
}

#[test]
fn small_moebius_gamma_sweep_has_converged_eps() {
    let r = json(&["eps", "--n", "6", "--topology", "moebius", "--parameter", "gamma", "--start", "0", "--end", "3", "--window", "6"]);
    assert!(r.summary["ep_estimates"].as_u64().unwrap() >= 2);
    let converged = column(&r, "ep_estimates", "converged");
    assert!(converged.iter().all(|c| *c == Cell::Bool(true)), "{converged:?}");
}

#[test]
fn scaling_self_test_recovers_inverse_size() {
    let r = json(&["scaling", "--self-test"]);
    assert!((r.summary["exponent"].as_f64().unwrap() + 1.0).abs() <= 1e-12);
}

#[test]
fn output_is_deterministic() {
    let args = ["sweep", "--n", "8", "--parameter", "delta", "--start", "0", "--end", "2", "--steps", "41"];
    let a = ladder(&args);
    let b = ladder(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bands.json");
    let out = ladder(&["bands", "--n", "6", "--overlay", "--k-points", "16", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let r: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(r.schema_version, 1);
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);
    assert_eq!(column(&r, "levels", "k").len(), 12);
}

#[test]
fn csv_has_header_and_tables() {
    let out = ladder(&["spectrum", "--n", "4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# ladder spectrum schema_version=1");
    assert!(lines[1].starts_with("# config="));
    assert!(lines[2].starts_with("# summary="));
    assert_eq!(lines[3], "# table=levels rows=8");
    assert_eq!(lines[4], "index,re,im,parity,parity_defect");
    assert_eq!(lines.len(), 13);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# small ladder\nn = 5\ntopology = moebius\n").unwrap();
    let r = json(&["spectrum", "--config", cfg.to_str().unwrap(), "--n", "7"]);
    assert_eq!(r.summary["levels"], 14);
    assert_eq!(r.config["ladder"]["topology"], "moebius");
}

#[test]
fn bad_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "colour = blue\n").unwrap();
    let (code, line) = failure(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(line.starts_with("error[invalid-config]"), "{line}");
}

#[test]
fn error_codes() {
    let cases: [(&[&str], i32, &str); 6] = [
        (&["effective", "bogus"], 2, "unknown-model"),
        (&["spectrum", "--preset", "nope"], 2, "unknown-preset"),
        (&["sweep", "--n", "5"], 2, "missing-parameter"),
        (&["sweep", "--n", "5", "--parameter", "gamma", "--start", "1", "--end", "0"], 2, "invalid-sweep"),
        (&["spectrum", "--n", "5", "--bogus"], 2, "usage"),
        (&["scaling", "--family", "pt", "--sizes", "6,8,10", "--range", "2.5", "3"], 3, "no-feature"),
    ];
    for (args, code, tag) in cases {
        let (got, line) = failure(args);
        assert_eq!(got, code, "{args:?}: {line}");
        assert!(line.starts_with(&format!("error[{tag}]")), "{args:?}: {line}");
    }
}
