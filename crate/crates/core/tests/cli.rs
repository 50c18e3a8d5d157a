// Copyright 2026 The qslkit Authors
// SPDX-License-Identifier: Apache-2.0

use std::process::{Command, Output};

use serde_json::Value;

fn qslkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qslkit")).args(args).env_remove("QSLKIT_THREADS").output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn headers_are_fixed() {
    let cases: [(&[&str], &str); 5] = [
        (&["scan", "--gamma0-points", "2", "--delta-points", "2"], "gamma0,delta,lambda,tau_d,ratio,classification,quad_err"),
        (&["sweep-tau", "--gamma0", "5", "--points", "3"], "tau,ratio"),
        (&["decay-rate", "--gamma0", "5", "--points", "3"], "t,gamma_over_gamma0,clipped"),
        (&["compare-bounds", "--gamma0-points", "2"], "gamma0,ratio_trace,ratio_bures"),
        (&["boundary", "--gamma0-points", "4", "--delta-points", "2"], "delta,gamma0_boundary,flip_index"),
    ];
    for (args, header) in cases {
        let text = stdout(&qslkit(args));
        assert_eq!(text.lines().next().unwrap(), header, "{args:?}");
    }
}

#[test]
fn floats_have_seventeen_significant_digits() {
    let text = stdout(&qslkit(&["sweep-tau", "--gamma0", "5", "--points", "3"]));
    for row in rows(&text) {
        for field in row {
            let mantissa = field.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "{field}");
        }
    }
}

#[test]
fn weak_coupling_ratio_is_one() {
    let text = stdout(&qslkit(&["ratio", "--gamma0", "5", "--lambda", "50", "--delta", "0", "--tau-d", "0.2"]));
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let row = &rows(&text)[0];
    let ratio = num(&row[header.iter().position(|h| *h == "ratio").unwrap()]);
    assert!((ratio - 1.0).abs() < 1e-6);
    assert_eq!(row[header.iter().position(|h| *h == "classification").unwrap()], "no_speed_up");
}

#[test]
fn json_uses_csv_field_names() {
    let csv = stdout(&qslkit(&["compare-bounds", "--gamma0-points", "3"]));
    let json: Value = serde_json::from_str(&stdout(&qslkit(&["compare-bounds", "--gamma0-points", "3", "--format", "json"]))).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let first = json["rows"][0].as_object().unwrap();
    assert_eq!(first.keys().map(String::as_str).collect::<Vec<_>>(), header);
    for (row, obj) in rows(&csv).iter().zip(json["rows"].as_array().unwrap()) {
        for (h, v) in header.iter().zip(row) {
            assert_eq!(num(v), obj[*h].as_f64().unwrap());
        }
    }
}

#[test]
fn oracle_check_passes_off_resonance() {
    let text = stdout(&qslkit(&["oracle-check", "--gamma0", "500", "--lambda", "50", "--delta", "300"]));
    let row = &rows(&text)[0];
    assert!(num(&row[5]) < 1e-6);
    assert_eq!(row[8], "true");
}

#[test]
fn oracle_mismatch_exits_nonzero() {
    let out = qslkit(&["oracle-check", "--gamma0", "500", "--step", "1e-3", "--tolerance", "1e-12"]);
    assert_eq!(out.status.code(), Some(4));
    let record: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"]["code"], "oracle_mismatch");
}

#[test]
fn resonant_onsets_coincide() {
    let text = stdout(&qslkit(&["compare-bounds", "--delta", "0", "--gamma0-points", "60"]));
    let data = rows(&text);
    let onset = |col: usize| data.iter().position(|r| num(&r[col]) < 1.0 - 1e-6).unwrap();
    assert!(onset(1).abs_diff(onset(2)) <= 1);
}

#[test]
fn invalid_input_gives_error_record() {
    let out = qslkit(&["ratio", "--gamma0", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let record: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"]["code"], "invalid_input");

    let out = qslkit(&["ratio"]);
    assert_eq!(out.status.code(), Some(2));
    let record: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"]["code"], "usage");
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_qslkit"))
        .args(["ratio", "--gamma0", "5"])
        .env("QSLKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("QSLKIT_THREADS"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("recipe.cfg");
    std::fs::write(&cfg, "# strong coupling\ngamma0 = 500\ndelta = 300\ntau_d = 0.2\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&qslkit(&["ratio", "--config", cfg]));
    let from_flags = stdout(&qslkit(&["ratio", "--gamma0", "500", "--delta", "300"]));
    assert_eq!(from_file, from_flags);
    let overridden = stdout(&qslkit(&["ratio", "--config", cfg, "--delta", "0"]));
    assert_eq!(overridden, stdout(&qslkit(&["ratio", "--gamma0", "500"])));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    let out = qslkit(&["decay-rate", "--gamma0", "500", "--points", "50", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&qslkit(&["decay-rate", "--gamma0", "500", "--points", "50"])));
}

#[test]
fn failed_cells_leave_an_incomplete_marker() {
    let out = qslkit(&["scan", "--gamma0-points", "3", "--delta-points", "2", "--rel-tol", "1e-16", "--max-depth", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 7);
    assert!(text.lines().last().unwrap().starts_with("# incomplete:"));
    assert!(text.contains(",failed,"));
    let record: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"]["code"], "incomplete");
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["boundary", "--gamma0-points", "10", "--delta-points", "4"];
    assert_eq!(stdout(&qslkit(&args)), stdout(&qslkit(&args)));
}
