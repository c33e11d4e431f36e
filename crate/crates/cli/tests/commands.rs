// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the `dotdfs` binary.

use std::path::Path;
use std::process::{Command, Output};

use dotdfs::bath::CorrelationSet;
use dotdfs_cli::output::read_csv;
use tempfile::TempDir;

fn dotdfs(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dotdfs"))
        .args(args)
        .current_dir(dir)
        .env_remove("DOTDFS_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn assert_ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_config_exits_with_code_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"geometry": {"a": -2.0}}"#);
    let out = dotdfs(&["fig3", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("geometry.a"));

    let cfg = write_config(dir.path(), "fig1.json", r#"{"experiment": "fig1-rate-vs-E"}"#);
    let out = dotdfs(&["fig2", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = dotdfs(&["fig1", "--config", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = dotdfs(&["fig1", "--threads", "0", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fig1_rates_positive_and_rise_with_temperature() {
    let dir = TempDir::new().unwrap();
    assert_ok(&dotdfs(&["fig1", "--out", "cold"], dir.path()));
    let hot = write_config(dir.path(), "hot.json", r#"{"temperature": 20.0}"#);
    assert_ok(&dotdfs(&["fig1", "--config", &hot, "--out", "hot"], dir.path()));

    let (header, cold_rows) = read_csv(&dir.path().join("cold/fig1-rate-vs-E.csv")).unwrap();
    assert_eq!(header, ["E_meV", "rate_ps"]);
    let (_, hot_rows) = read_csv(&dir.path().join("hot/fig1-rate-vs-E.csv")).unwrap();
    let cold = column(&header, &cold_rows, "rate_ps");
    let hot = column(&header, &hot_rows, "rate_ps");
    assert!(cold.iter().all(|&r| r > 0.0));
    assert!(cold.iter().zip(&hot).all(|(c, h)| h > c));
}

#[test]
fn fig2_rows_in_sweep_order() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"sweep": {"start": 0.5, "stop": 9.0, "step": 0.5}}"#,
    );
    let out = dotdfs(&["fig2", "--config", &cfg, "--out", "o", "--threads", "3"], dir.path());
    assert_ok(&out);
    // the dimer singlet is worse than independent dots near a = ā/2
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: tau1_inv exceeds"));
    let (header, rows) = read_csv(&dir.path().join("o/fig2-rate-vs-a.csv")).unwrap();
    assert_eq!(header, ["a_nm", "tau1_inv_ps", "uncorrelated_rate_ps", "fD_minus", "fD_plus"]);
    let a = column(&header, &rows, "a_nm");
    assert_eq!(a.len(), 18);
    assert!(a.windows(2).all(|w| w[1] > w[0]));
    let unc = column(&header, &rows, "uncorrelated_rate_ps");
    assert!(unc.iter().all(|&u| u == unc[0]));
    let tau = column(&header, &rows, "tau1_inv_ps");
    assert!(tau.iter().all(|&t| t >= 0.0));
}

#[test]
fn fig3_cases_and_cross_experiment_consistency() {
    let dir = TempDir::new().unwrap();
    assert_ok(&dotdfs(&["fig3", "--out", "o"], dir.path()));
    let (header, rows) = read_csv(&dir.path().join("o/fig3-summary.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[2] == "ok"));
    for label in ["A", "B", "C"] {
        let (h, t) = read_csv(&dir.path().join(format!("o/fig3-fidelity-{label}.csv"))).unwrap();
        let times = column(&h, &t, "t_ps");
        let f = column(&h, &t, "fidelity");
        assert_eq!(times[0], 0.0);
        assert!((f[0] - 1.0).abs() < 1e-12, "case {label} starts at F = {}", f[0]);
        assert_eq!(*times.last().unwrap(), 1e6);
    }
    // case B decays on a sub-ns scale
    let crossing = column(&header, &rows[1..2], "t_F_below_threshold_ps")[0];
    assert!(crossing < 1000.0);

    // fig3's measured early slope against fig2's analytic rate at the same spacings
    let spacings = column(&header, &rows, "a_nm");
    let slopes = column(&header, &rows, "early_slope_ps");
    let sweep: Vec<String> = spacings
        .iter()
        .map(|a| format!(r#"{{"experiment": "fig2-rate-vs-a", "sweep": {{"start": {a:e}, "stop": {a:e}, "step": 1.0}}}}"#))
        .collect();
    for ((a, slope), json) in spacings.iter().zip(&slopes).zip(&sweep) {
        let cfg = write_config(dir.path(), "one.json", json);
        assert_ok(&dotdfs(&["fig2", "--config", &cfg, "--out", "f2"], dir.path()));
        let (h2, r2) = read_csv(&dir.path().join("f2/fig2-rate-vs-a.csv")).unwrap();
        assert_eq!(column(&h2, &r2, "a_nm"), [*a]);
        let tau = column(&h2, &r2, "tau1_inv_ps")[0];
        let predicted = dotdfs::register::FIDELITY_SLOPE_FACTOR * tau;
        assert!((slope / predicted - 1.0).abs() < 0.02, "a = {a}: slope {slope} vs {predicted}");
    }
}

#[test]
fn fig3_case_failures_do_not_abort_the_batch() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"integrator": {"method": "adaptive-step", "max_steps": 60},
            "lamb_shift": false,
            "time_grid": {"start": 1.0, "stop": 1e6, "points_per_decade": 1},
            "cases": [{"label": "P", "spacing": 0.0}, {"label": "B", "spacing_fraction": 0.5}]}"#,
    );
    let out = dotdfs(&["fig3", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("o/fig3-summary.csv")).unwrap();
    let status = header.iter().position(|h| h == "status").unwrap();
    // a point-like register never leaves the dark state, so its steps grow
    // freely; case B must resolve its decay and runs out of budget
    assert_eq!(rows[0][status], "ok");
    assert_eq!(rows[1][status], "error");
    assert!(dir.path().join("o/fig3-fidelity-P.csv").exists());
    assert!(!dir.path().join("o/fig3-fidelity-B.csv").exists());
}

#[test]
fn gamma_dump_feeds_evolve() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "g.json",
        r#"{"geometry": {"n_dots": 2, "a": 3.0}, "oracle_samples": 100000, "seed": 9}"#,
    );
    assert_ok(&dotdfs(&["gamma-dump", "--config", &cfg, "--out", "g"], dir.path()));
    let text = std::fs::read_to_string(dir.path().join("g/correlations.json")).unwrap();
    let set = CorrelationSet::from_json(&text).unwrap();
    assert_eq!(set.geometry.n_dots, 2);
    let (header, rows) = read_csv(&dir.path().join("g/gamma-oracle.csv")).unwrap();
    assert_eq!(rows.len(), 8);
    let exact = column(&header, &rows, "gamma_re");
    let sampled = column(&header, &rows, "oracle_re");
    let se = column(&header, &rows, "se_re");
    for k in 0..rows.len() {
        assert!((exact[k] - sampled[k]).abs() <= 5.0 * se[k], "row {k}: {} vs {} (se {})", exact[k], sampled[k], se[k]);
    }

    let path = dir.path().join("g/correlations.json");
    let evolve_cfg = write_config(
        dir.path(),
        "e.json",
        &format!(
            r#"{{"geometry": {{"n_dots": 2}}, "correlations_file": {:?}, "time_grid": {{"start": 1.0, "stop": 100.0}}}}"#,
            path.to_string_lossy()
        ),
    );
    assert_ok(&dotdfs(&["evolve", "--config", &evolve_cfg, "--out", "e"], dir.path()));
    let (h, r) = read_csv(&dir.path().join("e/trajectory.csv")).unwrap();
    let f = column(&h, &r, "fidelity");
    assert_eq!(f.len(), 22);
    assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-12));

    let wrong = write_config(
        dir.path(),
        "w.json",
        &format!(r#"{{"correlations_file": {:?}}}"#, path.to_string_lossy()),
    );
    assert_eq!(dotdfs(&["evolve", "--config", &wrong, "--out", "e"], dir.path()).status.code(), Some(2));
}

#[test]
fn evolve_with_synthetic_point_like_bath_stays_dark() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"synthetic": {"kind": "constant", "gamma_plus": 0.002, "gamma_minus": 0.0066, "delta_minus": 0.004}}"#,
    );
    assert_ok(&dotdfs(&["evolve", "--config", &cfg], dir.path()));
    let (h, r) = read_csv(&dir.path().join("trajectory.csv")).unwrap();
    assert!(column(&h, &r, "fidelity").iter().all(|&f| f >= 1.0 - 1e-9));
}

#[test]
fn out_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dotdfs"))
        .args(["fig1"])
        .current_dir(dir.path())
        .env("DOTDFS_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert_ok(&out);
    assert!(dir.path().join("from-env/fig1-rate-vs-E.csv").exists());
}

#[test]
fn metadata_header_echoes_config() {
    let dir = TempDir::new().unwrap();
    assert_ok(&dotdfs(&["fig1", "--seed", "17", "--out", "o"], dir.path()));
    let text = std::fs::read_to_string(dir.path().join("o/fig1-rate-vs-E.csv")).unwrap();
    let config_line = text.lines().find_map(|l| l.strip_prefix("# config: ")).unwrap();
    let cfg = dotdfs_cli::ExperimentConfig::from_json(config_line).unwrap();
    assert_eq!(cfg.seed, 17);
    assert!(text.lines().any(|l| l == "# seed: 17"));
    assert!(text.lines().any(|l| l.starts_with("# version: ")));
}
