// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

use dotdfs::bath::noiseless_spacing;
use dotdfs::lindblad::Method;
use dotdfs::model::MaterialParams;
use dotdfs_cli::config::{default_sweep, ExperimentConfig, ExperimentId, InitialState};
use dotdfs_cli::CliError;

fn field_of(err: CliError) -> String {
    match err {
        CliError::Config { field, .. } => field,
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn minimal_config_materialises_documented_defaults() {
    let cfg = ExperimentConfig::from_json(r#"{"experiment": "fig2-rate-vs-a"}"#).unwrap();
    assert_eq!(cfg.experiment, Some(ExperimentId::Fig2));
    assert_eq!(cfg.geometry.n_dots, 4);
    assert_eq!(cfg.geometry.d, 4.0);
    assert_eq!(cfg.geometry.e, 5.0);
    assert_eq!(cfg.temperature, 10.0);
    assert_eq!(cfg.materials.params(), MaterialParams::gaas());
    let a_bar = noiseless_spacing(5.0, &MaterialParams::gaas()).unwrap();
    assert_eq!(cfg.geometry.a, Some(a_bar));
    assert_eq!(cfg.sweep, default_sweep(ExperimentId::Fig2));
    assert_eq!(cfg.initial_state, Some(InitialState::DimerPartition(vec![[1, 2], [3, 4]])));
    assert_eq!(cfg.integrator.method, Method::Spectral);
    assert!(cfg.lamb_shift);
    let labels: Vec<&str> = cfg.cases.iter().map(|c| c.label.as_str()).collect();
    assert_eq!(labels, ["A", "B", "C"]);
}

#[test]
fn negative_spacing_names_the_field() {
    let err = ExperimentConfig::from_json(r#"{"geometry": {"a": -1.0}}"#).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("geometry.a"), "{err}");
    assert_eq!(field_of(err), "geometry.a");
}

#[test]
fn unknown_keys_rejected_at_every_level() {
    for text in [
        r#"{"experimnt": "fig1-rate-vs-E"}"#,
        r#"{"materials": {"sound_sped": 5.0}}"#,
        r#"{"integrator": {"method": "spectral", "order": 5}}"#,
        r#"{"cases": [{"label": "X", "spacing": 1.0, "colour": "red"}]}"#,
    ] {
        let err = ExperimentConfig::from_json(text).unwrap_err();
        assert!(matches!(err, CliError::Parse(_)), "{text}: {err}");
        assert!(err.to_string().contains("unknown field"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
    assert!(matches!(
        ExperimentConfig::from_json(r#"{"experiment": "fig4"}"#),
        Err(CliError::Parse(_))
    ));
}

#[test]
fn materialised_config_round_trips() {
    for text in [
        r#"{"experiment": "fig1-rate-vs-E"}"#,
        r#"{"experiment": "fig3-fidelity", "geometry": {"n_dots": 2, "a": 3.0}, "cases": [{"label": "x", "spacing": 2.0}]}"#,
        r#"{"geometry": {"n_dots": 1}, "initial_state": {"amplitudes": [[0.0, 0.0], [1.0, 0.0]]}, "synthetic": {"kind": "diagonal", "gamma_plus": 0.0, "gamma_minus": 0.01}}"#,
    ] {
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let echo = cfg.echo();
        let again = ExperimentConfig::from_json(&echo).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.echo(), echo);
    }
}

#[test]
fn field_level_validation() {
    let cases = [
        (r#"{"geometry": {"n_dots": 4}, "initial_state": {"dimer_partition": [[1, 2], [2, 4]]}}"#, "initial_state.dimer_partition"),
        (r#"{"geometry": {"n_dots": 6}}"#, "integrator.method"),
        (r#"{"geometry": {"e": 40.0}}"#, "geometry.e"),
        (r#"{"experiment": "fig1-rate-vs-E", "sweep": {"start": 4.0, "stop": 40.0, "step": 1.0}}"#, "sweep.stop"),
        (r#"{"sweep": {"start": 1.0, "stop": 2.0, "step": 0.0}}"#, "sweep.step"),
        (r#"{"sweep": {"start": 3.0, "stop": 2.0, "step": 0.1}}"#, "sweep"),
        (r#"{"temperature": -1.0}"#, "temperature"),
        (r#"{"integrator": {"rel_tol": 0.5}}"#, "integrator.rel_tol"),
        (r#"{"time_grid": {"start": 10.0, "stop": 1.0}}"#, "time_grid.stop"),
        (r#"{"cases": [{"label": "A", "spacing": 1.0}, {"label": "A", "spacing": 2.0}]}"#, "cases[1].label"),
        (r#"{"cases": [{"label": "A", "spacing": 1.0, "spacing_fraction": 0.5}]}"#, "cases[0]"),
        (r#"{"cutoff_multiplier": 2.0}"#, "cutoff_multiplier"),
        (r#"{"oracle_samples": 10}"#, "oracle_samples"),
        (r#"{"initial_state": {"amplitudes": [[1.0, 0.0]]}}"#, "initial_state.amplitudes"),
        (r#"{"materials": {"sound_speed": 0.0}}"#, "materials.sound_speed"),
        (r#"{"experiment": "fig2-rate-vs-a", "geometry": {"n_dots": 3}}"#, "initial_state"),
    ];
    for (text, field) in cases {
        let err = ExperimentConfig::from_json(text).unwrap_err();
        assert_eq!(field_of(err), field, "{text}");
    }
}

#[test]
fn odd_register_accepts_explicit_amplitudes() {
    let cfg = ExperimentConfig::from_json(
        r#"{"geometry": {"n_dots": 1}, "initial_state": {"amplitudes": [[0.0, 0.0], [2.0, 0.0]]}}"#,
    )
    .unwrap();
    let psi = cfg.register_state().unwrap();
    assert!((psi.amplitudes[1].re - 1.0).abs() < 1e-15);
}

#[test]
fn log_time_grid_hits_decades() {
    let cfg = ExperimentConfig::from_json("{}").unwrap();
    let t = cfg.time_grid.times();
    assert_eq!(t[0], 0.0);
    assert_eq!(t[1], 1e-2);
    assert_eq!(*t.last().unwrap(), 1e6);
    assert!(t.contains(&1000.0));
    assert_eq!(t.len(), 2 + 80);
    assert!(t.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn sweep_includes_endpoint() {
    let s = default_sweep(ExperimentId::Fig1).unwrap();
    let v = s.values();
    assert_eq!(v.first(), Some(&s.start));
    assert!((v.last().unwrap() - s.stop).abs() < 1e-12);
}
