// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! The experiments behind each subcommand. The `*_rows` / `*_case` functions
//! are pure computations; the `run_*` functions add file output.

use std::path::{Path, PathBuf};

use dotdfs::bath::oracle::gamma_bruteforce_oracle;
use dotdfs::bath::{single_dot_rate, CorrelationSet, Process};
use dotdfs::lindblad::{evolve, fit_initial_slope, DensityMatrix, Liouvillian, SlopeFit, TrajectoryRecord};
use dotdfs::register::{correlation_factor, tau1_inverse, uncorrelated_rate, FIDELITY_SLOPE_FACTOR};
use dotdfs::{CMatrix, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentId, InitialState, SyntheticKind};
use crate::error::CliError;
use crate::output::{fmt_f64, fmt_opt, write_csv, write_text, Metadata};

/// Fidelity threshold reported in the fig3 summary.
pub const FIDELITY_THRESHOLD: f64 = 0.9;

/// Time at which the fig3 summary samples the fidelity, ps.
pub const SUMMARY_TIME_PS: f64 = 1000.0;

/// Files written by a run, per-case failures that did not abort it, and
/// diagnostics worth a look.
#[derive(Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

fn sweep_values(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    cfg.sweep.map(|s| s.values()).ok_or_else(|| CliError::Config {
        field: "sweep".into(),
        message: "this experiment needs a sweep".into(),
    })
}

pub fn metadata(cfg: &ExperimentConfig, experiment: &str) -> Metadata {
    Metadata {
        experiment: experiment.into(),
        seed: cfg.seed,
        config_json: cfg.echo(),
        extra: Vec::new(),
    }
}

// ---------------------------------------------------------------- fig1

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig1Row {
    pub e_mev: f64,
    pub rate_ps: f64,
}

/// Single-dot relaxation rate over the splitting sweep.
pub fn fig1_rows(cfg: &ExperimentConfig) -> Result<Vec<Fig1Row>, CliError> {
    let materials = cfg.materials();
    let opts = cfg.bath_options();
    sweep_values(cfg)?
        .into_par_iter()
        .map(|e| {
            let rate = single_dot_rate(e, cfg.geometry.d, &materials, cfg.temperature, &opts)?;
            Ok(Fig1Row { e_mev: e, rate_ps: rate })
        })
        .collect()
}

pub fn run_fig1(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let rows = fig1_rows(cfg)?;
    let path = out.join("fig1-rate-vs-E.csv");
    let table: Vec<Vec<String>> = rows.iter().map(|r| vec![fmt_f64(r.e_mev), fmt_f64(r.rate_ps)]).collect();
    let meta = metadata(cfg, ExperimentId::Fig1.as_str()).with("units", "E_meV [meV], rate_ps [1/ps]");
    write_csv(&path, &meta, &["E_meV", "rate_ps"], &table)?;
    Ok(RunReport {
        files: vec![path],
        ..Default::default()
    })
}

// ---------------------------------------------------------------- fig2

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig2Row {
    pub a_nm: f64,
    pub tau1_inv_ps: f64,
    pub uncorrelated_rate_ps: f64,
    pub fd_minus: f64,
    /// Undefined (and `None`) when absorption vanishes at `T = 0`.
    pub fd_plus: Option<f64>,
}

/// First-order decoherence rate of the configured dimer-singlet state over
/// the spacing sweep.
pub fn fig2_rows(cfg: &ExperimentConfig) -> Result<Vec<Fig2Row>, CliError> {
    let partition = cfg.partition()?;
    let psi = dotdfs::register::singlet_dimer_state(&partition)?;
    let materials = cfg.materials();
    let opts = cfg.bath_options();
    sweep_values(cfg)?
        .into_par_iter()
        .map(|a| {
            let geom = cfg.array_geometry(a)?;
            let set = CorrelationSet::compute_dissipative(&geom, &materials, cfg.temperature, &opts)?;
            let fd_plus = if set.gamma_plus[[0, 0]].norm() > 0.0 {
                Some(correlation_factor(&set.gamma_plus, &partition)?)
            } else {
                None
            };
            Ok(Fig2Row {
                a_nm: a,
                tau1_inv_ps: tau1_inverse(&psi, &set.gamma_plus, &set.gamma_minus)?,
                uncorrelated_rate_ps: uncorrelated_rate(&set.gamma_plus, &set.gamma_minus),
                fd_minus: correlation_factor(&set.gamma_minus, &partition)?,
                fd_plus,
            })
        })
        .collect()
}

pub fn run_fig2(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let rows = fig2_rows(cfg)?;
    let path = out.join("fig2-rate-vs-a.csv");
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.a_nm),
                fmt_f64(r.tau1_inv_ps),
                fmt_f64(r.uncorrelated_rate_ps),
                fmt_f64(r.fd_minus),
                fmt_opt(r.fd_plus),
            ]
        })
        .collect();
    let meta = metadata(cfg, ExperimentId::Fig2.as_str())
        .with("units", "a_nm [nm], tau1_inv_ps [1/ps], uncorrelated_rate_ps [1/ps]");
    write_csv(
        &path,
        &meta,
        &["a_nm", "tau1_inv_ps", "uncorrelated_rate_ps", "fD_minus", "fD_plus"],
        &table,
    )?;
    // a dimer singlet beats independent dots only where f_D ≤ 1; report the
    // anti-correlated spacings where it does not
    let above: Vec<&Fig2Row> = rows
        .iter()
        .filter(|r| r.tau1_inv_ps > r.uncorrelated_rate_ps * (1.0 + 1e-9))
        .collect();
    let mut report = RunReport {
        files: vec![path],
        ..Default::default()
    };
    if let (Some(first), Some(last)) = (above.first(), above.last()) {
        report.warnings.push(format!(
            "tau1_inv exceeds the uncorrelated rate at {} of {} spacings (a_nm in [{}, {}]): f_D > 1",
            above.len(),
            rows.len(),
            first.a_nm,
            last.a_nm
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------- fig3

/// Everything reported about one fig3 case.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub label: String,
    pub spacing: f64,
    pub trajectory: TrajectoryRecord,
    /// `τ₁⁻¹` when the initial state is a total-spin eigenstate.
    pub tau1_inv: Option<f64>,
    pub uncorrelated_rate: f64,
    pub fd_minus: Option<f64>,
    /// Quadratic fit of the early decay, when `τ₁⁻¹ > 0`.
    pub slope: Option<SlopeFit>,
    pub crossing_time: Option<f64>,
    pub fidelity_at_summary_time: f64,
}

/// Device correlations at `spacing`: from the config's file, synthetic
/// matrices, or the bath integrals.
pub fn correlations(cfg: &ExperimentConfig, spacing: f64) -> Result<CorrelationSet, CliError> {
    let materials = cfg.materials();
    if let Some(path) = &cfg.correlations_file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            field: "correlations_file".into(),
            message: format!("{path}: {e}"),
        })?;
        let set = CorrelationSet::from_json(&text).map_err(|e| CliError::Config {
            field: "correlations_file".into(),
            message: e.to_string(),
        })?;
        if set.geometry.n_dots != cfg.geometry.n_dots {
            return Err(CliError::Config {
                field: "correlations_file".into(),
                message: format!(
                    "file holds {} dots but geometry.n_dots = {}",
                    set.geometry.n_dots, cfg.geometry.n_dots
                ),
            });
        }
        return Ok(set);
    }
    let geom = cfg.array_geometry(spacing)?;
    if let Some(s) = &cfg.synthetic {
        let n = cfg.geometry.n_dots;
        let fill = |v: f64| -> CMatrix {
            match s.kind {
                SyntheticKind::Constant => CMatrix::from_elem((n, n), C64::new(v, 0.0)),
                SyntheticKind::Diagonal => CMatrix::eye(n) * C64::new(v, 0.0),
            }
        };
        let set = CorrelationSet::from_matrices(
            geom,
            materials,
            cfg.temperature,
            fill(s.gamma_plus),
            fill(s.gamma_minus),
            fill(s.delta_plus),
            fill(s.delta_minus),
        )?;
        return Ok(set);
    }
    let opts = cfg.bath_options();
    let set = if cfg.lamb_shift {
        CorrelationSet::compute(&geom, &materials, cfg.temperature, &opts)?
    } else {
        CorrelationSet::compute_dissipative(&geom, &materials, cfg.temperature, &opts)?
    };
    Ok(set)
}

/// Evolve the configured initial state at `spacing` over `times`, plus the
/// early-slope and summary diagnostics.
pub fn fidelity_case(cfg: &ExperimentConfig, label: &str, spacing: f64, times: &[f64]) -> Result<CaseResult, CliError> {
    let set = correlations(cfg, spacing)?;
    let liouvillian = Liouvillian::from_correlations(&set, cfg.lamb_shift)?;
    let psi = cfg.register_state()?;
    let rho0 = DensityMatrix::from_pure(&psi);
    let opts = cfg.evolve_options();

    let trajectory = evolve(&liouvillian, &rho0, times, &psi, &opts)?;
    let tau1_inv = tau1_inverse(&psi, &set.gamma_plus, &set.gamma_minus).ok();
    let fd_minus = match &cfg.initial_state {
        Some(InitialState::DimerPartition(_)) if set.gamma_minus[[0, 0]].norm() > 0.0 => {
            Some(correlation_factor(&set.gamma_minus, &cfg.partition()?)?)
        }
        _ => None,
    };
    let slope = match tau1_inv {
        Some(rate) if rate > 0.0 => {
            // well inside the linear regime: F − 1 ≈ −2τ₁⁻¹t stays below 2e-3
            let t_fit = 1e-3 / rate;
            let grid: Vec<f64> = (1..=40).map(|k| t_fit * k as f64 / 40.0).collect();
            let early = evolve(&liouvillian, &rho0, &grid, &psi, &opts)?;
            Some(fit_initial_slope(&early.rows, t_fit)?)
        }
        _ => None,
    };
    let at_summary = evolve(&liouvillian, &rho0, &[SUMMARY_TIME_PS], &psi, &opts)?;
    Ok(CaseResult {
        label: label.into(),
        spacing,
        crossing_time: trajectory.crossing_time(FIDELITY_THRESHOLD),
        trajectory,
        tau1_inv,
        uncorrelated_rate: uncorrelated_rate(&set.gamma_plus, &set.gamma_minus),
        fd_minus,
        slope,
        fidelity_at_summary_time: at_summary.rows[0].fidelity,
    })
}

/// Spacing of each configured case, nm.
pub fn case_spacings(cfg: &ExperimentConfig) -> Vec<(String, f64)> {
    let a_bar = cfg.spacing_noiseless();
    cfg.cases
        .iter()
        .map(|c| {
            let a = c.spacing.unwrap_or_else(|| c.spacing_fraction.unwrap_or(1.0) * a_bar);
            (c.label.clone(), a)
        })
        .collect()
}

pub fn run_fig3(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let times = cfg.time_grid.times();
    let cases = case_spacings(cfg);
    let results: Vec<Result<CaseResult, CliError>> = cases
        .par_iter()
        .map(|(label, a)| fidelity_case(cfg, label, *a, &times))
        .collect();

    let meta = metadata(cfg, ExperimentId::Fig3.as_str());
    let mut report = RunReport::default();
    let mut summary = Vec::new();
    for ((label, a), result) in cases.iter().zip(results) {
        match result {
            Ok(r) => {
                let path = out.join(format!("fig3-fidelity-{label}.csv"));
                let case_meta = meta
                    .with("case", format!("{label}, a_nm = {}", fmt_f64(*a)))
                    .with("method", method_name(&r.trajectory));
                write_trajectory(&path, &case_meta, &r.trajectory)?;
                report.files.push(path);
                summary.push(summary_row(&r));
            }
            Err(e) => {
                report.failures.push(format!("case {label}: {e}"));
                let mut row = vec![String::new(); SUMMARY_HEADER.len()];
                row[0] = label.clone();
                row[1] = fmt_f64(*a);
                row[2] = "error".into();
                row[SUMMARY_HEADER.len() - 1] = e.to_string();
                summary.push(row);
            }
        }
    }
    let path = out.join("fig3-summary.csv");
    write_csv(&path, &meta.with("threshold", fmt_f64(FIDELITY_THRESHOLD)), SUMMARY_HEADER, &summary)?;
    report.files.push(path);
    Ok(report)
}

const SUMMARY_HEADER: &[&str] = &[
    "case",
    "a_nm",
    "status",
    "tau1_inv_ps",
    "uncorrelated_rate_ps",
    "fD_minus",
    "early_slope_ps",
    "slope_over_tau1_inv",
    "t_F_below_threshold_ps",
    "F_at_1ns",
    "work",
    "message",
];

fn summary_row(r: &CaseResult) -> Vec<String> {
    let ratio = match (r.slope, r.tau1_inv) {
        (Some(s), Some(t)) => Some(s.slope / t),
        _ => None,
    };
    vec![
        r.label.clone(),
        fmt_f64(r.spacing),
        "ok".into(),
        fmt_opt(r.tau1_inv),
        fmt_f64(r.uncorrelated_rate),
        fmt_opt(r.fd_minus),
        fmt_opt(r.slope.map(|s| s.slope)),
        fmt_opt(ratio),
        fmt_opt(r.crossing_time),
        fmt_f64(r.fidelity_at_summary_time),
        r.trajectory.work.to_string(),
        if ratio.is_some_and(|x| (x / FIDELITY_SLOPE_FACTOR - 1.0).abs() > 0.02) {
            "early slope departs from the first-order prediction".into()
        } else {
            String::new()
        },
    ]
}

fn method_name(t: &TrajectoryRecord) -> String {
    serde_json::to_value(t.method)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

pub const TRAJECTORY_HEADER: &[&str] = &["t_ps", "fidelity", "trace_dev", "min_eig", "purity"];

fn write_trajectory(path: &Path, meta: &Metadata, t: &TrajectoryRecord) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.t_ps),
                fmt_f64(r.fidelity),
                fmt_f64(r.trace_dev),
                fmt_f64(r.min_eig),
                fmt_f64(r.purity),
            ]
        })
        .collect();
    write_csv(path, meta, TRAJECTORY_HEADER, &rows)
}

// ---------------------------------------------------------------- gamma-dump

pub fn run_gamma_dump(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let set = correlations(cfg, cfg.spacing())?;
    let mut report = RunReport::default();
    let path = out.join("correlations.json");
    write_text(&path, &set.to_json()?)?;
    report.files.push(path);

    let meta = metadata(cfg, "gamma-dump");
    let meta_path = out.join("correlations.meta.json");
    let meta_json = serde_json::json!({
        "tool": crate::output::TOOL,
        "version": crate::output::VERSION,
        "experiment": meta.experiment,
        "seed": cfg.seed,
        "config": cfg,
    });
    write_text(&meta_path, &serde_json::to_string_pretty(&meta_json).expect("json value"))?;
    report.files.push(meta_path);

    if cfg.oracle_samples > 0 {
        let mut rows = Vec::new();
        for process in Process::BOTH {
            let mc = gamma_bruteforce_oracle(
                process,
                &set.geometry,
                &set.materials,
                set.temperature,
                cfg.oracle_samples,
                cfg.seed,
            )?;
            for ((idx, exact), est) in set.gamma(process).indexed_iter().zip(mc.matrix.iter()) {
                let rel = (exact - est).norm() / exact.norm().max(f64::MIN_POSITIVE);
                rows.push(vec![
                    process.sign().to_string(),
                    idx.0.to_string(),
                    idx.1.to_string(),
                    fmt_f64(exact.re),
                    fmt_f64(exact.im),
                    fmt_f64(est.re),
                    fmt_f64(est.im),
                    fmt_f64(mc.std_error_re[idx]),
                    fmt_f64(mc.std_error_im[idx]),
                    fmt_f64(rel),
                ]);
            }
        }
        let path = out.join("gamma-oracle.csv");
        write_csv(
            &path,
            &meta.with("samples", cfg.oracle_samples.to_string()),
            &[
                "process", "i", "j", "gamma_re", "gamma_im", "oracle_re", "oracle_im", "se_re", "se_im", "rel_diff",
            ],
            &rows,
        )?;
        report.files.push(path);
    }
    Ok(report)
}

// ---------------------------------------------------------------- evolve

pub fn run_evolve(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let times = cfg.time_grid.times();
    let r = fidelity_case(cfg, "evolve", cfg.spacing(), &times)?;
    let path = out.join("trajectory.csv");
    let meta = metadata(cfg, "evolve")
        .with("method", method_name(&r.trajectory))
        .with("tau1_inv_ps", fmt_opt(r.tau1_inv))
        .with("t_F_below_threshold_ps", fmt_opt(r.crossing_time));
    write_trajectory(&path, &meta, &r.trajectory)?;
    Ok(RunReport {
        files: vec![path],
        ..Default::default()
    })
}
