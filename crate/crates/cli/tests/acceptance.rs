// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Runs every criterion, prints one `PASS`/`FAIL` line for
//! each, and exits non-zero if any failed.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use dotdfs::bath::oracle::gamma_bruteforce_oracle;
use dotdfs::bath::{gamma_matrix, noiseless_spacing, BathOptions, CorrelationSet, Process};
use dotdfs::lindblad::{evolve, DensityMatrix, EvolveOptions, Liouvillian, Method, TrajectoryRecord};
use dotdfs::model::{bose_occupation, ArrayGeometry, MaterialParams};
use dotdfs::register::{
    correlation_factor, singlet_dimer_state, tau1_inverse, uncorrelated_rate, DimerPartition, RegisterState,
};
use dotdfs::units::HBAR;
use dotdfs::{CMatrix, C64};
use dotdfs_cli::config::{ExperimentConfig, TimeGridConfig};
use dotdfs_cli::experiments::{fidelity_case, fig1_rows, fig2_rows};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAAS: MaterialParams = MaterialParams::gaas();
const SPLITTING: f64 = 5.0;
const WELL: f64 = 4.0;
const TEMPERATURE: f64 = 10.0;

/// Trajectories produced along the way, checked by the sanity criterion.
#[derive(Default)]
struct Context {
    trajectories: Vec<(String, TrajectoryRecord)>,
}

type Check = fn(&mut Context) -> Result<String, String>;

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("oracle-equivalence", oracle_equivalence),
        ("convention-anchor", convention_anchor),
        ("detailed-balance-and-thermal-state", detailed_balance),
        ("correlation-factor-identity", correlation_factor_identity),
        ("point-like-limit", point_like_limit),
        ("periodicity", periodicity),
        ("noise-suppression", noise_suppression),
        ("single-dot-rate-trend", single_dot_trend),
        ("trajectory-sanity", trajectory_sanity),
        ("determinism", determinism),
    ];
    let mut ctx = Context::default();
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&mut ctx)))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1} s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown panic".into())
}

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a_bar() -> f64 {
    noiseless_spacing(SPLITTING, &GAAS).unwrap()
}

fn geometry(n: usize, spacing: f64) -> ArrayGeometry {
    ArrayGeometry::new(n, WELL, SPLITTING, spacing, &GAAS).unwrap()
}

fn options(method: Method) -> EvolveOptions {
    EvolveOptions {
        method,
        ..Default::default()
    }
}

fn log_grid(start: f64, stop: f64) -> Vec<f64> {
    TimeGridConfig {
        start,
        stop,
        points_per_decade: 10,
        include_zero: true,
    }
    .times()
}

fn oracle_equivalence(_: &mut Context) -> Result<String, String> {
    const SAMPLES: usize = 20_000_000;
    let start = Instant::now();
    let geom = geometry(4, a_bar());
    let opts = BathOptions::default();
    let mut worst_rel: f64 = 0.0;
    let mut worst_se: f64 = 0.0;
    for process in Process::BOTH {
        let exact = gamma_matrix(process, &geom, &GAAS, TEMPERATURE, &opts).map_err(|e| e.to_string())?;
        let mc = gamma_bruteforce_oracle(process, &geom, &GAAS, TEMPERATURE, SAMPLES, 2026).map_err(|e| e.to_string())?;
        for ((idx, e), m) in exact.indexed_iter().zip(mc.matrix.iter()) {
            worst_rel = worst_rel.max((e - m).norm() / e.norm());
            worst_se = worst_se
                .max((e.re - m.re).abs() / mc.std_error_re[idx])
                .max((e.im - m.im).abs() / mc.std_error_im[idx].max(f64::MIN_POSITIVE));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst_rel <= 0.01 && worst_se <= 3.0 && secs < 60.0,
        format!("N = 4, {SAMPLES} samples per process: worst relative deviation {worst_rel:.2e}, worst {worst_se:.2} standard errors, {secs:.1} s"),
    )
}

fn single_qubit_liouvillian(temperature: f64) -> (CorrelationSet, Liouvillian) {
    let set = CorrelationSet::compute_dissipative(&geometry(1, 0.0), &GAAS, temperature, &BathOptions::default()).unwrap();
    let l = Liouvillian::from_correlations(&set, false).unwrap();
    (set, l)
}

fn convention_anchor(ctx: &mut Context) -> Result<String, String> {
    let (set, l) = single_qubit_liouvillian(0.0);
    let expected = 2.0 * set.gamma_minus[[0, 0]].re / HBAR;
    let excited = RegisterState::basis(1, 1).unwrap();
    let rho0 = DensityMatrix::from_pure(&excited);
    let times: Vec<f64> = (0..=30).map(|k| k as f64 * 0.1 / expected).collect();
    let mut worst: f64 = 0.0;
    for method in [Method::Spectral, Method::AdaptiveStep] {
        let traj = evolve(&l, &rho0, &times, &excited, &options(method)).map_err(|e| e.to_string())?;
        // least-squares slope of ln P(t) through the origin
        let (num, den) = traj.rows[1..]
            .iter()
            .fold((0.0, 0.0), |(n, d), r| (n - r.t_ps * r.fidelity.ln(), d + r.t_ps * r.t_ps));
        worst = worst.max((num / den / expected - 1.0).abs());
        ctx.trajectories.push((format!("anchor/{method:?}"), traj));
    }
    ensure(
        worst <= 0.005,
        format!("2Γ⁻₁₁/ħ = {expected:.6e} ps⁻¹, worst relative deviation of the fitted decay rate {worst:.2e}"),
    )
}

fn detailed_balance(ctx: &mut Context) -> Result<String, String> {
    let (set, l) = single_qubit_liouvillian(TEMPERATURE);
    let n = bose_occupation(SPLITTING, TEMPERATURE).unwrap();
    let ratio = set.gamma_plus[[0, 0]].re / set.gamma_minus[[0, 0]].re;
    let balance = (ratio / (n / (n + 1.0)) - 1.0).abs();

    let rate = 2.0 * (set.gamma_plus[[0, 0]].re + set.gamma_minus[[0, 0]].re) / HBAR;
    let excited = RegisterState::basis(1, 1).unwrap();
    let thermal = n / (2.0 * n + 1.0);
    let mut worst: f64 = 0.0;
    for start in [0, 1] {
        let rho0 = DensityMatrix::from_pure(&RegisterState::basis(1, start).unwrap());
        let times = [0.0, 1.0 / rate, 60.0 / rate];
        let traj = evolve(&l, &rho0, &times, &excited, &options(Method::Spectral)).map_err(|e| e.to_string())?;
        worst = worst.max((traj.rows[2].fidelity - thermal).abs());
        ctx.trajectories.push((format!("thermal/from-{start}"), traj));
    }
    ensure(
        balance <= 1e-10 && worst <= 1e-6,
        format!("Γ⁺₁₁/Γ⁻₁₁ off n/(n+1) by {balance:.1e} (relative); steady excited population off n/(2n+1) by {worst:.1e}"),
    )
}

/// Random PSD matrix with equal diagonal entries `scale`.
fn random_correlation(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    let a = CMatrix::from_shape_fn((n, n + 1), |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let g = a.dot(&a.t().mapv(|z| z.conj()));
    let d: Vec<f64> = (0..n).map(|i| g[[i, i]].re.sqrt()).collect();
    CMatrix::from_shape_fn((n, n), |(i, j)| g[[i, j]] * (scale / (d[i] * d[j])))
}

fn identity_residual(partition: &DimerPartition, plus: &CMatrix, minus: &CMatrix) -> Result<f64, String> {
    let n = partition.n_qubits() as f64;
    let psi = singlet_dimer_state(partition).map_err(|e| e.to_string())?;
    let tau = tau1_inverse(&psi, plus, minus).map_err(|e| e.to_string())?;
    let mut predicted = 0.0;
    for g in [plus, minus] {
        if g[[0, 0]].norm() > 0.0 {
            predicted += n * g[[0, 0]].re / (2.0 * HBAR) * correlation_factor(g, partition).map_err(|e| e.to_string())?;
        }
    }
    let scale = uncorrelated_rate(plus, minus);
    Ok((tau - predicted).abs() / scale)
}

fn correlation_factor_identity(_: &mut Context) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let partitions = [
        DimerPartition::from_one_based(4, &[(1, 2), (3, 4)]).unwrap(),
        DimerPartition::from_one_based(4, &[(1, 3), (2, 4)]).unwrap(),
        DimerPartition::from_one_based(4, &[(1, 4), (2, 3)]).unwrap(),
        DimerPartition::from_one_based(6, &[(1, 5), (2, 3), (4, 6)]).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for k in 0..24 {
        let partition = &partitions[k % partitions.len()];
        let n = partition.n_qubits();
        let (s_minus, s_plus) = (rng.random_range(1e-3..1e-2), rng.random_range(0.0..1e-3));
        let minus = random_correlation(&mut rng, n, s_minus);
        let plus = random_correlation(&mut rng, n, s_plus);
        worst = worst.max(identity_residual(partition, &plus, &minus)?);
        pairs += 1;
    }
    let mut physical = 0;
    for a in [0.0, 1.3, a_bar() / 2.0, a_bar(), 7.7, 12.0] {
        let set = CorrelationSet::compute_dissipative(&geometry(4, a), &GAAS, TEMPERATURE, &BathOptions::default())
            .map_err(|e| e.to_string())?;
        for p in &partitions[..3] {
            worst = worst.max(identity_residual(p, &set.gamma_plus, &set.gamma_minus)?);
        }
        physical += 1;
    }
    ensure(
        worst <= 1e-10,
        format!("{pairs} random PSD pairs and {physical} physical spacings: worst relative residual {worst:.1e}"),
    )
}

fn point_like_limit(ctx: &mut Context) -> Result<String, String> {
    let physical = CorrelationSet::compute(&geometry(1, 0.0), &GAAS, TEMPERATURE, &BathOptions::default())
        .map_err(|e| e.to_string())?;
    let constant = |m: &CMatrix| CMatrix::from_elem((4, 4), m[[0, 0]]);
    let set = CorrelationSet::from_matrices(
        geometry(4, a_bar()),
        GAAS,
        TEMPERATURE,
        constant(&physical.gamma_plus),
        constant(&physical.gamma_minus),
        constant(&physical.delta_plus),
        constant(&physical.delta_minus),
    )
    .map_err(|e| e.to_string())?;
    let psi = singlet_dimer_state(&DimerPartition::adjacent(4).unwrap()).unwrap();
    let tau = tau1_inverse(&psi, &set.gamma_plus, &set.gamma_minus).map_err(|e| e.to_string())?;
    let scale = uncorrelated_rate(&set.gamma_plus, &set.gamma_minus);

    let l = Liouvillian::from_correlations(&set, true).map_err(|e| e.to_string())?;
    let horizon = 1e6 / scale;
    let times = log_grid(1e-2, horizon);
    let traj = evolve(&l, &DensityMatrix::from_pure(&psi), &times, &psi, &options(Method::Spectral))
        .map_err(|e| e.to_string())?;
    let min_f = traj.rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min);
    ctx.trajectories.push(("point-like".into(), traj));
    ensure(
        tau.abs() < 1e-12 * scale && min_f >= 1.0 - 1e-9,
        format!("|τ₁⁻¹| = {:.1e} × scale; 1 − min F = {:.1e} up to t = {horizon:.3e} ps", tau.abs() / scale, (1.0 - min_f).max(0.0)),
    )
}

fn fig_config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn periodicity(_: &mut Context) -> Result<String, String> {
    let cfg = fig_config(r#"{"experiment": "fig2-rate-vs-a"}"#);
    let rows = fig2_rows(&cfg).map_err(|e| e.to_string())?;
    let minima: Vec<f64> = rows
        .windows(3)
        .filter(|w| w[1].tau1_inv_ps < w[0].tau1_inv_ps && w[1].tau1_inv_ps < w[2].tau1_inv_ps)
        .map(|w| w[1].a_nm)
        .collect();
    let mut ok = true;
    let mut found = Vec::new();
    for n in 1..=3 {
        let target = 4.23 * n as f64;
        let nearest = minima
            .iter()
            .copied()
            .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()));
        match nearest {
            Some(a) if (a - target).abs() <= 0.02 * target => found.push(format!("{a:.2}")),
            Some(a) => {
                ok = false;
                found.push(format!("{a:.2} (off)"));
            }
            None => {
                ok = false;
                found.push("none".into());
            }
        }
    }
    let set = CorrelationSet::compute_dissipative(&geometry(4, a_bar()), &GAAS, TEMPERATURE, &BathOptions::default())
        .map_err(|e| e.to_string())?;
    let fd = correlation_factor(&set.gamma_minus, &DimerPartition::adjacent(4).unwrap()).map_err(|e| e.to_string())?;
    ensure(
        ok && fd < 0.05,
        format!("minima near n·4.23 nm at a = [{}] nm; f_D₁(ā = {:.4} nm) = {fd:.3e}", found.join(", "), a_bar()),
    )
}

fn noise_suppression(ctx: &mut Context) -> Result<String, String> {
    let start = Instant::now();
    let cfg = fig_config(r#"{"experiment": "fig3-fidelity"}"#);
    let times = log_grid(1e-2, 1e9);
    let a_bar = cfg.spacing_noiseless();
    let b = fidelity_case(&cfg, "B", 0.5 * a_bar, &times).map_err(|e| e.to_string())?;
    let c = fidelity_case(&cfg, "C", a_bar, &times).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let (tb, tc) = (b.crossing_time, c.crossing_time);
    ctx.trajectories.push(("fig3/B/spectral".into(), b.trajectory));
    ctx.trajectories.push(("fig3/C/spectral".into(), c.trajectory));
    match (tb, tc) {
        (Some(tb), Some(tc)) => ensure(
            tc >= 100.0 * tb && secs < 300.0,
            format!("t(F < 0.9): {tc:.4e} ps at ā, {tb:.4e} ps at ā/2, ratio {:.0}; {secs:.1} s", tc / tb),
        ),
        _ => Err(format!("no crossing found (B: {tb:?}, C: {tc:?})")),
    }
}

fn single_dot_trend(_: &mut Context) -> Result<String, String> {
    let cfg = fig_config(r#"{"experiment": "fig1-rate-vs-E", "sweep": {"start": 4.0, "stop": 10.0, "step": 0.05}}"#);
    let rows = fig1_rows(&cfg).map_err(|e| e.to_string())?;
    let rises: Vec<f64> = rows
        .windows(2)
        .filter(|w| w[1].rate_ps >= w[0].rate_ps)
        .map(|w| w[1].e_mev)
        .collect();
    let peak = rows.iter().max_by(|a, b| a.rate_ps.total_cmp(&b.rate_ps)).unwrap();
    ensure(
        rises.is_empty(),
        if rises.is_empty() {
            format!("{} points on [4, 10] meV, strictly decreasing", rows.len())
        } else {
            format!(
                "rate rises at {} of {} steps (up to E = {:.2} meV); maximum {:.6e} ps⁻¹ at E = {:.2} meV",
                rises.len(),
                rows.len() - 1,
                rises.last().unwrap(),
                peak.rate_ps,
                peak.e_mev
            )
        },
    )
}

fn trajectory_sanity(ctx: &mut Context) -> Result<String, String> {
    // one adaptive-step run of the fig3 device on top of what the other checks produced
    let cfg = fig_config(r#"{"experiment": "fig3-fidelity", "integrator": {"method": "adaptive-step"}}"#);
    let times = log_grid(1e-2, 1e5);
    let b = fidelity_case(&cfg, "B", 0.5 * cfg.spacing_noiseless(), &times).map_err(|e| e.to_string())?;
    ctx.trajectories.push(("fig3/B/adaptive".into(), b.trajectory));

    let mut worst = (0.0f64, f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let mut bad = Vec::new();
    let mut rows = 0;
    for (name, traj) in &ctx.trajectories {
        for r in &traj.rows {
            rows += 1;
            worst.0 = worst.0.max(r.trace_dev);
            worst.1 = worst.1.min(r.min_eig);
            worst.2 = worst.2.min(r.fidelity);
            worst.3 = worst.3.max(r.fidelity);
            if !(r.trace_dev < 1e-9 && r.min_eig > -1e-9 && r.fidelity >= 0.0 && r.fidelity <= 1.0 + 1e-9) {
                bad.push(format!("{name} at t = {:e}", r.t_ps));
            }
        }
    }
    ensure(
        bad.is_empty() && ctx.trajectories.len() >= 8,
        format!(
            "{} trajectories, {rows} rows: max trace deviation {:.1e}, min eigenvalue {:.1e}, F in [{:.6}, 1 + {:.1e}]{}",
            ctx.trajectories.len(),
            worst.0,
            worst.1,
            worst.2,
            worst.3 - 1.0,
            if bad.is_empty() { String::new() } else { format!("; violations: {}", bad.join(", ")) }
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dotdfs"))
        .args(args)
        .current_dir(dir)
        .env_remove("DOTDFS_OUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

/// File name → contents without the version line.
fn snapshot(dir: &Path) -> Result<BTreeMap<String, String>, String> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let kept: String = text
            .split_inclusive('\n')
            .filter(|l| !l.starts_with("# version:") && !l.contains("\"version\""))
            .collect();
        files.insert(path.file_name().unwrap().to_string_lossy().into_owned(), kept);
    }
    Ok(files)
}

fn determinism(_: &mut Context) -> Result<String, String> {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let fig2 = dir.path().join("fig2.json");
    std::fs::write(&fig2, r#"{"experiment": "fig2-rate-vs-a", "sweep": {"start": 1.0, "stop": 13.0, "step": 0.25}}"#)
        .map_err(|e| e.to_string())?;
    let dump = dir.path().join("dump.json");
    std::fs::write(&dump, r#"{"oracle_samples": 300000}"#).map_err(|e| e.to_string())?;
    let fig2 = fig2.to_string_lossy().into_owned();
    let dump = dump.to_string_lossy().into_owned();

    let mut runs = Vec::new();
    for (tag, threads) in [("one", "1"), ("four", "4")] {
        let out = format!("run-{tag}");
        let common = ["--out", out.as_str(), "--seed", "11", "--threads", threads];
        run_cli(dir.path(), &[&["fig1"][..], &common].concat())?;
        run_cli(dir.path(), &[&["fig2", "--config", &fig2][..], &common].concat())?;
        run_cli(dir.path(), &[&["fig3"][..], &common].concat())?;
        run_cli(dir.path(), &[&["gamma-dump", "--config", &dump][..], &common].concat())?;
        runs.push(snapshot(&dir.path().join(&out))?);
    }
    let names: Vec<&String> = runs[0].keys().collect();
    let differing: Vec<&String> = names.iter().copied().filter(|k| runs[0].get(*k) != runs[1].get(*k)).collect();
    ensure(
        differing.is_empty() && runs[0].len() == runs[1].len() && runs[0].len() >= 8,
        format!(
            "{} files from fig1, fig2, fig3 and gamma-dump at 1 and 4 threads: {}",
            names.len(),
            if differing.is_empty() { "byte-identical".to_string() } else { format!("differ: {differing:?}") }
        ),
    )
}
