// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration: JSON in, fully materialised and validated
//! [`ExperimentConfig`] out. Unknown keys are rejected at every level.

use std::path::Path;

use dotdfs::bath::{noiseless_spacing, BathOptions};
use dotdfs::lindblad::{EvolveOptions, Method, MonitorLimits, SUPEROPERATOR_MAX_QUBITS};
use dotdfs::model::{ArrayGeometry, MaterialParams};
use dotdfs::register::{DimerPartition, RegisterState, MAX_QUBITS};
use dotdfs::{CVector, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "fig1-rate-vs-E")]
    Fig1,
    #[serde(rename = "fig2-rate-vs-a")]
    Fig2,
    #[serde(rename = "fig3-fidelity")]
    Fig3,
}

impl ExperimentId {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig1 => "fig1-rate-vs-E",
            ExperimentId::Fig2 => "fig2-rate-vs-a",
            ExperimentId::Fig3 => "fig3-fidelity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialsConfig {
    /// nm/ps
    pub sound_speed: f64,
    /// kg/m³
    pub mass_density: f64,
    /// meV
    pub deformation_potential: f64,
    pub effective_mass: f64,
    /// meV
    pub lo_phonon_energy: f64,
}

impl Default for MaterialsConfig {
    fn default() -> Self {
        let m = MaterialParams::gaas();
        MaterialsConfig {
            sound_speed: m.sound_speed,
            mass_density: m.mass_density,
            deformation_potential: m.deformation_potential,
            effective_mass: m.effective_mass,
            lo_phonon_energy: m.lo_phonon_energy,
        }
    }
}

impl MaterialsConfig {
    pub fn params(&self) -> MaterialParams {
        MaterialParams {
            sound_speed: self.sound_speed,
            mass_density: self.mass_density,
            deformation_potential: self.deformation_potential,
            effective_mass: self.effective_mass,
            lo_phonon_energy: self.lo_phonon_energy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub n_dots: usize,
    /// Well width, nm.
    pub d: f64,
    /// Level splitting, meV.
    pub e: f64,
    /// Inter-dot spacing, nm. Defaults to the noiseless spacing `2π/q̄`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            n_dots: 4,
            d: 4.0,
            e: 5.0,
            a: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    /// `start, start + step, …` up to `stop` inclusive (with a 1e-9 step slack).
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// 1-based qubit pairs.
    DimerPartition(Vec<[usize; 2]>),
    /// `[re, im]` pairs in the most-significant-qubit-first basis; normalised on load.
    Amplitudes(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let d = EvolveOptions::default();
        IntegratorConfig {
            method: Method::Spectral,
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_steps: d.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGridConfig {
    /// ps
    pub start: f64,
    /// ps
    pub stop: f64,
    pub points_per_decade: usize,
    pub include_zero: bool,
}

impl Default for TimeGridConfig {
    fn default() -> Self {
        TimeGridConfig {
            start: 1e-2,
            stop: 1e6,
            points_per_decade: 10,
            include_zero: true,
        }
    }
}

impl TimeGridConfig {
    /// Log-spaced times; decade boundaries are hit exactly.
    pub fn times(&self) -> Vec<f64> {
        let lo = self.start.log10();
        let hi = self.stop.log10();
        let n = ((hi - lo) * self.points_per_decade as f64 - 1e-9).ceil().max(1.0) as usize;
        let mut t: Vec<f64> = Vec::with_capacity(n + 2);
        if self.include_zero {
            t.push(0.0);
        }
        for k in 0..=n {
            let e = lo + (hi - lo) * k as f64 / n as f64;
            let v = if (e - e.round()).abs() < 1e-12 {
                10f64.powi(e.round() as i32)
            } else {
                10f64.powf(e)
            };
            t.push(v);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig3Case {
    pub label: String,
    /// Spacing as a fraction of the noiseless spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_fraction: Option<f64>,
    /// Explicit spacing, nm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}

fn default_cases() -> Vec<Fig3Case> {
    [("A", 0.25), ("B", 0.5), ("C", 1.0)]
        .iter()
        .map(|&(label, f)| Fig3Case {
            label: label.into(),
            spacing_fraction: Some(f),
            spacing: None,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// Every entry equal: the point-like register.
    Constant,
    /// Independent dots.
    Diagonal,
}

/// Hand-made correlation matrices for the `evolve` command, meV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub kind: SyntheticKind,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    #[serde(default)]
    pub delta_plus: f64,
    #[serde(default)]
    pub delta_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentId>,
    pub materials: MaterialsConfig,
    pub geometry: GeometryConfig,
    /// K
    pub temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    pub integrator: IntegratorConfig,
    pub time_grid: TimeGridConfig,
    pub cases: Vec<Fig3Case>,
    pub lamb_shift: bool,
    pub cutoff_multiplier: f64,
    pub bath_rel_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub seed: u64,
    /// Monte-Carlo samples for the `gamma-dump` cross-check; 0 disables it.
    pub oracle_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlations_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            materials: MaterialsConfig::default(),
            geometry: GeometryConfig::default(),
            temperature: 10.0,
            sweep: None,
            initial_state: None,
            integrator: IntegratorConfig::default(),
            time_grid: TimeGridConfig::default(),
            cases: default_cases(),
            lamb_shift: true,
            cutoff_multiplier: BathOptions::default().cutoff_multiplier,
            bath_rel_tol: BathOptions::default().rel_tol,
            output: None,
            seed: 0,
            oracle_samples: 0,
            correlations_file: None,
            synthetic: None,
        }
    }
}

/// Default sweep of each experiment: splitting (meV) for fig1, spacing (nm)
/// for fig2.
pub fn default_sweep(id: ExperimentId) -> Option<Sweep> {
    match id {
        ExperimentId::Fig1 => Some(Sweep {
            start: 1.0,
            stop: 10.0,
            step: 0.25,
        }),
        ExperimentId::Fig2 => Some(Sweep {
            start: 0.2,
            stop: 14.0,
            step: 0.02,
        }),
        ExperimentId::Fig3 => None,
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and > 0 (got {v})")))
    }
}

impl ExperimentConfig {
    /// Parse, materialise defaults and validate.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        Self::parse(text)?.materialize()
    }

    /// Parse only; call [`ExperimentConfig::materialize`] after any overrides.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    /// Read and parse a config file, without materialising it.
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Fill experiment-dependent defaults, then validate.
    pub fn materialize(mut self) -> Result<Self, CliError> {
        self.validate_materials()?;
        let materials = self.materials.params();
        let g = &self.geometry;
        if g.n_dots == 0 || g.n_dots > MAX_QUBITS {
            return Err(invalid("geometry.n_dots", format!("must be in 1..={MAX_QUBITS} (got {})", g.n_dots)));
        }
        positive("geometry.d", g.d)?;
        positive("geometry.e", g.e)?;
        if g.e >= materials.lo_phonon_energy {
            return Err(invalid(
                "geometry.e",
                format!("must stay below lo_phonon_energy = {} meV (got {})", materials.lo_phonon_energy, g.e),
            ));
        }
        match g.a {
            Some(a) if !(a.is_finite() && a >= 0.0) => {
                return Err(invalid("geometry.a", format!("must be finite and >= 0 (got {a})")));
            }
            Some(_) => {}
            None => {
                self.geometry.a = Some(noiseless_spacing(g.e, &materials).map_err(|e| invalid("geometry.e", e.to_string()))?);
            }
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(invalid("temperature", format!("must be finite and >= 0 (got {})", self.temperature)));
        }
        if let Some(id) = self.experiment {
            if self.sweep.is_none() {
                self.sweep = default_sweep(id);
            }
        }
        if self.initial_state.is_none() && self.geometry.n_dots.is_multiple_of(2) {
            let n = self.geometry.n_dots;
            self.initial_state = Some(InitialState::DimerPartition((0..n / 2).map(|k| [2 * k + 1, 2 * k + 2]).collect()));
        }
        self.validate_rest()?;
        Ok(self)
    }

    fn validate_materials(&self) -> Result<(), CliError> {
        let m = &self.materials;
        for (name, v) in [
            ("materials.sound_speed", m.sound_speed),
            ("materials.mass_density", m.mass_density),
            ("materials.deformation_potential", m.deformation_potential),
            ("materials.effective_mass", m.effective_mass),
            ("materials.lo_phonon_energy", m.lo_phonon_energy),
        ] {
            positive(name, v)?;
        }
        Ok(())
    }

    fn validate_rest(&self) -> Result<(), CliError> {
        let lo = self.materials.lo_phonon_energy;
        if let Some(s) = &self.sweep {
            positive("sweep.step", s.step)?;
            if !(s.start.is_finite() && s.stop.is_finite() && s.stop >= s.start) {
                return Err(invalid("sweep", format!("empty range [{}, {}]", s.start, s.stop)));
            }
            match self.experiment {
                Some(ExperimentId::Fig1) => {
                    positive("sweep.start", s.start)?;
                    if s.stop >= lo {
                        return Err(invalid("sweep.stop", format!("splitting must stay below {lo} meV")));
                    }
                }
                Some(ExperimentId::Fig2) if s.start < 0.0 => {
                    return Err(invalid("sweep.start", "spacings must be >= 0"));
                }
                _ => {}
            }
        }
        if self.initial_state.is_some() {
            self.register_state()?;
        }
        let i = &self.integrator;
        if !(i.rel_tol > 0.0 && i.rel_tol <= 1e-3) {
            return Err(invalid("integrator.rel_tol", format!("must be in (0, 1e-3] (got {})", i.rel_tol)));
        }
        if !(i.abs_tol > 0.0 && i.abs_tol.is_finite()) {
            return Err(invalid("integrator.abs_tol", format!("must be > 0 (got {})", i.abs_tol)));
        }
        if i.max_steps == 0 {
            return Err(invalid("integrator.max_steps", "must be >= 1"));
        }
        if i.method == Method::Spectral && self.geometry.n_dots > SUPEROPERATOR_MAX_QUBITS {
            return Err(invalid(
                "integrator.method",
                format!(
                    "spectral evolution supports at most {SUPEROPERATOR_MAX_QUBITS} dots; use \"adaptive-step\""
                ),
            ));
        }
        let t = &self.time_grid;
        positive("time_grid.start", t.start)?;
        if !(t.stop.is_finite() && t.stop > t.start) {
            return Err(invalid("time_grid.stop", format!("must exceed time_grid.start (got {})", t.stop)));
        }
        if t.points_per_decade == 0 {
            return Err(invalid("time_grid.points_per_decade", "must be >= 1"));
        }
        if self.cases.is_empty() {
            return Err(invalid("cases", "at least one case is required"));
        }
        for (k, c) in self.cases.iter().enumerate() {
            let field = format!("cases[{k}]");
            if c.label.is_empty() || self.cases[..k].iter().any(|o| o.label == c.label) {
                return Err(invalid(format!("{field}.label"), "labels must be non-empty and unique"));
            }
            match (c.spacing_fraction, c.spacing) {
                (Some(v), None) | (None, Some(v)) if v.is_finite() && v >= 0.0 => {}
                (Some(_), Some(_)) | (None, None) => {
                    return Err(invalid(field, "give exactly one of spacing_fraction and spacing"));
                }
                _ => return Err(invalid(field, "spacing must be finite and >= 0")),
            }
        }
        if !(self.cutoff_multiplier.is_finite() && self.cutoff_multiplier >= 5.0) {
            return Err(invalid("cutoff_multiplier", format!("must be >= 5 (got {})", self.cutoff_multiplier)));
        }
        if !(self.bath_rel_tol > 0.0 && self.bath_rel_tol <= 1e-4) {
            return Err(invalid("bath_rel_tol", format!("must be in (0, 1e-4] (got {})", self.bath_rel_tol)));
        }
        if self.oracle_samples != 0 && self.oracle_samples < dotdfs::bath::oracle::MIN_SAMPLES {
            return Err(invalid(
                "oracle_samples",
                format!("must be 0 or >= {}", dotdfs::bath::oracle::MIN_SAMPLES),
            ));
        }
        if self.correlations_file.is_some() && self.synthetic.is_some() {
            return Err(invalid("synthetic", "cannot be combined with correlations_file"));
        }
        if let Some(s) = &self.synthetic {
            for (name, v) in [("synthetic.gamma_plus", s.gamma_plus), ("synthetic.gamma_minus", s.gamma_minus)] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(invalid(name, format!("must be finite and >= 0 (got {v})")));
                }
            }
            for (name, v) in [("synthetic.delta_plus", s.delta_plus), ("synthetic.delta_minus", s.delta_minus)] {
                if !v.is_finite() {
                    return Err(invalid(name, "must be finite"));
                }
            }
        }
        match self.experiment {
            Some(ExperimentId::Fig2) => {
                self.partition()?;
            }
            Some(ExperimentId::Fig1) | Some(ExperimentId::Fig3) | None => {}
        }
        Ok(())
    }

    pub fn materials(&self) -> MaterialParams {
        self.materials.params()
    }

    /// The noiseless spacing `2π/q̄` of the configured device, nm.
    pub fn spacing_noiseless(&self) -> f64 {
        noiseless_spacing(self.geometry.e, &self.materials()).expect("validated splitting")
    }

    /// Spacing after materialisation.
    pub fn spacing(&self) -> f64 {
        self.geometry.a.expect("materialized config")
    }

    pub fn array_geometry(&self, spacing: f64) -> Result<ArrayGeometry, CliError> {
        ArrayGeometry::new(self.geometry.n_dots, self.geometry.d, self.geometry.e, spacing, &self.materials())
            .map_err(|e| invalid("geometry", e.to_string()))
    }

    pub fn bath_options(&self) -> BathOptions {
        BathOptions {
            rel_tol: self.bath_rel_tol,
            cutoff_multiplier: self.cutoff_multiplier,
        }
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            method: self.integrator.method,
            rel_tol: self.integrator.rel_tol,
            abs_tol: self.integrator.abs_tol,
            max_steps: self.integrator.max_steps,
            monitors: MonitorLimits::default(),
        }
    }

    /// The configured dimer partition (0-based).
    pub fn partition(&self) -> Result<DimerPartition, CliError> {
        match &self.initial_state {
            Some(InitialState::DimerPartition(pairs)) => {
                let pairs: Vec<(usize, usize)> = pairs.iter().map(|p| (p[0], p[1])).collect();
                DimerPartition::from_one_based(self.geometry.n_dots, &pairs)
                    .map_err(|e| invalid("initial_state.dimer_partition", e.to_string()))
            }
            Some(InitialState::Amplitudes(_)) => Err(invalid(
                "initial_state",
                "this experiment needs a dimer_partition initial state",
            )),
            None => Err(invalid(
                "initial_state",
                format!("no default partition for an odd register (n_dots = {})", self.geometry.n_dots),
            )),
        }
    }

    pub fn register_state(&self) -> Result<RegisterState, CliError> {
        match &self.initial_state {
            Some(InitialState::DimerPartition(_)) => {
                dotdfs::register::singlet_dimer_state(&self.partition()?)
                    .map_err(|e| invalid("initial_state.dimer_partition", e.to_string()))
            }
            Some(InitialState::Amplitudes(a)) => {
                let expected = 1usize << self.geometry.n_dots;
                if a.len() != expected {
                    return Err(invalid(
                        "initial_state.amplitudes",
                        format!("expected {expected} amplitudes for {} dots, got {}", self.geometry.n_dots, a.len()),
                    ));
                }
                let v = CVector::from_iter(a.iter().map(|p| C64::new(p[0], p[1])));
                RegisterState::normalized(v).map_err(|e| invalid("initial_state.amplitudes", e.to_string()))
            }
            None => Err(invalid("initial_state", "required for odd registers")),
        }
    }

    /// Compact JSON echo of the materialised configuration.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}
