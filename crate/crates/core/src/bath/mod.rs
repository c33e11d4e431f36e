// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Bath correlation matrices of the register.
//!
//! For each process `η` (absorption `+`, emission `−`) the phonon sum
//!
//! ```text
//! L^(η)_{ii'} = Σ_q g_{i,q} ḡ_{i',q} (n + θ_η) / (E − ħω_q − i0⁺) = Δ^(η)_{ii'} + iΓ^(η)_{ii'}
//! ```
//!
//! splits into a resonant-shell part `Γ` (the δ-function) and a principal-value
//! part `Δ`. With `Σ_q → V/(2π)³∫d³q`, `|g|² ∝ 1/V` and linear dispersion:
//!
//! ```text
//! Γ^(η)(Δz) = (n+θ_η) π K q̄³ A(q̄, Δz)
//! Δ^(η)(Δz) = (n+θ_η) K PV∫₀^∞ dq q³ A(q, Δz)/(q̄ − q)
//! ```
//!
//! with `K = D²/(16π³ρc_s²)` and the angular profile
//! `A(q, Δz) = ∫dΩ |M_∥|² M_z² e^{i q_z Δz}`. The azimuthal average of
//! `|M_∥|² ∝ cos²φ` is done analytically, leaving a 1D integral in `cos θ`. The
//! sine part of the phase is odd in `cos θ` and vanishes, so every matrix here
//! is real symmetric (stored as complex Hermitian).

pub mod oracle;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::model::{bose_occupation, oscillator_length, shell_wavevector, well_form_factor_of_u};
use crate::model::{ArrayGeometry, MaterialParams};
use crate::quadrature::{integrate_with_breaks, QuadConfig};
use crate::units::HBAR;
use crate::{CMatrix, Error, Result, C64};

/// Phonon process. `Absorption` is `η = +`, `Emission` is `η = −`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Absorption,
    Emission,
}

impl Process {
    pub const BOTH: [Process; 2] = [Process::Absorption, Process::Emission];

    /// `θ(∓η)`: one extra (spontaneous) phonon for emission.
    pub fn spontaneous(self) -> f64 {
        match self {
            Process::Absorption => 0.0,
            Process::Emission => 1.0,
        }
    }

    /// Thermal weight `n(E, T) + θ`.
    pub fn thermal_factor(self, splitting: f64, temperature: f64) -> Result<f64> {
        Ok(bose_occupation(splitting, temperature)? + self.spontaneous())
    }

    pub fn sign(self) -> char {
        match self {
            Process::Absorption => '+',
            Process::Emission => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathOptions {
    /// Relative tolerance of the radial and angular quadratures.
    pub rel_tol: f64,
    /// Radial integration for `Δ` stops at `cutoff_multiplier·q̄` (≥ 5).
    pub cutoff_multiplier: f64,
}

impl Default for BathOptions {
    fn default() -> Self {
        BathOptions {
            rel_tol: 1e-10,
            cutoff_multiplier: 10.0,
        }
    }
}

/// Geometry-dependent pieces of the shell integrals.
#[derive(Debug, Clone, Copy)]
struct Shell {
    q_bar: f64,
    length: f64,
    width: f64,
    prefactor: f64,
}

impl Shell {
    fn new(geometry: &ArrayGeometry, materials: &MaterialParams) -> Result<Self> {
        materials.validate()?;
        geometry.validate(materials)?;
        Ok(Shell {
            q_bar: shell_wavevector(geometry.splitting, materials.sound_speed)?,
            length: oscillator_length(geometry.splitting, materials.effective_mass)?,
            width: geometry.well_width,
            prefactor: materials.shell_prefactor(),
        })
    }

    /// Rough size of `A(q, 0)` ignoring the well form factor, used to set
    /// absolute tolerances.
    fn profile_scale(&self, q: f64) -> f64 {
        let alpha = 0.5 * (q * self.length).powi(2);
        2.0 * PI * (0.5 / alpha).min(alpha).max(f64::MIN_POSITIVE)
    }

    /// Angular profile `A(q, Δz)`.
    fn profile(&self, q: f64, dz: f64, cfg: &QuadConfig) -> Result<f64> {
        if q == 0.0 {
            return Ok(0.0);
        }
        let alpha = 0.5 * (q * self.length).powi(2);
        let half_width = 0.5 * self.width;
        // t = 1 − cos θ; the in-plane factor peaks at t ≈ 1/(2α)
        let integrand = |t: f64| {
            let c = 1.0 - t;
            let s2 = t * (2.0 - t);
            let mz = well_form_factor_of_u(q * c * half_width);
            alpha * s2 * (-alpha * s2).exp() * mz * mz * (q * c * dz).cos()
        };
        let t_peak = 0.5 / alpha;
        let mut breaks = vec![0.0];
        for k in [0.25, 1.0, 4.0, 16.0, 64.0] {
            let t = k * t_peak;
            if t < 1.0 {
                breaks.push(t);
            }
        }
        breaks.push(1.0);
        let r = integrate_with_breaks(integrand, &breaks, cfg).map_err(|e| {
            Error::numerical(
                format!("angular shell integral (q = {q:.6} nm^-1, dz = {dz:.6} nm)"),
                e.to_string(),
            )
        })?;
        Ok(2.0 * PI * r.value)
    }

    /// `Γ(Δz)/(n+θ)`, meV.
    fn gamma_profile(&self, dz: f64, rel_tol: f64, scale: Option<f64>) -> Result<f64> {
        let abs = rel_tol * scale.unwrap_or(0.0) / (PI * self.prefactor * self.q_bar.powi(3));
        let cfg = QuadConfig::with_rel_tol(rel_tol).abs_tol(abs);
        Ok(PI * self.prefactor * self.q_bar.powi(3) * self.profile(self.q_bar, dz, &cfg)?)
    }

    /// `Δ(Δz)/(n+θ)`, meV.
    fn delta_profile(&self, dz: f64, opts: &BathOptions, scale: Option<f64>) -> Result<f64> {
        if opts.cutoff_multiplier < 5.0 {
            return Err(Error::Domain {
                name: "cutoff_multiplier",
                value: opts.cutoff_multiplier,
                reason: "must be >= 5",
            });
        }
        let q_bar = self.q_bar;
        let inner_rel = (opts.rel_tol * 1e-2).max(1e-13);
        let weight = |q: f64| -> Result<f64> {
            let cfg = QuadConfig::with_rel_tol(inner_rel).abs_tol(inner_rel * 1e-2 * self.profile_scale(q));
            Ok(q.powi(3) * self.profile(q, dz, &cfg)?)
        };
        let abs = opts.rel_tol * scale.unwrap_or(0.0) / self.prefactor;
        let cfg = QuadConfig::with_rel_tol(opts.rel_tol).abs_tol(abs);

        // Closures cannot return errors through the quadrature; stash the first.
        let mut failure: Option<Error> = None;
        let mut eval = |q: f64| match weight(q) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };

        let w = 0.5 * q_bar;
        let q_max = opts.cutoff_multiplier * q_bar;
        let context = |part: &str, e: Error| {
            Error::numerical(format!("principal-value radial integral ({part}, dz = {dz:.6} nm)"), e.to_string())
        };
        let below = integrate_with_breaks(|q| eval(q) / (q_bar - q), &[0.0, w], &cfg)
            .map_err(|e| context("below window", e))?;
        // symmetric window around the pole, folded: ∫₀^w [F(q̄−s) − F(q̄+s)]/s ds
        let window = integrate_with_breaks(|s| (eval(q_bar - s) - eval(q_bar + s)) / s, &[0.0, w], &cfg)
            .map_err(|e| context("pole window", e))?;
        let mut above_breaks = vec![q_bar + w];
        let mut k = 2.0;
        while k * q_bar < q_max {
            above_breaks.push(k * q_bar);
            k += 1.0;
        }
        above_breaks.push(q_max);
        let above = integrate_with_breaks(|q| eval(q) / (q_bar - q), &above_breaks, &cfg)
            .map_err(|e| context("above window", e))?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(self.prefactor * (below.value + window.value + above.value))
    }
}

/// Values of a profile at separations `k·a`, `k = 0..N`.
fn separation_profile(
    geometry: &ArrayGeometry,
    mut f: impl FnMut(f64, Option<f64>) -> Result<f64>,
) -> Result<Vec<f64>> {
    let on_site = f(0.0, None)?;
    let mut values = vec![on_site];
    for k in 1..geometry.n_dots {
        if geometry.spacing == 0.0 {
            values.push(on_site);
        } else {
            values.push(f(k as f64 * geometry.spacing, Some(on_site.abs()))?);
        }
    }
    Ok(values)
}

fn toeplitz(profile: &[f64], factor: f64) -> CMatrix {
    let n = profile.len();
    CMatrix::from_shape_fn((n, n), |(i, j)| C64::new(factor * profile[i.abs_diff(j)], 0.0))
}

/// Dissipative correlation matrix `Γ^(η)`, meV.
pub fn gamma_matrix(
    process: Process,
    geometry: &ArrayGeometry,
    materials: &MaterialParams,
    temperature: f64,
    opts: &BathOptions,
) -> Result<CMatrix> {
    let shell = Shell::new(geometry, materials)?;
    let thermal = process.thermal_factor(geometry.splitting, temperature)?;
    let profile = separation_profile(geometry, |dz, s| shell.gamma_profile(dz, opts.rel_tol, s))?;
    Ok(toeplitz(&profile, thermal))
}

/// Lamb-shift correlation matrix `Δ^(η)`, meV.
pub fn delta_matrix(
    process: Process,
    geometry: &ArrayGeometry,
    materials: &MaterialParams,
    temperature: f64,
    opts: &BathOptions,
) -> Result<CMatrix> {
    let shell = Shell::new(geometry, materials)?;
    let thermal = process.thermal_factor(geometry.splitting, temperature)?;
    let profile = separation_profile(geometry, |dz, s| shell.delta_profile(dz, opts, s))?;
    Ok(toeplitz(&profile, thermal))
}

/// Total (emission plus absorption) population relaxation rate of a single
/// dot, `2(Γ⁺₁₁ + Γ⁻₁₁)/ħ`, in ps⁻¹.
pub fn single_dot_rate(
    splitting: f64,
    well_width: f64,
    materials: &MaterialParams,
    temperature: f64,
    opts: &BathOptions,
) -> Result<f64> {
    let geometry = ArrayGeometry::new(1, well_width, splitting, 0.0, materials)?;
    let shell = Shell::new(&geometry, materials)?;
    let n = bose_occupation(splitting, temperature)?;
    let gamma = shell.gamma_profile(0.0, opts.rel_tol, None)?;
    Ok(2.0 * (2.0 * n + 1.0) * gamma / HBAR)
}

/// `Γ^(±)` and `Δ^(±)` of one device at one temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSet {
    pub geometry: ArrayGeometry,
    pub materials: MaterialParams,
    /// Kelvin.
    pub temperature: f64,
    #[serde(with = "crate::matrix_io::complex_matrix")]
    pub gamma_plus: CMatrix,
    #[serde(with = "crate::matrix_io::complex_matrix")]
    pub gamma_minus: CMatrix,
    #[serde(with = "crate::matrix_io::complex_matrix")]
    pub delta_plus: CMatrix,
    #[serde(with = "crate::matrix_io::complex_matrix")]
    pub delta_minus: CMatrix,
}

impl CorrelationSet {
    /// Evaluate all four matrices, sharing the separation profiles between
    /// the two processes.
    pub fn compute(
        geometry: &ArrayGeometry,
        materials: &MaterialParams,
        temperature: f64,
        opts: &BathOptions,
    ) -> Result<Self> {
        let shell = Shell::new(geometry, materials)?;
        let n = bose_occupation(geometry.splitting, temperature)?;
        let gamma = separation_profile(geometry, |dz, s| shell.gamma_profile(dz, opts.rel_tol, s))?;
        let delta = separation_profile(geometry, |dz, s| shell.delta_profile(dz, opts, s))?;
        Ok(CorrelationSet {
            geometry: *geometry,
            materials: *materials,
            temperature,
            gamma_plus: toeplitz(&gamma, n),
            gamma_minus: toeplitz(&gamma, n + 1.0),
            delta_plus: toeplitz(&delta, n),
            delta_minus: toeplitz(&delta, n + 1.0),
        })
    }

    /// `Γ` only; the Lamb-shift matrices are zero. Much cheaper than
    /// [`CorrelationSet::compute`] and sufficient for first-order rates.
    pub fn compute_dissipative(
        geometry: &ArrayGeometry,
        materials: &MaterialParams,
        temperature: f64,
        opts: &BathOptions,
    ) -> Result<Self> {
        let shell = Shell::new(geometry, materials)?;
        let n = bose_occupation(geometry.splitting, temperature)?;
        let gamma = separation_profile(geometry, |dz, s| shell.gamma_profile(dz, opts.rel_tol, s))?;
        let zero = CMatrix::zeros((geometry.n_dots, geometry.n_dots));
        Ok(CorrelationSet {
            geometry: *geometry,
            materials: *materials,
            temperature,
            gamma_plus: toeplitz(&gamma, n),
            gamma_minus: toeplitz(&gamma, n + 1.0),
            delta_plus: zero.clone(),
            delta_minus: zero,
        })
    }

    /// Assemble from given matrices (saved or synthetic), validating shapes
    /// and Hermiticity and that both `Γ` are positive semidefinite.
    pub fn from_matrices(
        geometry: ArrayGeometry,
        materials: MaterialParams,
        temperature: f64,
        gamma_plus: CMatrix,
        gamma_minus: CMatrix,
        delta_plus: CMatrix,
        delta_minus: CMatrix,
    ) -> Result<Self> {
        let set = CorrelationSet {
            geometry,
            materials,
            temperature,
            gamma_plus,
            gamma_minus,
            delta_plus,
            delta_minus,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.geometry.n_dots;
        let named = [
            ("gamma_plus", &self.gamma_plus),
            ("gamma_minus", &self.gamma_minus),
            ("delta_plus", &self.delta_plus),
            ("delta_minus", &self.delta_minus),
        ];
        for (name, m) in named {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: if m.nrows() != n { m.nrows() } else { m.ncols() },
                });
            }
            let dev = hermiticity_deviation(m);
            if dev > 1e-12 {
                return Err(Error::NotHermitian { what: name, deviation: dev });
            }
        }
        for (name, m) in [("gamma_plus", &self.gamma_plus), ("gamma_minus", &self.gamma_minus)] {
            let min = min_hermitian_eigenvalue(m)?;
            let scale = frobenius(m);
            if min < -1e-10 * scale {
                return Err(Error::Precondition(format!(
                    "{name} is not positive semidefinite (min eigenvalue {min:.3e})"
                )));
            }
        }
        Ok(())
    }

    pub fn gamma(&self, process: Process) -> &CMatrix {
        match process {
            Process::Absorption => &self.gamma_plus,
            Process::Emission => &self.gamma_minus,
        }
    }

    pub fn delta(&self, process: Process) -> &CMatrix {
        match process {
            Process::Absorption => &self.delta_plus,
            Process::Emission => &self.delta_minus,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: CorrelationSet = serde_json::from_str(text)?;
        set.materials.validate()?;
        set.geometry.validate(&set.materials)?;
        set.validate()?;
        Ok(set)
    }
}

/// `max|M − M†|` relative to `max|M|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let mut dev = 0.0f64;
    for ((i, j), z) in m.indexed_iter() {
        dev = dev.max((z - m[[j, i]].conj()).norm());
    }
    dev / scale.max(f64::MIN_POSITIVE)
}

pub(crate) fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn min_hermitian_eigenvalue(m: &CMatrix) -> Result<f64> {
    use ndarray_linalg::{EigValsh, UPLO};
    if m.is_empty() {
        return Ok(0.0);
    }
    let vals = m.eigvalsh(UPLO::Lower)?;
    Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// `ε` in `H_c = εS^z`: half the qubit splitting.
pub fn carrier_level(geometry: &ArrayGeometry) -> f64 {
    0.5 * geometry.splitting
}

/// Noiseless spacing `ā = 2π/q̄`, nm.
pub fn noiseless_spacing(splitting: f64, materials: &MaterialParams) -> Result<f64> {
    Ok(2.0 * PI / shell_wavevector(splitting, materials.sound_speed)?)
}
