// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Device model: material constants, array geometry, quasi-0D form factors and
//! the deformation-potential coupling of the qubit transition to bulk
//! longitudinal-acoustic phonons.
//!
//! Each dot is a quantum well of width `d` along the growth axis `z` times a 2D
//! harmonic confinement in the plane. The qubit is the in-plane ground state
//! `|0⟩` and the `p_x` member of the first excited doublet `|1⟩`, both in the
//! well ground state, split by `E = ħω`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::units::{ELECTRON_MASS, HBAR, KG_PER_M3, K_B};
use crate::{Error, Result, C64};

/// Bulk material constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// Longitudinal sound velocity, nm/ps.
    pub sound_speed: f64,
    /// Mass density, kg/m³.
    pub mass_density: f64,
    /// Deformation potential, meV.
    pub deformation_potential: f64,
    /// Effective mass in units of the free-electron mass.
    pub effective_mass: f64,
    /// LO phonon energy, meV. Splittings must stay below it.
    pub lo_phonon_energy: f64,
}

impl MaterialParams {
    /// GaAs defaults.
    pub const fn gaas() -> Self {
        MaterialParams {
            sound_speed: 5.11,
            mass_density: 5317.0,
            deformation_potential: 8600.0,
            effective_mass: 0.067,
            lo_phonon_energy: 36.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sound_speed", self.sound_speed),
            ("mass_density", self.mass_density),
            ("deformation_potential", self.deformation_potential),
            ("effective_mass", self.effective_mass),
            ("lo_phonon_energy", self.lo_phonon_energy),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Materials(format!(
                    "{name} must be finite and > 0 (got {v})"
                )));
            }
        }
        Ok(())
    }

    /// Mass density in meV·ps²/nm⁵.
    pub fn density_internal(&self) -> f64 {
        self.mass_density * KG_PER_M3
    }

    /// Squared deformation-potential amplitude `|g̃(q)|²·V = D²ħq / (2ρc_s)`,
    /// meV²·nm³.
    pub fn coupling_strength_sq(&self, q: f64) -> f64 {
        let d = self.deformation_potential;
        d * d * HBAR * q / (2.0 * self.density_internal() * self.sound_speed)
    }

    /// `D² / (16π³ ρ c_s²)` in meV·nm³: the constant in front of every
    /// phonon-shell integral once `Σ_q → V/(2π)³ ∫d³q` has been applied.
    pub fn shell_prefactor(&self) -> f64 {
        let d = self.deformation_potential;
        d * d / (16.0 * PI.powi(3) * self.density_internal() * self.sound_speed.powi(2))
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self::gaas()
    }
}

/// A linear array of identical dots stacked along `z` at `z_i = i·a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayGeometry {
    pub n_dots: usize,
    /// Well width `d`, nm.
    pub well_width: f64,
    /// Level splitting `E = ε₁ − ε₀`, meV.
    pub splitting: f64,
    /// Inter-dot spacing `a`, nm.
    pub spacing: f64,
}

impl ArrayGeometry {
    pub fn new(
        n_dots: usize,
        well_width: f64,
        splitting: f64,
        spacing: f64,
        materials: &MaterialParams,
    ) -> Result<Self> {
        let g = ArrayGeometry {
            n_dots,
            well_width,
            splitting,
            spacing,
        };
        g.validate(materials)?;
        Ok(g)
    }

    pub fn validate(&self, materials: &MaterialParams) -> Result<()> {
        if self.n_dots == 0 {
            return Err(Error::Geometry("n_dots must be >= 1".into()));
        }
        if !(self.well_width.is_finite() && self.well_width > 0.0) {
            return Err(Error::Geometry(format!(
                "well_width must be > 0 (got {})",
                self.well_width
            )));
        }
        if !(self.splitting.is_finite() && self.splitting > 0.0) {
            return Err(Error::Geometry(format!(
                "splitting must be > 0 (got {})",
                self.splitting
            )));
        }
        if self.splitting >= materials.lo_phonon_energy {
            return Err(Error::Geometry(format!(
                "splitting {} meV must stay below the LO phonon energy {} meV",
                self.splitting, materials.lo_phonon_energy
            )));
        }
        if !(self.spacing.is_finite() && self.spacing >= 0.0) {
            return Err(Error::Geometry(format!(
                "spacing must be >= 0 (got {})",
                self.spacing
            )));
        }
        Ok(())
    }

    /// Position of dot `i` (0-based) on the growth axis, nm.
    pub fn position(&self, i: usize) -> f64 {
        i as f64 * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_dots).map(|i| self.position(i)).collect()
    }

    pub fn with_spacing(&self, spacing: f64) -> Self {
        ArrayGeometry { spacing, ..*self }
    }

    pub fn with_splitting(&self, splitting: f64) -> Self {
        ArrayGeometry { splitting, ..*self }
    }
}

/// Phonon wavevector, nm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wavevector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Wavevector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Wavevector { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

/// In-plane oscillator length `l = ħ/√(m*E)`, nm.
pub fn oscillator_length(splitting: f64, mass_ratio: f64) -> Result<f64> {
    positive("splitting", splitting)?;
    positive("mass_ratio", mass_ratio)?;
    Ok(HBAR / (mass_ratio * ELECTRON_MASS * splitting).sqrt())
}

/// Radius `q̄ = E/(ħc_s)` of the resonant phonon shell, nm⁻¹.
pub fn shell_wavevector(splitting: f64, sound_speed: f64) -> Result<f64> {
    positive("splitting", splitting)?;
    positive("sound_speed", sound_speed)?;
    Ok(splitting / (HBAR * sound_speed))
}

/// Bose–Einstein occupation `1/(e^{E/k_BT} − 1)`; zero at `T = 0`.
pub fn bose_occupation(energy: f64, temperature: f64) -> Result<f64> {
    positive("energy", energy)?;
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::Domain {
            name: "temperature",
            value: temperature,
            reason: "must be finite and >= 0",
        });
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (energy / (K_B * temperature)).exp_m1())
}

/// `⟨1|e^{i(q_x x + q_y y)}|0⟩` for the 2D oscillator ground state and its
/// `p_x` excitation: `(i q_x l/√2)·exp(−(q_x²+q_y²)l²/4)`.
pub fn inplane_form_factor(qx: f64, qy: f64, length: f64) -> Result<C64> {
    positive("length", length)?;
    Ok(inplane_form_factor_unchecked(qx, qy, length))
}

pub(crate) fn inplane_form_factor_unchecked(qx: f64, qy: f64, l: f64) -> C64 {
    let amp = qx * l / SQRT_2 * (-(qx * qx + qy * qy) * l * l / 4.0).exp();
    C64::new(0.0, amp)
}

/// `∫|χ(z)|² e^{i q_z z} dz` for the infinite-well ground state centred on
/// the dot. Real and even in `q_z`.
pub fn well_form_factor(qz: f64, width: f64) -> Result<f64> {
    positive("width", width)?;
    Ok(well_form_factor_of_u(0.5 * qz * width))
}

/// `sin u / u · π²/(π² − u²)` with both removable singularities resolved.
pub(crate) fn well_form_factor_of_u(u: f64) -> f64 {
    let u = u.abs();
    if (u - PI).abs() < 0.5 {
        // sin u = −sin(u − π) and π² − u² = −(u − π)(u + π)
        sinc(u - PI) * PI * PI / (u * (u + PI))
    } else {
        sinc(u) * PI * PI / ((PI - u) * (PI + u))
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Coupling `g_{i,q}·√V` of dot `i` (0-based) to the LA phonon `q`, in
/// meV·nm^{3/2}. The quantization volume cancels in every observable.
pub fn coupling_g(
    dot: usize,
    q: Wavevector,
    geometry: &ArrayGeometry,
    materials: &MaterialParams,
) -> Result<C64> {
    if dot >= geometry.n_dots {
        return Err(Error::QubitIndex {
            index: dot,
            n_qubits: geometry.n_dots,
        });
    }
    let l = oscillator_length(geometry.splitting, materials.effective_mass)?;
    let z = geometry.position(dot);
    Ok(coupling_g_unchecked(q, z, l, geometry.well_width, materials))
}

pub(crate) fn coupling_g_unchecked(
    q: Wavevector,
    z: f64,
    l: f64,
    width: f64,
    materials: &MaterialParams,
) -> C64 {
    let amp = materials.coupling_strength_sq(q.norm()).sqrt();
    let inplane = inplane_form_factor_unchecked(q.x, q.y, l);
    let well = well_form_factor_of_u(0.5 * q.z * width);
    amp * inplane * well * C64::from_polar(1.0, q.z * z)
}
