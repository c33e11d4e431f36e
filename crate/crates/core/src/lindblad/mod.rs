// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Born–Markov Liouvillian of the register and its evolution.
//!
//! ```text
//! L(ρ) = (i/ħ)[ρ, H_c + δH_c]
//!      + (1/ħ) Σ_η Σ_{ii'} Γ^(η)_{ii'} (2 A_i ρ A_{i'}† − A_{i'}†A_i ρ − ρ A_{i'}†A_i),   A_i = σ_i^η
//! ```
//!
//! Internally `L(ρ) = −Gρ − ρG† + J(ρ)` with `G = (iH + K)/ħ`,
//! `K = Σ_η Σ_{ii'} Γ_{ii'} A_{i'}†A_i` and `J` the jump part. Local ladder
//! operators map basis states to basis states, so `J` is applied sparsely.

mod evolve;
mod expm;
mod rk;
mod spectral;

pub use evolve::{
    evolve, fit_initial_slope, DensityMatrix, EvolveOptions, Method, MonitorLimits, SlopeFit, TrajectoryRecord,
    TrajectoryRow,
};
pub use expm::expm;
pub use spectral::{spectrum, SpectralPropagator};

use crate::bath::{carrier_level, hermiticity_deviation, CorrelationSet};
use crate::register::{
    apply_local, carrier_hamiltonian, dimension, ladder_bilinear, lamb_shift_hamiltonian, RegisterOperator, Spin,
};
use crate::units::HBAR;
use crate::{CMatrix, Error, Result, C64};

/// Largest register accepted by [`Liouvillian::superoperator`] (`4^N ≤ 1024`).
pub const SUPEROPERATOR_MAX_QUBITS: usize = 5;

/// Basis transitions `b → f(b)` of one local ladder operator, with the
/// dissipator weight of each qubit pair.
#[derive(Debug, Clone)]
struct JumpChannel {
    /// `moves[i]` lists `(source, target)` for `A_i`.
    moves: Vec<Vec<(usize, usize)>>,
    gamma: CMatrix,
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    n_qubits: usize,
    hamiltonian: CMatrix,
    carrier: CMatrix,
    lamb: CMatrix,
    channels: Vec<JumpChannel>,
    generator: CMatrix,
    generator_adj: CMatrix,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn check_square(m: &CMatrix, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            found: if m.nrows() != n { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

impl Liouvillian {
    /// Lab-frame generator from `H_c`, `δH_c` and `Γ^(±)`.
    pub fn new(
        carrier: &RegisterOperator,
        lamb: &RegisterOperator,
        gamma_plus: &CMatrix,
        gamma_minus: &CMatrix,
    ) -> Result<Self> {
        let n = carrier.n_qubits;
        let d = dimension(n);
        check_square(&carrier.matrix, d)?;
        check_square(&lamb.matrix, d)?;
        check_square(gamma_plus, n)?;
        check_square(gamma_minus, n)?;
        for (what, m) in [("H_c", &carrier.matrix), ("δH_c", &lamb.matrix), ("Γ+", gamma_plus), ("Γ-", gamma_minus)] {
            let dev = hermiticity_deviation(m);
            if dev > 1e-12 {
                return Err(Error::NotHermitian { what, deviation: dev });
            }
        }
        let hamiltonian = &carrier.matrix + &lamb.matrix;

        let mut channels = Vec::with_capacity(2);
        for (gamma, spin) in [(gamma_plus, Spin::Plus), (gamma_minus, Spin::Minus)] {
            let moves = (0..n)
                .map(|q| (0..d).filter_map(|b| apply_local(spin, q, n, b).map(|(t, _)| (b, t))).collect())
                .collect();
            channels.push(JumpChannel {
                moves,
                gamma: gamma.clone(),
            });
        }
        // K = Σ Γ_{ii'} A_{i'}†A_i is the ladder bilinear of Γᵀ.
        let k = ladder_bilinear(&gamma_plus.t().to_owned(), &gamma_minus.t().to_owned(), "K")?.matrix;
        let i = C64::new(0.0, 1.0);
        let generator = (hamiltonian.mapv(|z| i * z) + k).mapv(|z| z / HBAR);
        let generator_adj = adjoint(&generator);
        Ok(Liouvillian {
            n_qubits: n,
            hamiltonian,
            carrier: carrier.matrix.clone(),
            lamb: lamb.matrix.clone(),
            channels,
            generator,
            generator_adj,
        })
    }

    /// Generator for a device: `H_c = (E/2)S^z`, `δH_c` from `Δ^(±)` when
    /// `lamb_shift` is set, dissipator from `Γ^(±)`.
    pub fn from_correlations(set: &CorrelationSet, lamb_shift: bool) -> Result<Self> {
        let n = set.geometry.n_dots;
        let carrier = carrier_hamiltonian(n, carrier_level(&set.geometry))?;
        let lamb = if lamb_shift {
            lamb_shift_hamiltonian(&set.delta_plus, &set.delta_minus)?
        } else {
            RegisterOperator::zeros(n, "δH_c")?
        };
        Self::new(&carrier, &lamb, &set.gamma_plus, &set.gamma_minus)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dimension(&self) -> usize {
        dimension(self.n_qubits)
    }

    /// `L(ρ)`, in ps⁻¹ times the units of `ρ`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        check_square(rho, self.dimension())?;
        Ok(self.apply_unchecked(rho))
    }

    pub(crate) fn apply_unchecked(&self, rho: &CMatrix) -> CMatrix {
        // ρ is not assumed Hermitian, so ρG† is formed directly.
        let mut out = -self.generator.dot(rho);
        out -= &rho.dot(&self.generator_adj);
        self.add_jumps(rho, &mut out);
        out
    }

    fn add_jumps(&self, rho: &CMatrix, out: &mut CMatrix) {
        let scale = 2.0 / HBAR;
        for ch in &self.channels {
            for (i, mi) in ch.moves.iter().enumerate() {
                for (j, mj) in ch.moves.iter().enumerate() {
                    let w = ch.gamma[[i, j]] * scale;
                    if w == zero() {
                        continue;
                    }
                    for &(b, tb) in mi {
                        for &(c, tc) in mj {
                            out[[tb, tc]] += w * rho[[b, c]];
                        }
                    }
                }
            }
        }
    }

    /// Carrier energies if `H_c` is diagonal and every generator term is
    /// balanced with respect to it, so that `e^{−iH_c t/ħ}` factors out.
    fn frame_energies(&self) -> Result<Vec<f64>> {
        let d = self.dimension();
        let scale = self.carrier.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        for ((r, c), z) in self.carrier.indexed_iter() {
            if r != c && z.norm() > 1e-14 * scale {
                return Err(Error::Precondition("rotating frame needs a diagonal H_c".into()));
            }
        }
        let h: Vec<f64> = (0..d).map(|b| self.carrier[[b, b]].re).collect();
        for ((r, c), z) in self.lamb.indexed_iter() {
            if z.norm() > 0.0 && (h[r] - h[c]).abs() > 1e-12 * scale {
                return Err(Error::Precondition("δH_c does not commute with H_c".into()));
            }
        }
        for ch in &self.channels {
            let mut omega: Option<f64> = None;
            for moves in &ch.moves {
                for &(b, t) in moves {
                    let w = h[t] - h[b];
                    match omega {
                        None => omega = Some(w),
                        Some(o) if (o - w).abs() > 1e-12 * scale => {
                            return Err(Error::Precondition(
                                "jump operators are not balanced with respect to H_c".into(),
                            ))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(h)
    }

    /// The same generator with `H_c` removed, plus the carrier energies
    /// needed to map rotating-frame states back to the lab frame.
    pub fn rotating_frame(&self) -> Result<(Liouvillian, Vec<f64>)> {
        let energies = self.frame_energies()?;
        let mut rot = self.clone();
        let i = C64::new(0.0, 1.0);
        rot.generator = &self.generator - &self.carrier.mapv(|z| i * z / HBAR);
        rot.generator_adj = adjoint(&rot.generator);
        rot.hamiltonian = self.lamb.clone();
        rot.carrier = CMatrix::zeros(self.carrier.raw_dim());
        Ok((rot, energies))
    }

    /// Column-stacked `4^N × 4^N` matrix `S` with `vec L(ρ) = S vec ρ`,
    /// where `vec ρ[c·d + r] = ρ[r, c]`.
    pub fn superoperator(&self) -> Result<CMatrix> {
        if self.n_qubits > SUPEROPERATOR_MAX_QUBITS {
            return Err(Error::SizeCap {
                what: "the dense superoperator (use the adaptive-step path)",
                n_qubits: self.n_qubits,
                cap: SUPEROPERATOR_MAX_QUBITS,
            });
        }
        let d = self.dimension();
        let g = &self.generator;
        let mut s = CMatrix::zeros((d * d, d * d));
        // −(I ⊗ G) − (conj(G) ⊗ I)
        for c in 0..d {
            for r_out in 0..d {
                for r in 0..d {
                    let z = g[[r_out, r]];
                    if z != zero() {
                        s[[c * d + r_out, c * d + r]] -= z;
                    }
                }
            }
        }
        for c_out in 0..d {
            for c in 0..d {
                let z = g[[c_out, c]].conj();
                if z == zero() {
                    continue;
                }
                for r in 0..d {
                    s[[c_out * d + r, c * d + r]] -= z;
                }
            }
        }
        let scale = 2.0 / HBAR;
        for ch in &self.channels {
            for (i, mi) in ch.moves.iter().enumerate() {
                for (j, mj) in ch.moves.iter().enumerate() {
                    let w = ch.gamma[[i, j]] * scale;
                    if w == zero() {
                        continue;
                    }
                    for &(b, tb) in mi {
                        for &(c, tc) in mj {
                            s[[tc * d + tb, c * d + b]] += w;
                        }
                    }
                }
            }
        }
        Ok(s)
    }

    /// Total Hamiltonian `H_c + δH_c` of this frame.
    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    /// Crude upper bound on the generator's rate, ps⁻¹.
    pub(crate) fn rate_bound(&self) -> f64 {
        let g = self.generator.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let jumps: f64 = self
            .channels
            .iter()
            .map(|ch| ch.gamma.iter().map(|z| z.norm()).sum::<f64>())
            .sum::<f64>()
            * 2.0
            / HBAR;
        2.0 * g + jumps
    }
}

fn adjoint(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

/// One-shot `L(ρ)` from its ingredients.
pub fn liouvillian_apply(
    rho: &CMatrix,
    carrier: &RegisterOperator,
    lamb: &RegisterOperator,
    gamma_plus: &CMatrix,
    gamma_minus: &CMatrix,
) -> Result<CMatrix> {
    Liouvillian::new(carrier, lamb, gamma_plus, gamma_minus)?.apply(rho)
}

/// One-shot superoperator from its ingredients.
pub fn build_superoperator(
    carrier: &RegisterOperator,
    lamb: &RegisterOperator,
    gamma_plus: &CMatrix,
    gamma_minus: &CMatrix,
) -> Result<CMatrix> {
    if carrier.n_qubits > SUPEROPERATOR_MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "the dense superoperator (use the adaptive-step path)",
            n_qubits: carrier.n_qubits,
            cap: SUPEROPERATOR_MAX_QUBITS,
        });
    }
    Liouvillian::new(carrier, lamb, gamma_plus, gamma_minus)?.superoperator()
}

/// `vec ρ` in column-stacking order.
pub fn vectorize(rho: &CMatrix) -> crate::CVector {
    let d = rho.nrows();
    crate::CVector::from_shape_fn(d * d, |k| rho[[k % d, k / d]])
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &crate::CVector, d: usize) -> CMatrix {
    CMatrix::from_shape_fn((d, d), |(r, c)| v[c * d + r])
}
