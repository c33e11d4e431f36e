// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin-½ register algebra.
//!
//! Basis states are labelled by an integer whose most significant of `N` bits
//! is qubit 0; bit value 1 is the excited level `|1⟩`. `σ^+ = |1⟩⟨0|`,
//! `σ^- = |0⟩⟨1|` and `σ^z|1⟩ = +|1⟩`. Qubit indices are 0-based.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::bath::hermiticity_deviation;
use crate::units::HBAR;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Largest register handled by the dense representation (dimension 1024).
pub const MAX_QUBITS: usize = 10;

/// Component `η` of a local or collective spin operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Plus,
    Minus,
    Z,
}

impl Spin {
    pub fn adjoint(self) -> Spin {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
            Spin::Z => Spin::Z,
        }
    }
}

pub fn dimension(n_qubits: usize) -> usize {
    1 << n_qubits
}

fn bit_mask(qubit: usize, n_qubits: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// `σ_qubit^spin |basis⟩ = coeff · |target⟩`, or `None` if annihilated.
#[inline]
pub fn apply_local(spin: Spin, qubit: usize, n_qubits: usize, basis: usize) -> Option<(usize, f64)> {
    let mask = bit_mask(qubit, n_qubits);
    let excited = basis & mask != 0;
    match spin {
        Spin::Plus => (!excited).then_some((basis | mask, 1.0)),
        Spin::Minus => excited.then_some((basis & !mask, 1.0)),
        Spin::Z => Some((basis, if excited { 1.0 } else { -1.0 })),
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "dense register operators",
            n_qubits,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterOperator {
    pub n_qubits: usize,
    pub label: String,
    #[serde(with = "crate::matrix_io::complex_matrix")]
    pub matrix: CMatrix,
}

impl RegisterOperator {
    pub fn zeros(n_qubits: usize, label: impl Into<String>) -> Result<Self> {
        check_register(n_qubits)?;
        let d = dimension(n_qubits);
        Ok(RegisterOperator {
            n_qubits,
            label: label.into(),
            matrix: CMatrix::zeros((d, d)),
        })
    }

    pub fn apply(&self, state: &CVector) -> CVector {
        self.matrix.dot(state)
    }

    pub fn expectation(&self, state: &RegisterState) -> C64 {
        let v = self.apply(&state.amplitudes);
        state.amplitudes.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn adjoint(&self) -> RegisterOperator {
        RegisterOperator {
            n_qubits: self.n_qubits,
            label: format!("({})†", self.label),
            matrix: self.matrix.t().mapv(|z| z.conj()),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix
            .indexed_iter()
            .all(|((i, j), z)| i == j || *z == C64::new(0.0, 0.0))
    }
}

/// Local Pauli operator `σ_qubit^spin` on an `n_qubits` register.
pub fn pauli_local(qubit: usize, spin: Spin, n_qubits: usize) -> Result<RegisterOperator> {
    check_register(n_qubits)?;
    if qubit >= n_qubits {
        return Err(Error::QubitIndex { index: qubit, n_qubits });
    }
    let label = match spin {
        Spin::Plus => format!("σ+_{qubit}"),
        Spin::Minus => format!("σ-_{qubit}"),
        Spin::Z => format!("σz_{qubit}"),
    };
    let mut op = RegisterOperator::zeros(n_qubits, label)?;
    for b in 0..dimension(n_qubits) {
        if let Some((t, c)) = apply_local(spin, qubit, n_qubits, b) {
            op.matrix[[t, b]] += c;
        }
    }
    Ok(op)
}

/// Collective operator `S^η = Σ_i σ_i^η`.
pub fn collective(spin: Spin, n_qubits: usize) -> Result<RegisterOperator> {
    check_register(n_qubits)?;
    let label = match spin {
        Spin::Plus => "S+",
        Spin::Minus => "S-",
        Spin::Z => "Sz",
    };
    let mut op = RegisterOperator::zeros(n_qubits, label)?;
    for b in 0..dimension(n_qubits) {
        for q in 0..n_qubits {
            if let Some((t, c)) = apply_local(spin, q, n_qubits, b) {
                op.matrix[[t, b]] += c;
            }
        }
    }
    Ok(op)
}

/// Free-carrier Hamiltonian `H_c = ε S^z`.
pub fn carrier_hamiltonian(n_qubits: usize, level: f64) -> Result<RegisterOperator> {
    let mut op = collective(Spin::Z, n_qubits)?;
    op.matrix.mapv_inplace(|z| z * level);
    op.label = "H_c".into();
    Ok(op)
}

/// `(S^η_local)ψ` applied without materialising the operator.
fn apply_local_to(spin: Spin, qubit: usize, n_qubits: usize, psi: &CVector) -> CVector {
    let mut out = CVector::zeros(psi.len());
    for (b, a) in psi.iter().enumerate() {
        if *a == C64::new(0.0, 0.0) {
            continue;
        }
        if let Some((t, c)) = apply_local(spin, qubit, n_qubits, b) {
            out[t] += a * c;
        }
    }
    out
}

fn apply_collective_to(spin: Spin, n_qubits: usize, psi: &CVector) -> CVector {
    let mut out = CVector::zeros(psi.len());
    for q in 0..n_qubits {
        out += &apply_local_to(spin, q, n_qubits, psi);
    }
    out
}

fn inner(a: &CVector, b: &CVector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Normalised pure register state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterState {
    pub n_qubits: usize,
    #[serde(with = "crate::matrix_io::complex_vector")]
    pub amplitudes: CVector,
}

impl RegisterState {
    /// Validates length `2^N` and unit norm to 1e-12.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let d = amplitudes.len();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::Precondition(format!(
                "state length {d} is not a power of two >= 2"
            )));
        }
        let n_qubits = d.trailing_zeros() as usize;
        check_register(n_qubits)?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("state norm {norm:.15} differs from 1")));
        }
        Ok(RegisterState { n_qubits, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Precondition("cannot normalise a zero state".into()));
        }
        Self::new(amplitudes.mapv(|z| z / norm))
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut a = CVector::zeros(dimension(n_qubits));
        if index >= a.len() {
            return Err(Error::Dimension {
                expected: a.len(),
                found: index,
            });
        }
        a[index] = C64::new(1.0, 0.0);
        Ok(RegisterState { n_qubits, amplitudes: a })
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨J²⟩` and its variance, with `J = S/2` the total spin.
    pub fn total_spin_moments(&self) -> (f64, f64) {
        let j2 = total_spin_squared_apply(self.n_qubits, &self.amplitudes);
        let mean = inner(&self.amplitudes, &j2).re;
        let second = j2.iter().map(|z| z.norm_sqr()).sum::<f64>();
        (mean, (second - mean * mean).max(0.0))
    }

    /// `⟨S^z⟩` in units of `σ^z` eigenvalues, if the state is an eigenstate.
    pub fn magnetization(&self) -> Option<i64> {
        let n = self.n_qubits;
        let mut value = None;
        for (b, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() < 1e-24 {
                continue;
            }
            let m = 2 * b.count_ones() as i64 - n as i64;
            match value {
                None => value = Some(m),
                Some(v) if v != m => return None,
                _ => {}
            }
        }
        value
    }
}

/// `J²ψ` with `J_z = S^z/2`, `J² = J_z² + (S^+S^- + S^-S^+)/2`.
fn total_spin_squared_apply(n_qubits: usize, psi: &CVector) -> CVector {
    let sz = apply_collective_to(Spin::Z, n_qubits, psi);
    let szsz = apply_collective_to(Spin::Z, n_qubits, &sz);
    let pm = apply_collective_to(Spin::Plus, n_qubits, &apply_collective_to(Spin::Minus, n_qubits, psi));
    let mp = apply_collective_to(Spin::Minus, n_qubits, &apply_collective_to(Spin::Plus, n_qubits, psi));
    szsz.mapv(|z| z * 0.25) + (pm + mp).mapv(|z| z * 0.5)
}

/// Pairing of the register into disjoint dimers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimerPartition {
    n_qubits: usize,
    pairs: Vec<(usize, usize)>,
}

impl DimerPartition {
    /// `pairs` use 0-based qubit indices and must cover `0..n_qubits` exactly once.
    pub fn new(n_qubits: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if n_qubits == 0 || !n_qubits.is_multiple_of(2) {
            return Err(Error::Partition(format!("register size {n_qubits} is not even")));
        }
        let mut seen = vec![false; n_qubits];
        for &(i, j) in &pairs {
            for k in [i, j] {
                if k >= n_qubits {
                    return Err(Error::Partition(format!("index {k} outside 0..{n_qubits}")));
                }
                if seen[k] {
                    return Err(Error::Partition(format!("index {k} appears more than once")));
                }
                seen[k] = true;
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::Partition(format!("index {k} is not covered")));
        }
        Ok(DimerPartition { n_qubits, pairs })
    }

    /// Same as [`DimerPartition::new`] with 1-based indices.
    pub fn from_one_based(n_qubits: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let shifted = pairs
            .iter()
            .map(|&(i, j)| {
                if i == 0 || j == 0 {
                    Err(Error::Partition("1-based indices start at 1".into()))
                } else {
                    Ok((i - 1, j - 1))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_qubits, shifted)
    }

    /// Nearest-neighbour pairing `(0,1), (2,3), …`.
    pub fn adjacent(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, (0..n_qubits / 2).map(|k| (2 * k, 2 * k + 1)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// `⊗_{(i,i')} (|01⟩ − |10⟩)/√2` over the dimers of `partition`.
pub fn singlet_dimer_state(partition: &DimerPartition) -> Result<RegisterState> {
    let n = partition.n_qubits();
    check_register(n)?;
    let mut amps = CVector::zeros(dimension(n));
    let amp = 2f64.powf(-(partition.pairs().len() as f64) / 2.0);
    // Each pair contributes +|0_i 1_i'⟩ or −|1_i 0_i'⟩.
    for choice in 0..(1usize << partition.pairs().len()) {
        let mut basis = 0usize;
        let mut sign = 1.0;
        for (k, &(i, j)) in partition.pairs().iter().enumerate() {
            if choice >> k & 1 == 0 {
                basis |= bit_mask(j, n);
            } else {
                basis |= bit_mask(i, n);
                sign = -sign;
            }
        }
        amps[basis] = C64::new(sign * amp, 0.0);
    }
    RegisterState::new(amps)
}

fn check_coupling(m: &CMatrix, n_qubits: usize, what: &'static str) -> Result<()> {
    if m.nrows() != n_qubits || m.ncols() != n_qubits {
        return Err(Error::Dimension {
            expected: n_qubits,
            found: m.nrows(),
        });
    }
    let dev = hermiticity_deviation(m);
    if dev > 1e-12 {
        return Err(Error::NotHermitian { what, deviation: dev });
    }
    Ok(())
}

/// `Σ_{ii'} M⁺_{ii'} σ_i^- σ_{i'}^+ + M⁻_{ii'} σ_i^+ σ_{i'}^-`.
pub(crate) fn ladder_bilinear(plus: &CMatrix, minus: &CMatrix, label: &str) -> Result<RegisterOperator> {
    let n = plus.nrows();
    let mut op = RegisterOperator::zeros(n, label)?;
    let terms = [(plus, Spin::Minus, Spin::Plus), (minus, Spin::Plus, Spin::Minus)];
    for b in 0..dimension(n) {
        for (m, outer, inner_spin) in terms {
            for i2 in 0..n {
                let Some((mid, c2)) = apply_local(inner_spin, i2, n, b) else {
                    continue;
                };
                for i1 in 0..n {
                    let coeff = m[[i1, i2]];
                    if coeff == C64::new(0.0, 0.0) {
                        continue;
                    }
                    if let Some((t, c1)) = apply_local(outer, i1, n, mid) {
                        op.matrix[[t, b]] += coeff * (c1 * c2);
                    }
                }
            }
        }
    }
    Ok(op)
}

/// `H_eff = Σ_η Σ_{ii'} Γ^(η)_{ii'} σ_i^{−η} σ_{i'}^{η}`.
pub fn effective_hamiltonian(gamma_plus: &CMatrix, gamma_minus: &CMatrix) -> Result<RegisterOperator> {
    let n = gamma_plus.nrows();
    check_coupling(gamma_plus, n, "gamma_plus")?;
    check_coupling(gamma_minus, n, "gamma_minus")?;
    ladder_bilinear(gamma_plus, gamma_minus, "H_eff")
}

/// Lamb-shift renormalisation `δH_c`, same structure as [`effective_hamiltonian`].
pub fn lamb_shift_hamiltonian(delta_plus: &CMatrix, delta_minus: &CMatrix) -> Result<RegisterOperator> {
    let n = delta_plus.nrows();
    check_coupling(delta_plus, n, "delta_plus")?;
    check_coupling(delta_minus, n, "delta_minus")?;
    ladder_bilinear(delta_plus, delta_minus, "δH_c")
}

/// `⟨ψ|H_eff|ψ⟩` computed as `Σ Γ_{ii'} ⟨σ_i^η ψ|σ_{i'}^η ψ⟩`.
fn effective_expectation(psi: &RegisterState, gamma_plus: &CMatrix, gamma_minus: &CMatrix) -> f64 {
    let n = psi.n_qubits;
    let mut total = C64::new(0.0, 0.0);
    for (m, spin) in [(gamma_plus, Spin::Plus), (gamma_minus, Spin::Minus)] {
        let moved: Vec<CVector> = (0..n)
            .map(|q| apply_local_to(spin, q, n, &psi.amplitudes))
            .collect();
        for i in 0..n {
            for j in 0..n {
                total += m[[i, j]] * inner(&moved[i], &moved[j]);
            }
        }
    }
    total.re
}

/// Largest `J²` variance accepted as a total-spin eigenstate.
pub const SPIN_EIGENSTATE_TOLERANCE: f64 = 1e-8;

/// First-order decoherence rate `τ₁⁻¹ = ⟨ψ|H_eff|ψ⟩/ħ`, ps⁻¹.
///
/// Defined for total-spin eigenstates only. Under the dissipator normalisation
/// used by [`crate::lindblad`], the initial fidelity slope is
/// `dF/dt = −FIDELITY_SLOPE_FACTOR · τ₁⁻¹`.
pub fn tau1_inverse(psi: &RegisterState, gamma_plus: &CMatrix, gamma_minus: &CMatrix) -> Result<f64> {
    let n = psi.n_qubits;
    check_coupling(gamma_plus, n, "gamma_plus")?;
    check_coupling(gamma_minus, n, "gamma_minus")?;
    let (_, variance) = psi.total_spin_moments();
    if variance > SPIN_EIGENSTATE_TOLERANCE {
        return Err(Error::Precondition(format!(
            "state is not a total-spin eigenstate (S² variance {variance:.3e})"
        )));
    }
    Ok(effective_expectation(psi, gamma_plus, gamma_minus) / HBAR)
}

/// Ratio between the master-equation fidelity slope and `τ₁⁻¹`.
pub const FIDELITY_SLOPE_FACTOR: f64 = 2.0;

/// Multi-qubit correlation factor `f_D = 1 − (2/N) Re Σ_{(i,i')∈D} Γ_{ii'}/Γ₁₁`.
pub fn correlation_factor(gamma: &CMatrix, partition: &DimerPartition) -> Result<f64> {
    let n = partition.n_qubits();
    if gamma.nrows() != n || gamma.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            found: gamma.nrows(),
        });
    }
    let g11 = gamma[[0, 0]];
    if g11.norm() == 0.0 {
        return Err(Error::Domain {
            name: "gamma[0][0]",
            value: 0.0,
            reason: "f_D is undefined for a vanishing diagonal",
        });
    }
    let sum: C64 = partition.pairs().iter().map(|&(i, j)| gamma[[i, j]] / g11).sum();
    Ok(1.0 - 2.0 / n as f64 * sum.re)
}

/// Rate `Σ_η NΓ^(η)₁₁/(2ħ)` of `N` uncorrelated qubits in a singlet-type
/// encoding (`f_D = 1`), ps⁻¹.
pub fn uncorrelated_rate(gamma_plus: &CMatrix, gamma_minus: &CMatrix) -> f64 {
    let n = gamma_plus.nrows() as f64;
    n * (gamma_plus[[0, 0]].re + gamma_minus[[0, 0]].re) / (2.0 * HBAR)
}

/// Real amplitudes convenience used by tests and configs.
pub fn state_from_real(values: &[f64]) -> Result<RegisterState> {
    RegisterState::normalized(Array1::from_iter(values.iter().map(|&v| C64::new(v, 0.0))))
}
