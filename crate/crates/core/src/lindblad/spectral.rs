// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact evolution `vec ρ(t) = e^{St} vec ρ(0)` of a dense superoperator.
//!
//! Every generator term is `S^z`-balanced, so `S` is block diagonal in the
//! coherence order `k = #1(row) − #1(col)` of `|row⟩⟨col|`. Each block is
//! diagonalised on its own; a block whose eigenbasis is ill-conditioned is
//! propagated with Padé exponentials instead.

use ndarray::Array1;
use ndarray_linalg::{Eig, Inverse};

use super::expm::expm;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Eigenbases with a larger `‖V‖_F‖V⁻¹‖_F` fall back to Padé propagation.
const MAX_CONDITION: f64 = 1e8;
/// Largest accepted `‖SV − VΛ‖_F/‖S‖_F` of an eigendecomposition.
const MAX_RESIDUAL: f64 = 1e-10;
/// Real and imaginary eigenvalue parts below this multiple of `‖S‖_F` are
/// roundoff of exact zeros (stationary states, undamped coherences) and are
/// set to zero; left alone they make `e^{λt}` drift linearly in `t`.
const ZERO_SNAP: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Mode {
    Eigen {
        values: Array1<C64>,
        vectors: CMatrix,
        coeffs: CVector,
    },
    Pade {
        generator: CMatrix,
        state: CVector,
        t: f64,
    },
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    mode: Mode,
}

#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    len: usize,
    blocks: Vec<Block>,
}

fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Index sets of the coherence-order blocks of a `d² × d²` superoperator, or
/// a single block when `s` couples them.
fn partition(s: &CMatrix) -> Vec<Vec<usize>> {
    let len = s.nrows();
    let d = (len as f64).sqrt().round() as usize;
    if d * d != len || !d.is_power_of_two() {
        return vec![(0..len).collect()];
    }
    let order = |k: usize| (k % d).count_ones() as i64 - (k / d).count_ones() as i64;
    let coupled = s
        .indexed_iter()
        .any(|((a, b), z)| order(a) != order(b) && *z != C64::new(0.0, 0.0));
    if coupled {
        return vec![(0..len).collect()];
    }
    let n = d.trailing_zeros() as i64;
    (-n..=n)
        .map(|k| (0..len).filter(|&i| order(i) == k).collect::<Vec<_>>())
        .filter(|v| !v.is_empty())
        .collect()
}

fn sub_matrix(s: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_shape_fn((idx.len(), idx.len()), |(i, j)| s[[idx[i], idx[j]]])
}

struct EigenPieces {
    values: Array1<C64>,
    vectors: CMatrix,
    inverse: CMatrix,
}

fn try_eigen(block: &CMatrix) -> Option<EigenPieces> {
    let (values, vectors) = block.eig().ok()?;
    let inverse = vectors.inv().ok()?;
    let cond = frob(&vectors) * frob(&inverse);
    if !(cond.is_finite() && cond <= MAX_CONDITION) {
        return None;
    }
    let mut resid = block.dot(&vectors);
    for (j, mut col) in resid.columns_mut().into_iter().enumerate() {
        col.scaled_add(-values[j], &vectors.column(j));
    }
    let scale = frob(block).max(f64::MIN_POSITIVE);
    if frob(&resid) / scale > MAX_RESIDUAL {
        return None;
    }
    let snap = |x: f64| if x.abs() < ZERO_SNAP * scale { 0.0 } else { x };
    let values = values.mapv(|l| C64::new(snap(l.re), snap(l.im)));
    Some(EigenPieces {
        values,
        vectors,
        inverse,
    })
}

impl SpectralPropagator {
    /// Prepare propagation of `x0 = vec ρ(0)` under `s`. Blocks on which
    /// `x0` vanishes are skipped.
    pub fn new(s: &CMatrix, x0: &CVector) -> Result<Self> {
        let len = s.nrows();
        if s.ncols() != len || x0.len() != len {
            return Err(Error::Dimension {
                expected: len,
                found: x0.len(),
            });
        }
        let mut blocks = Vec::new();
        for indices in partition(s) {
            let local = CVector::from_iter(indices.iter().map(|&i| x0[i]));
            if local.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            let sb = sub_matrix(s, &indices);
            let mode = match try_eigen(&sb) {
                Some(p) => Mode::Eigen {
                    coeffs: p.inverse.dot(&local),
                    values: p.values,
                    vectors: p.vectors,
                },
                None => Mode::Pade {
                    generator: sb,
                    state: local,
                    t: 0.0,
                },
            };
            blocks.push(Block { indices, mode });
        }
        Ok(SpectralPropagator { len, blocks })
    }

    /// Number of blocks that use the Padé fallback.
    pub fn fallback_blocks(&self) -> usize {
        self.blocks.iter().filter(|b| matches!(b.mode, Mode::Pade { .. })).count()
    }

    /// `vec ρ(t)`. Times must not decrease between calls when a Padé block
    /// is present.
    pub fn state_at(&mut self, t: f64) -> Result<CVector> {
        let mut out = CVector::zeros(self.len);
        for block in &mut self.blocks {
            let local = match &mut block.mode {
                Mode::Eigen {
                    values,
                    vectors,
                    coeffs,
                } => {
                    let weighted = CVector::from_iter(values.iter().zip(coeffs.iter()).map(|(l, c)| (l * t).exp() * c));
                    vectors.dot(&weighted)
                }
                Mode::Pade {
                    generator,
                    state,
                    t: t_prev,
                } => {
                    if t < *t_prev {
                        return Err(Error::Precondition(format!(
                            "spectral propagation requested at t = {t} after t = {t_prev}"
                        )));
                    }
                    if t > *t_prev {
                        let step = expm(&generator.mapv(|z| z * (t - *t_prev)))?;
                        *state = step.dot(state);
                        *t_prev = t;
                    }
                    state.clone()
                }
            };
            for (&i, z) in block.indices.iter().zip(local.iter()) {
                out[i] = *z;
            }
        }
        Ok(out)
    }
}

/// Eigenvalues of a superoperator, computed block by block.
pub fn spectrum(s: &CMatrix) -> Result<Vec<C64>> {
    let mut all = Vec::with_capacity(s.nrows());
    for indices in partition(s) {
        let (values, _) = sub_matrix(s, &indices).eig()?;
        all.extend(values.iter().copied());
    }
    Ok(all)
}
