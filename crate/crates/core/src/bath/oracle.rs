// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Monte-Carlo estimate of `Γ^(η)` straight from the phonon sum.
//!
//! The δ-function restricts the sum to the shell `|q| = q̄`; directions are
//! sampled uniformly and `g_{i,q} ḡ_{i',q}` is averaged using
//! [`crate::model::coupling_g`] semantics. Nothing of the angular reduction used
//! by [`super::gamma_matrix`] is shared, which makes this a cross-check.
//!
//! Samples are drawn in fixed-size chunks; chunk `k` uses a ChaCha8 stream
//! `k` of the given seed and partial sums are reduced in chunk order, so the
//! result is bit-identical for any thread count.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Process;
use crate::model::{coupling_g_unchecked, oscillator_length, shell_wavevector, Wavevector};
use crate::model::{ArrayGeometry, MaterialParams};
use crate::units::HBAR;
use crate::{CMatrix, Error, Result, C64};

pub const MIN_SAMPLES: usize = 100_000;
const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    pub matrix: CMatrix,
    /// Standard error of the real parts, meV.
    pub std_error_re: Array2<f64>,
    /// Standard error of the imaginary parts, meV.
    pub std_error_im: Array2<f64>,
    pub samples: usize,
    pub seed: u64,
}

struct Moments {
    sum: Vec<C64>,
    sq_re: Vec<f64>,
    sq_im: Vec<f64>,
}

impl Moments {
    fn zeros(len: usize) -> Self {
        Moments {
            sum: vec![C64::new(0.0, 0.0); len],
            sq_re: vec![0.0; len],
            sq_im: vec![0.0; len],
        }
    }

    fn merge(mut self, other: Moments) -> Self {
        for k in 0..self.sum.len() {
            self.sum[k] += other.sum[k];
            self.sq_re[k] += other.sq_re[k];
            self.sq_im[k] += other.sq_im[k];
        }
        self
    }
}

pub fn gamma_bruteforce_oracle(
    process: Process,
    geometry: &ArrayGeometry,
    materials: &MaterialParams,
    temperature: f64,
    n_samples: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::Domain {
            name: "n_samples",
            value: n_samples as f64,
            reason: "at least 100000 samples are required",
        });
    }
    materials.validate()?;
    geometry.validate(materials)?;
    let thermal = process.thermal_factor(geometry.splitting, temperature)?;
    let q_bar = shell_wavevector(geometry.splitting, materials.sound_speed)?;
    let length = oscillator_length(geometry.splitting, materials.effective_mass)?;
    let positions = geometry.positions();
    let n = geometry.n_dots;

    let n_chunks = n_samples.div_ceil(CHUNK);
    let partials: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = CHUNK.min(n_samples - chunk * CHUNK);
            let mut m = Moments::zeros(n * n);
            let mut g = vec![C64::new(0.0, 0.0); n];
            for _ in 0..count {
                let c: f64 = 2.0 * rng.random::<f64>() - 1.0;
                let phi: f64 = 2.0 * PI * rng.random::<f64>();
                let s = (1.0 - c * c).max(0.0).sqrt();
                let q = Wavevector::new(q_bar * s * phi.cos(), q_bar * s * phi.sin(), q_bar * c);
                for (gi, &z) in g.iter_mut().zip(&positions) {
                    *gi = coupling_g_unchecked(q, z, length, geometry.well_width, materials);
                }
                for i in 0..n {
                    for j in 0..n {
                        let v = g[i] * g[j].conj();
                        let k = i * n + j;
                        m.sum[k] += v;
                        m.sq_re[k] += v.re * v.re;
                        m.sq_im[k] += v.im * v.im;
                    }
                }
            }
            m
        })
        .collect();
    let total = partials
        .into_iter()
        .fold(Moments::zeros(n * n), Moments::merge);

    // (n+θ)·π·(1/(2π)³)·∫q²dq δ(E − ħc_s q)·4π⟨·⟩_Ω
    let scale = thermal * PI / (8.0 * PI.powi(3)) * q_bar * q_bar / (HBAR * materials.sound_speed) * 4.0 * PI;
    let ns = n_samples as f64;
    let mut matrix = CMatrix::zeros((n, n));
    let mut se_re = Array2::zeros((n, n));
    let mut se_im = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let mean = total.sum[k] / ns;
            let var_re = (total.sq_re[k] / ns - mean.re * mean.re).max(0.0);
            let var_im = (total.sq_im[k] / ns - mean.im * mean.im).max(0.0);
            matrix[[i, j]] = mean * scale;
            se_re[[i, j]] = scale * (var_re / (ns - 1.0)).sqrt();
            se_im[[i, j]] = scale * (var_im / (ns - 1.0)).sqrt();
        }
    }
    Ok(OracleEstimate {
        matrix,
        std_error_re: se_re,
        std_error_im: se_im,
        samples: n_samples,
        seed,
    })
}
