// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Trajectories of the register density matrix.

use ndarray_linalg::{EigValsh, UPLO};
use serde::{Deserialize, Serialize};

use super::rk::{DormandPrince, StepControl};
use super::spectral::SpectralPropagator;
use super::{unvectorize, vectorize, Liouvillian};
use crate::register::RegisterState;
use crate::units::HBAR;
use crate::{CMatrix, CVector, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AdaptiveStep,
    Spectral,
}

/// Abort thresholds checked at every output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorLimits {
    pub trace: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl Default for MonitorLimits {
    fn default() -> Self {
        MonitorLimits {
            trace: 1e-9,
            hermiticity: 1e-9,
            min_eigenvalue: -1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub monitors: MonitorLimits,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            method: Method::AdaptiveStep,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_steps: 5_000_000,
            monitors: MonitorLimits::default(),
        }
    }
}

/// Register density matrix. Construction checks Hermiticity and unit trace
/// to 1e-10 and a minimum eigenvalue of at least −1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d || d < 2 || !d.is_power_of_two() {
            return Err(Error::Dimension {
                expected: d.next_power_of_two().max(2),
                found: matrix.ncols(),
            });
        }
        let rho = DensityMatrix { matrix };
        let herm = rho.hermiticity_deviation();
        if herm > 1e-10 {
            return Err(Error::NotHermitian {
                what: "density matrix",
                deviation: herm,
            });
        }
        let tr = rho.trace_deviation();
        if tr > 1e-10 {
            return Err(Error::Precondition(format!("density matrix trace deviates from 1 by {tr:.3e}")));
        }
        let min = rho.min_eigenvalue()?;
        if min < -1e-9 {
            return Err(Error::Precondition(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    pub fn from_pure(state: &RegisterState) -> Self {
        let a = &state.amplitudes;
        DensityMatrix {
            matrix: CMatrix::from_shape_fn((a.len(), a.len()), |(r, c)| a[r] * a[c].conj()),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace_deviation(&self) -> f64 {
        trace_deviation(&self.matrix)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        abs_hermiticity_deviation(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        purity(&self.matrix)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity(&self, state: &RegisterState) -> f64 {
        fidelity(&self.matrix, &state.amplitudes)
    }
}

fn trace_deviation(m: &CMatrix) -> f64 {
    let tr: C64 = m.diag().iter().sum();
    (tr - 1.0).norm()
}

fn abs_hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut dev = 0.0f64;
    for ((r, c), z) in m.indexed_iter() {
        if r < c {
            dev = dev.max((z - m[[c, r]].conj()).norm());
        } else if r == c {
            dev = dev.max(z.im.abs());
        }
    }
    dev
}

fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    let h = (m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    let vals = h.eigvalsh(UPLO::Lower)?;
    Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
}

fn purity(m: &CMatrix) -> f64 {
    // tr ρ² = Σ ρ_rc ρ_cr
    let mut p = C64::new(0.0, 0.0);
    for ((r, c), z) in m.indexed_iter() {
        p += z * m[[c, r]];
    }
    p.re
}

fn fidelity(m: &CMatrix, psi: &CVector) -> f64 {
    let v = m.dot(psi);
    psi.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().re
}

/// One output time of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t_ps: f64,
    pub fidelity: f64,
    pub trace_dev: f64,
    pub min_eig: f64,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub rows: Vec<TrajectoryRow>,
    pub method: Method,
    /// Accepted steps (adaptive) or Padé-propagated blocks (spectral).
    pub work: usize,
}

impl TrajectoryRecord {
    /// First output time with `F < threshold`, linearly interpolated in `log t`
    /// when the bracketing times are positive.
    pub fn crossing_time(&self, threshold: f64) -> Option<f64> {
        let k = self.rows.iter().position(|r| r.fidelity < threshold)?;
        if k == 0 {
            return Some(self.rows[0].t_ps);
        }
        let (a, b) = (self.rows[k - 1], self.rows[k]);
        let w = (a.fidelity - threshold) / (a.fidelity - b.fidelity);
        if a.t_ps > 0.0 {
            Some((a.t_ps.ln() + w * (b.t_ps.ln() - a.t_ps.ln())).exp())
        } else {
            Some(a.t_ps + w * (b.t_ps - a.t_ps))
        }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Precondition("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid[0] < 0.0 {
        return Err(Error::Precondition("time grid must be finite and non-negative".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("time grid must be strictly increasing".into()));
    }
    Ok(())
}

struct Observer<'a> {
    reference: &'a CVector,
    energies: &'a [f64],
    limits: MonitorLimits,
}

impl Observer<'_> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must breach every monitor
    fn row(&self, t: f64, rho: &CMatrix) -> Result<TrajectoryRow> {
        let breach = |quantity, value, limit| Error::Monitor { t, quantity, value, limit };
        let trace_dev = trace_deviation(rho);
        if !(trace_dev < self.limits.trace) {
            return Err(breach("trace deviation", trace_dev, self.limits.trace));
        }
        let herm = abs_hermiticity_deviation(rho);
        if !(herm < self.limits.hermiticity) {
            return Err(breach("hermiticity deviation", herm, self.limits.hermiticity));
        }
        let min_eig = min_eigenvalue(rho)?;
        if !(min_eig >= self.limits.min_eigenvalue) {
            return Err(breach("min eigenvalue", min_eig, self.limits.min_eigenvalue));
        }
        // lab-frame reference expressed in the rotating frame: e^{+iH_c t/ħ}ψ
        let psi_t = CVector::from_iter(
            self.reference
                .iter()
                .zip(self.energies)
                .map(|(a, h)| a * C64::from_polar(1.0, h * t / HBAR)),
        );
        let f = fidelity(rho, &psi_t);
        let tol = self.limits.trace;
        if !(f >= -tol && f <= 1.0 + tol) {
            return Err(breach("fidelity out of [0, 1]", f, tol));
        }
        Ok(TrajectoryRow {
            t_ps: t,
            // an overlap with a positive state; anything below zero is
            // roundoff already bounded by the check above
            fidelity: f.max(0.0),
            trace_dev,
            min_eig,
            purity: purity(rho),
        })
    }
}

/// Evolve `ρ₀` under the lab-frame generator `liouvillian`, reporting the
/// state at every time of `t_grid` (ps, strictly increasing, from ≥ 0).
///
/// Integration runs in the rotating frame of the diagonal `H_c`; fidelities
/// are lab-frame overlaps with `reference`.
pub fn evolve(
    liouvillian: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    reference: &RegisterState,
    opts: &EvolveOptions,
) -> Result<TrajectoryRecord> {
    check_grid(t_grid)?;
    let d = liouvillian.dimension();
    if rho0.matrix.nrows() != d || reference.amplitudes.len() != d {
        return Err(Error::Dimension {
            expected: d,
            found: if rho0.matrix.nrows() != d {
                rho0.matrix.nrows()
            } else {
                reference.amplitudes.len()
            },
        });
    }
    let (rot, energies) = liouvillian.rotating_frame()?;
    let observer = Observer {
        reference: &reference.amplitudes,
        energies: &energies,
        limits: opts.monitors,
    };
    let mut rows = Vec::with_capacity(t_grid.len());
    let work = match opts.method {
        Method::AdaptiveStep => {
            let ctl = StepControl {
                rel_tol: opts.rel_tol,
                abs_tol: opts.abs_tol,
                max_steps: opts.max_steps,
            };
            let rate = rot.rate_bound();
            let mut dp = DormandPrince::new(|y: &CMatrix| rot.apply_unchecked(y), 0.0, rho0.matrix.clone(), ctl, rate);
            for &t in t_grid {
                dp.advance_to(t)?;
                rows.push(observer.row(t, dp.state())?);
            }
            dp.steps
        }
        Method::Spectral => {
            let s = rot.superoperator()?;
            let mut prop = SpectralPropagator::new(&s, &vectorize(&rho0.matrix))?;
            for &t in t_grid {
                let rho = unvectorize(&prop.state_at(t)?, d);
                rows.push(observer.row(t, &rho)?);
            }
            prop.fallback_blocks()
        }
    };
    Ok(TrajectoryRecord {
        rows,
        method: opts.method,
        work,
    })
}

/// Least-squares fit of `F(t) = 1 − slope·t + curvature·t²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    /// `−dF/dt` at `t = 0`, ps⁻¹.
    pub slope: f64,
    pub curvature: f64,
    /// RMS residual of the fit.
    pub residual: f64,
}

/// Fit the early-time fidelity decay over rows with `t ≤ t_max`.
pub fn fit_initial_slope(rows: &[TrajectoryRow], t_max: f64) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.t_ps > 0.0 && r.t_ps <= t_max)
        .map(|r| (r.t_ps, r.fidelity - 1.0))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Precondition(format!(
            "slope fit needs at least 3 points in (0, {t_max}] ps, got {}",
            pts.len()
        )));
    }
    // normal equations for y = a·t + b·t², scaled by t_max for conditioning
    let (mut s2, mut s3, mut s4, mut sy1, mut sy2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        let x = t / t_max;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
        sy1 += y * x;
        sy2 += y * x * x;
    }
    let det = s2 * s4 - s3 * s3;
    if det.abs() <= f64::EPSILON * s2 * s4 {
        return Err(Error::numerical("slope fit", "degenerate time samples"));
    }
    let a = (sy1 * s4 - sy2 * s3) / det;
    let b = (s2 * sy2 - s3 * sy1) / det;
    let residual = (pts
        .iter()
        .map(|&(t, y)| {
            let x = t / t_max;
            (y - a * x - b * x * x).powi(2)
        })
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    Ok(SlopeFit {
        slope: -a / t_max,
        curvature: b / (t_max * t_max),
        residual,
    })
}
