// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) with FSAL and elementwise mixed error control.

use crate::{CMatrix, Error, Result, C64};

#[cfg(test)]
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [&[f64]; 7] = [
    &[],
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

/// Integrator state carried between output times.
pub(crate) struct DormandPrince<F: Fn(&CMatrix) -> CMatrix> {
    rhs: F,
    ctl: StepControl,
    t: f64,
    y: CMatrix,
    k_first: CMatrix,
    h: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl<F: Fn(&CMatrix) -> CMatrix> DormandPrince<F> {
    pub fn new(rhs: F, t0: f64, y0: CMatrix, ctl: StepControl, rate_bound: f64) -> Self {
        let k_first = rhs(&y0);
        let h = if rate_bound > 0.0 { 0.01 / rate_bound } else { 1.0 };
        DormandPrince {
            rhs,
            ctl,
            t: t0,
            y: y0,
            k_first,
            h,
            steps: 0,
            rejected: 0,
        }
    }

    pub fn state(&self) -> &CMatrix {
        &self.y
    }

    fn error_norm(&self, y_new: &CMatrix, err: &CMatrix) -> f64 {
        let mut worst = 0.0f64;
        for ((e, a), b) in err.iter().zip(self.y.iter()).zip(y_new.iter()) {
            let sc = self.ctl.abs_tol + self.ctl.rel_tol * a.norm().max(b.norm());
            worst = worst.max(e.norm() / sc);
        }
        worst
    }

    /// Advance exactly to `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            if self.steps + self.rejected >= self.ctl.max_steps {
                return Err(Error::numerical(
                    "adaptive integrator",
                    format!("step budget {} exhausted at t = {:.6e} ps", self.ctl.max_steps, self.t),
                ));
            }
            let remaining = t_end - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if h <= f64::EPSILON * self.t.abs().max(1.0) * 4.0 && !last {
                return Err(Error::numerical(
                    "adaptive integrator",
                    format!("step size underflow (h = {h:.3e} ps at t = {:.6e} ps)", self.t),
                ));
            }

            let mut k: Vec<CMatrix> = Vec::with_capacity(7);
            k.push(self.k_first.clone());
            for row in &A[1..7] {
                let mut ys = self.y.clone();
                for (j, a) in row.iter().enumerate() {
                    if *a != 0.0 {
                        ys.scaled_add(C64::new(h * a, 0.0), &k[j]);
                    }
                }
                k.push((self.rhs)(&ys));
            }
            // Stage 7 is evaluated at the fifth-order solution (FSAL).
            let mut y_new = self.y.clone();
            for (j, a) in A[6].iter().enumerate() {
                if *a != 0.0 {
                    y_new.scaled_add(C64::new(h * a, 0.0), &k[j]);
                }
            }
            let mut err = CMatrix::zeros(self.y.raw_dim());
            for (j, e) in E.iter().enumerate() {
                if *e != 0.0 {
                    err.scaled_add(C64::new(h * e, 0.0), &k[j]);
                }
            }
            let norm = self.error_norm(&y_new, &err);
            if !norm.is_finite() {
                return Err(Error::numerical(
                    "adaptive integrator",
                    format!("non-finite error estimate at t = {:.6e} ps", self.t),
                ));
            }
            let factor = if norm == 0.0 {
                5.0
            } else {
                (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            if norm <= 1.0 {
                self.t = if last { t_end } else { self.t + h };
                self.y = y_new;
                self.k_first = k.pop().expect("seven stages");
                self.steps += 1;
                // a truncated final step says nothing about the natural size
                if !last {
                    self.h = h * factor;
                } else {
                    self.h = self.h.max(h * factor.min(1.0));
                }
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tableau_rows_sum_to_nodes() {
        for s in 1..7 {
            let sum: f64 = A[s].iter().sum();
            assert_relative_eq!(sum, C[s], max_relative = 1e-14);
        }
        assert!(E.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn scalar_oscillator_matches_closed_form() {
        let lambda = C64::new(-0.3, 2.0);
        let ctl = StepControl {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_steps: 100_000,
        };
        let y0 = CMatrix::from_elem((1, 1), C64::new(1.0, 0.0));
        let mut dp = DormandPrince::new(|y: &CMatrix| y.mapv(|z| z * lambda), 0.0, y0, ctl, 2.0);
        for t in [0.1, 1.0, 5.0, 10.0] {
            dp.advance_to(t).unwrap();
            let exact = (lambda * t).exp();
            assert!((dp.state()[[0, 0]] - exact).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn step_budget_is_reported() {
        let ctl = StepControl {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_steps: 3,
        };
        let y0 = CMatrix::from_elem((1, 1), C64::new(1.0, 0.0));
        let mut dp = DormandPrince::new(|y: &CMatrix| y.mapv(|z| z * C64::new(0.0, 50.0)), 0.0, y0, ctl, 50.0);
        let err = dp.advance_to(100.0).unwrap_err();
        assert!(err.is_numerical());
    }
}
