// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant (Higham 2005). Used where an eigenbasis is ill-conditioned.

use ndarray_linalg::Inverse;

use crate::{CMatrix, Result, C64};

const B: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA_13: f64 = 5.371_920_351_148_152;

fn one_norm(m: &CMatrix) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn identity(n: usize) -> CMatrix {
    CMatrix::from_shape_fn((n, n), |(i, j)| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

fn combo(terms: &[(f64, &CMatrix)]) -> CMatrix {
    let mut out = CMatrix::zeros(terms[0].1.raw_dim());
    for (c, m) in terms {
        out.scaled_add(C64::new(*c, 0.0), m);
    }
    out
}

/// `e^A` for a square complex matrix.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.mapv(|z| z / 2f64.powi(s));
    let id = identity(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let u_inner = a6.dot(&combo(&[(B[13], &a6), (B[11], &a4), (B[9], &a2)]))
        + combo(&[(B[7], &a6), (B[5], &a4), (B[3], &a2), (B[1], &id)]);
    let u = a.dot(&u_inner);
    let v = a6.dot(&combo(&[(B[12], &a6), (B[10], &a4), (B[8], &a2)]))
        + combo(&[(B[6], &a6), (B[4], &a4), (B[2], &a2), (B[0], &id)]);

    let mut r = (&v - &u).inv()?.dot(&(&v + &u));
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_nilpotent_cases() {
        let mut d = CMatrix::zeros((3, 3));
        d[[0, 0]] = C64::new(-2.0, 1.0);
        d[[1, 1]] = C64::new(0.5, 0.0);
        d[[2, 2]] = C64::new(-40.0, 3.0);
        let e = expm(&d).unwrap();
        for k in 0..3 {
            assert!((e[[k, k]] - d[[k, k]].exp()).norm() < 1e-12 * d[[k, k]].exp().norm().max(1e-300));
        }
        // e^N = I + N for N² = 0
        let mut nil = CMatrix::zeros((2, 2));
        nil[[0, 1]] = C64::new(30.0, -4.0);
        let e = expm(&nil).unwrap();
        assert!((e[[0, 1]] - nil[[0, 1]]).norm() < 1e-10);
        assert!((e[[0, 0]] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn rotation_generator() {
        let theta = 7.3;
        let mut g = CMatrix::zeros((2, 2));
        g[[0, 1]] = C64::new(-theta, 0.0);
        g[[1, 0]] = C64::new(theta, 0.0);
        let e = expm(&g).unwrap();
        assert!((e[[0, 0]].re - theta.cos()).abs() < 1e-12);
        assert!((e[[1, 0]].re - theta.sin()).abs() < 1e-12);
    }
}
