// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON layout for complex matrices and vectors.
//!
//! A matrix is an array of rows; each row is an array of `[re, im]` pairs.
//! A vector is a flat array of `[re, im]` pairs. Use with
//! `#[serde(with = "dotdfs::matrix_io::complex_matrix")]`.

pub mod complex_matrix {
    use ndarray::Array2;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::{CMatrix, C64};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = m
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        let flat: Vec<C64> = rows
            .into_iter()
            .flatten()
            .map(|[re, im]| C64::new(re, im))
            .collect();
        Array2::from_shape_vec((n_rows, n_cols), flat).map_err(D::Error::custom)
    }
}

pub mod complex_vector {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::{CVector, C64};

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}
