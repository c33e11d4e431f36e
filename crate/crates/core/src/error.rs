// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid material parameters: {0}")]
    Materials(String),

    #[error("invalid dimer partition: {0}")]
    Partition(String),

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("{what} is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { what: &'static str, deviation: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("register of {n_qubits} qubits exceeds the cap of {cap} for {what}")]
    SizeCap {
        what: &'static str,
        n_qubits: usize,
        cap: usize,
    },

    /// A quadrature, integrator or decomposition failed to reach its tolerance.
    #[error("numerical failure in {context}: {detail}")]
    Numerical { context: String, detail: String },

    /// A trajectory monitor (trace, Hermiticity, positivity) was breached.
    #[error("monitor breach at t = {t:.6e} ps: {quantity} = {value:.3e} (limit {limit:.1e})")]
    Monitor {
        t: f64,
        quantity: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("linear algebra: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn numerical(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Numerical {
            context: context.into(),
            detail: detail.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical { .. } | Error::Monitor { .. } | Error::Linalg(_)
        )
    }
}
