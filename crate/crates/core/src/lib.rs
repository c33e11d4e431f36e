// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Phonon-induced decoherence in vertically stacked quantum-dot qubit arrays.
//!
//! The crate is organised bottom-up:
//!
//! * [`units`] and [`model`]: constants, device geometry, quasi-0D form factors
//!   and the deformation-potential carrier–phonon coupling.
//! * [`bath`]: the dissipative (`Γ^(±)`) and Lamb-shift (`Δ^(±)`) correlation
//!   matrices of the register, plus a Monte-Carlo oracle in [`bath::oracle`].
//! * [`register`]: spin-½ register operators, dimer-singlet encodings and the
//!   first-order decoherence rate.
//! * [`lindblad`]: the Born–Markov Liouvillian and its adaptive-step and
//!   spectral evolution backends.
//!
//! All quantities use the (meV, nm, ps, K) unit system.

pub mod bath;
pub mod error;
pub mod lindblad;
pub mod matrix_io;
pub mod model;
pub mod quadrature;
pub mod register;
pub mod units;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = ndarray::Array2<C64>;

/// Dense complex vector.
pub type CVector = ndarray::Array1<C64>;
