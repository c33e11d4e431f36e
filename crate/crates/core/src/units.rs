// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Physical constants in the (meV, nm, ps, K) unit system.
//!
//! This is the only place constants are defined; everything else imports them.

/// Reduced Planck constant, meV·ps.
pub const HBAR: f64 = 0.658_211_956_9;

/// Boltzmann constant, meV/K.
pub const K_B: f64 = 0.086_173_332_62;

/// One kilogram expressed in meV·ps²/nm² (1 J = 6.241509074e21 meV).
pub const KILOGRAM: f64 = 6.241_509_074e27;

/// Free-electron mass, meV·ps²/nm².
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31 * KILOGRAM;

/// Converts a mass density in kg/m³ to meV·ps²/nm⁵.
pub const KG_PER_M3: f64 = KILOGRAM * 1e-27;
