// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment driver for `dotdfs`: JSON configs in, CSV/JSON results out.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::ExperimentConfig;
pub use error::CliError;
