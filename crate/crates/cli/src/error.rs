// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed JSON or an unreadable config file.
    #[error("config error: {0}")]
    Parse(String),

    /// A well-formed config with an invalid value.
    #[error("config error: {field}: {message}")]
    Config { field: String, message: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Config { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<dotdfs::Error> for CliError {
    /// Quadrature, integrator and monitor failures are numerical; everything
    /// else traces back to an input value.
    fn from(e: dotdfs::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config {
                field: "input".into(),
                message: e.to_string(),
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
