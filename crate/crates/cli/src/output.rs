// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON writers. Every file starts with `#` metadata lines echoing
//! the tool version, experiment, seed and the materialised configuration.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::CliError;

pub const TOOL: &str = "dotdfs";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header block shared by every output of one run.
#[derive(Debug, Clone)]
pub struct Metadata {
    pub experiment: String,
    pub seed: u64,
    pub config_json: String,
    /// Extra `key: value` lines (case label, units, ...).
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn with(&self, key: impl Into<String>, value: impl Into<String>) -> Metadata {
        let mut m = self.clone();
        m.extra.push((key.into(), value.into()));
        m
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# tool: {TOOL}")?;
        writeln!(w, "# version: {VERSION}")?;
        writeln!(w, "# experiment: {}", self.experiment)?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# config: {}", self.config_json)?;
        for (k, v) in &self.extra {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

/// Shortest round-trip exponent form, so outputs are exact and byte-stable.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Write `rows` under `header` as RFC-4180 CSV after the metadata block.
pub fn write_csv(path: &Path, meta: &Metadata, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut file = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    meta.write_to(&mut file).map_err(|e| io_err(path, e))?;
    let mut w = csv::WriterBuilder::new().from_writer(file);
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row)?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Read back a CSV written by [`write_csv`]: metadata lines are skipped.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let body: String = text
        .split_inclusive('\n')
        .filter(|l| !l.starts_with('#'))
        .collect();
    let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}
