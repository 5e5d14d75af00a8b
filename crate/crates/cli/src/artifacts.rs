//! Output directory handling and the on-disk formats.
//!
//! Every JSON artifact is an object carrying `schema_version` and `kind`.
//! Floats are written with Rust's shortest round-trip formatting, so repeated
//! runs of the same configuration produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use inlsv_core::evolution::TimeSeries;
use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    #[serde(flatten)]
    data: &'a T,
}

pub fn to_json<T: Serialize>(kind: &str, data: &T) -> Result<String, CliError> {
    let env = Envelope { schema_version: SCHEMA_VERSION, kind, data };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| CliError::Numeric(format!("serialising {kind}: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Precondition(format!("cannot create output directory {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Precondition(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, kind: &str, data: &T) -> Result<String, CliError> {
        let text = to_json(kind, data)?;
        self.write(name, &text)?;
        Ok(text)
    }

    pub fn write_csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Numeric(format!("writing {name}: {e}"));
        w.write_record(header).map_err(fail)?;
        for row in rows {
            w.write_record(row).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Numeric(format!("writing {name}: {e}")))?;
        self.write(name, &String::from_utf8_lossy(&bytes))
    }
}

pub fn num(x: f64) -> String {
    x.to_string()
}

/// Column names of the time-series CSV, in order.
pub fn record_header(series: &TimeSeries<f64>) -> Vec<String> {
    let mut h: Vec<String> = [
        "t", "mass", "energy", "energy0", "grad_sq", "lambda_sq", "pot_v", "pot_nl", "k", "h", "variance",
        "virial_action", "shell_mass", "rad_sup",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if let Some(first) = series.records.first() {
        h.extend(first.ball_mass.iter().map(|b| format!("ball_mass_{}", num(b.radius))));
        h.extend(first.lebesgue.iter().map(|l| format!("lp_{}", num(l.exponent))));
        if first.localized.is_some() {
            h.extend(["localized_action".to_string(), "localized_rate".to_string()]);
        }
    }
    h
}

pub fn record_rows(series: &TimeSeries<f64>) -> Vec<Vec<String>> {
    series
        .records
        .iter()
        .map(|r| {
            let mut row: Vec<String> = [
                r.t, r.mass, r.energy, r.energy0, r.grad_sq, r.lambda_sq, r.pot_v, r.pot_nl, r.k, r.h, r.variance,
                r.virial_action, r.shell_mass, r.rad_sup,
            ]
            .into_iter()
            .map(num)
            .collect();
            row.extend(r.ball_mass.iter().map(|b| num(b.mass)));
            row.extend(r.lebesgue.iter().map(|l| num(l.norm)));
            if let Some(loc) = &r.localized {
                row.extend([num(loc.action), num(loc.rate)]);
            }
            row
        })
        .collect()
}

/// `(t, value)` pairs of one CSV column.
pub fn column(series: &TimeSeries<f64>, name: &str) -> Option<Vec<(f64, f64)>> {
    let header = record_header(series);
    let idx = header.iter().position(|h| h == name)?;
    let rows = record_rows(series);
    Some(
        series
            .records
            .iter()
            .zip(rows)
            .map(|(r, row)| (r.t, row[idx].parse().unwrap_or(f64::NAN)))
            .collect(),
    )
}
