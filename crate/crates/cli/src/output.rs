//! CSV and JSON artifacts. Numbers are written with 17 significant digits so
//! every double survives a write/read cycle unchanged.

use crate::error::CliError;
use serde::Serialize;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use weyl_core::grid::{MeridianGrid, ScalarField};

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Writes a table; each row is already formatted.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `rho,z,value` for every node, in storage order.
pub fn write_field(path: &Path, field: &ScalarField) -> Result<(), CliError> {
    let grid = *field.grid();
    write_csv(
        path,
        &["rho", "z", "value"],
        field.values().iter().enumerate().map(|(k, v)| {
            let (r, z) = grid.coords(k);
            vec![fmt(r), fmt(z), fmt(*v)]
        }),
    )
}

/// Several fields side by side: `rho,z,<name>...`.
pub fn write_fields(path: &Path, fields: &[&ScalarField]) -> Result<(), CliError> {
    let grid = *fields[0].grid();
    let mut header = vec!["rho", "z"];
    header.extend(fields.iter().map(|f| f.name()));
    write_csv(
        path,
        &header,
        (0..grid.len()).map(|k| {
            let (r, z) = grid.coords(k);
            let mut row = vec![fmt(r), fmt(z)];
            row.extend(fields.iter().map(|f| fmt(f.values()[k])));
            row
        }),
    )
}

/// Reads a `rho,z,value` file and places it on `grid`. Nodes may come in any
/// order but must cover the grid exactly once.
pub fn read_field(path: &Path, grid: &MeridianGrid, name: &str) -> Result<ScalarField, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["rho", "z", "value"] {
        return Err(csv_err(path, "expected header rho,z,value"));
    }
    let mut values = vec![f64::NAN; grid.len()];
    let mut seen = vec![false; grid.len()];
    let tol_r = 1e-9 * grid.h_rho();
    let tol_z = 1e-9 * grid.h_z();
    let mut count = 0usize;
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let num = |c: usize| -> Result<f64, CliError> {
            rec.get(c)
                .ok_or_else(|| csv_err(path, format!("row {}: missing column", line + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| csv_err(path, format!("row {}: {e}", line + 2)))
        };
        let (rho, z, v) = (num(0)?, num(1)?, num(2)?);
        let i = ((rho - grid.rho_min()) / grid.h_rho()).round();
        let j = ((z - grid.z_min()) / grid.h_z()).round();
        let mismatch = || {
            CliError::GridMismatch(format!(
                "{}: node (rho = {rho}, z = {z}) is not on the declared grid",
                path.display()
            ))
        };
        if i < 0.0 || j < 0.0 || i >= grid.n_rho() as f64 || j >= grid.n_z() as f64 {
            return Err(mismatch());
        }
        let (i, j) = (i as usize, j as usize);
        if (grid.rho(i) - rho).abs() > tol_r || (grid.z(j) - z).abs() > tol_z {
            return Err(mismatch());
        }
        let k = grid.index(i, j);
        if seen[k] {
            return Err(CliError::GridMismatch(format!(
                "{}: node (rho = {rho}, z = {z}) appears twice",
                path.display()
            )));
        }
        seen[k] = true;
        values[k] = v;
        count += 1;
    }
    if count != grid.len() {
        return Err(CliError::GridMismatch(format!(
            "{}: {count} nodes, the declared grid has {}",
            path.display(),
            grid.len()
        )));
    }
    ScalarField::new(*grid, values, name).map_err(|e| csv_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

pub fn prepare_dir(dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.to_path_buf())
}
