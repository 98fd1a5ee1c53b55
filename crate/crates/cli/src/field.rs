//! CSV dumps of grid functions and scan tables.

use std::path::Path;

use mlap_core::{GridFunction, ScanReport};

use crate::error::CliError;

/// Header of a field dump.
pub const FIELD_COLUMNS: [&str; 4] = ["x", "delta", "u", "du"];

/// 17 significant digits, enough to round-trip any `f64`.
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn open(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Columns `x, delta, u, du`, one row per node; `du` is the nodal derivative.
pub fn write_field_csv(path: &Path, u: &GridFunction) -> Result<(), CliError> {
    let grid = u.grid();
    let du = u.nodal_derivative();
    let mut w = open(path)?;
    let wrap = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(FIELD_COLUMNS).map_err(wrap)?;
    let columns = grid.nodes().iter().zip(grid.delta()).zip(u.values()).zip(&du);
    for (((&x, &d), &v), &dv) in columns {
        let row = [x, d, v, dv].map(sci);
        w.write_record(&row).map_err(wrap)?;
    }
    finish(w, path)
}

/// Columns `n, tau, norm`, one row per level and exponent.
pub fn write_scan_csv(path: &Path, scan: &ScanReport) -> Result<(), CliError> {
    let mut w = open(path)?;
    let wrap = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(["n", "tau", "norm"]).map_err(wrap)?;
    for (n, row) in scan.levels.iter().zip(&scan.norms) {
        for (tau, norm) in scan.tau_values.iter().zip(row) {
            w.write_record([n.to_string(), sci(*tau), sci(*norm)]).map_err(wrap)?;
        }
    }
    finish(w, path)
}

/// Rows of a field dump, as numbers.
pub fn read_field_csv(path: &Path) -> Result<Vec<[f64; 4]>, CliError> {
    let wrap = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    let header = r.headers().map_err(wrap)?.clone();
    if header.iter().ne(FIELD_COLUMNS) {
        return Err(CliError::config(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(wrap)?;
        let mut row = [0.0; 4];
        for (slot, cell) in row.iter_mut().zip(rec.iter()) {
            *slot = cell
                .parse()
                .map_err(|_| CliError::config(format!("{}: bad number {cell:?}", path.display())))?;
        }
        rows.push(row);
    }
    Ok(rows)
}
