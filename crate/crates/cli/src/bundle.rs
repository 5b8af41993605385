//! Report bundles: `report.json` plus one CSV per curve.

use std::fs;
use std::path::{Path, PathBuf};

use opderiv::schema::{continuity_to_json, insert, report_to_json, to_json_string, validate_report};
use opderiv::DiffReport;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const REPORT_FILE: &str = "report.json";

/// Floats in CSVs use the same 17-digit form as the JSON.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn pair_rows(xs: &[f64], ys: &[f64]) -> Vec<Vec<String>> {
    xs.iter().zip(ys).map(|(&x, &y)| vec![fmt_f64(x), fmt_f64(y)]).collect()
}

/// Report JSON with `metadata` and optional `extras` attached; validated before returning.
pub fn report_json(report: &DiffReport, metadata: Value, extras: Option<Value>) -> CliResult<Value> {
    let mut v = report_to_json(report);
    insert(&mut v, "metadata", metadata);
    if let Some(e) = extras {
        insert(&mut v, "extras", e);
    }
    validate_report(&v).map_err(|e| CliError::Report(e.to_string()))?;
    Ok(v)
}

/// Writes `report.json`, `truncation.csv`, `lipschitz.csv`, and `continuity.csv` / `chain.csv` when present.
pub fn write_bundle(dir: &Path, report: &DiffReport, json: &Value) -> CliResult<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();

    let path = dir.join(REPORT_FILE);
    let text = to_json_string(json)?;
    fs::write(&path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
    written.push(path);

    let path = dir.join("truncation.csv");
    let (ns, norms): (Vec<f64>, Vec<f64>) = report.weak_verdict.curve.iter().copied().unzip();
    write_csv(&path, &["n", "norm"], pair_rows(&ns, &norms))?;
    written.push(path);

    let path = dir.join("lipschitz.csv");
    write_csv(&path, &["t", "ratio"], pair_rows(&report.lipschitz.t_grid, &report.lipschitz.ratios))?;
    written.push(path);

    if let Some(c) = &report.continuity {
        let path = dir.join("continuity.csv");
        write_csv(&path, &["delta", "omega"], pair_rows(&c.delta_grid, &c.omega))?;
        written.push(path);
    }
    if let Some(chain) = &report.chain {
        let path = dir.join("chain.csv");
        let rows = chain.verdicts.iter().enumerate().flat_map(|(k, v)| {
            v.curve.iter().map(move |&(n, y)| vec![(k + 1).to_string(), fmt_f64(n), fmt_f64(y)])
        });
        write_csv(&path, &["order", "n", "norm"], rows)?;
        written.push(path);
    }
    Ok(written)
}

/// `extras.symbol_continuity` as its own CSV.
pub fn write_extra_continuity(dir: &Path, c: &opderiv::dynamics::ContinuityModulus) -> CliResult<(PathBuf, Value)> {
    let path = dir.join("symbol_continuity.csv");
    write_csv(&path, &["delta", "omega"], pair_rows(&c.delta_grid, &c.omega))?;
    Ok((path, continuity_to_json(c)))
}
