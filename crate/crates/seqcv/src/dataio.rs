//! CSV ingestion and export of predictor matrices and response vectors.
//!
//! Matrices ship as UTF-8 CSV with a header row of feature names, one row per
//! observation, '.' decimal separator. Responses are single-column CSV. Cells
//! must parse as finite numbers; missing values are rejected with the file
//! and line named.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simgen::SimulatedDataset;

/// Paths to one dataset's three files plus the optional response transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetFiles {
    pub x1: PathBuf,
    pub x2: PathBuf,
    pub y: PathBuf,
    /// Natural-log transform of the response on load.
    pub log_y: bool,
}

/// A fully parsed dataset with preserved column names.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub x1_names: Vec<String>,
    pub x1: Array2<f64>,
    pub x2_names: Vec<String>,
    pub x2: Array2<f64>,
    pub y_name: String,
    pub y: Array1<f64>,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_cell(path: &Path, line: usize, column: &str, cell: &str) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line,
        message: format!("cell '{cell}' in column '{column}' is not numeric"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line,
            message: format!("cell '{cell}' in column '{column}' is not finite"),
        });
    }
    Ok(v)
}

/// Reads a matrix CSV: header row of names, then numeric rows.
pub fn load_matrix_csv(path: &Path) -> Result<(Vec<String>, Array2<f64>)> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(BufReader::new(file));
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("bad header: {e}"),
        })?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if names.is_empty() {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: "empty header".into(),
        });
    }
    let p = names.len();
    let mut data: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2; // header is line 1
        let record = record.map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line,
            message: format!("malformed row: {e}"),
        })?;
        if record.len() != p {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line,
                message: format!("expected {p} cells, found {}", record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            data.push(parse_cell(path, line, &names[j], cell)?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 2,
            message: "no data rows".into(),
        });
    }
    let x = Array2::from_shape_vec((n, p), data)
        .map_err(|e| Error::Input(format!("shape error reading {}: {e}", path.display())))?;
    Ok((names, x))
}

/// Reads a single-column CSV (header + one value per row).
pub fn load_vector_csv(path: &Path) -> Result<(String, Array1<f64>)> {
    let (names, x) = load_matrix_csv(path)?;
    if names.len() != 1 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("expected a single column, found {}", names.len()),
        });
    }
    Ok((names[0].clone(), x.column(0).to_owned()))
}

/// Writes a matrix CSV; floats use shortest round-trip formatting so a
/// save/load cycle reproduces values bit-exactly.
pub fn save_matrix_csv(path: &Path, names: &[String], x: &Array2<f64>) -> Result<()> {
    if names.len() != x.ncols() {
        return Err(Error::Input(format!(
            "{} names for {} columns",
            names.len(),
            x.ncols()
        )));
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(names)
        .map_err(|e| Error::Input(format!("csv write failed: {e}")))?;
    let mut buf: Vec<String> = Vec::with_capacity(x.ncols());
    for row in x.rows() {
        buf.clear();
        buf.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&buf)
            .map_err(|e| Error::Input(format!("csv write failed: {e}")))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn save_vector_csv(path: &Path, name: &str, y: &Array1<f64>) -> Result<()> {
    let m = y.view().insert_axis(ndarray::Axis(1)).to_owned();
    save_matrix_csv(path, &[name.to_string()], &m)
}

/// Default feature names x1_1, x1_2, ... used by the simulator export.
fn numbered(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}_{i}")).collect()
}

/// Writes a simulated dataset as `x1.csv`, `x2.csv`, `y.csv` under `dir`.
pub fn export_dataset(ds: &SimulatedDataset, dir: &Path) -> Result<DatasetFiles> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let x1 = dir.join("x1.csv");
    let x2 = dir.join("x2.csv");
    let y = dir.join("y.csv");
    save_matrix_csv(&x1, &numbered("x1", ds.x1.ncols()), &ds.x1)?;
    save_matrix_csv(&x2, &numbered("x2", ds.x2.ncols()), &ds.x2)?;
    save_vector_csv(&y, "y", &ds.y)?;
    Ok(DatasetFiles {
        x1,
        x2,
        y,
        log_y: false,
    })
}

/// Loads and validates the three files; applies the natural-log transform to
/// the response when flagged.
pub fn load_dataset(files: &DatasetFiles) -> Result<LoadedDataset> {
    let (x1_names, x1) = load_matrix_csv(&files.x1)?;
    let (x2_names, x2) = load_matrix_csv(&files.x2)?;
    let (y_name, mut y) = load_vector_csv(&files.y)?;
    if x1.nrows() != y.len() || x2.nrows() != y.len() {
        return Err(Error::Input(format!(
            "row counts disagree: {} has {}, {} has {}, {} has {}",
            files.x1.display(),
            x1.nrows(),
            files.x2.display(),
            x2.nrows(),
            files.y.display(),
            y.len()
        )));
    }
    if files.log_y {
        if y.iter().any(|&v| v <= 0.0) {
            return Err(Error::Input(
                "log transform requested but the response has non-positive values".into(),
            ));
        }
        y.mapv_inplace(f64::ln);
    }
    Ok(LoadedDataset {
        x1_names,
        x1,
        x2_names,
        x2,
        y_name,
        y,
    })
}
