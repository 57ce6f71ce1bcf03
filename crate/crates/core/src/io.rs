//! Data set CSV and mixture JSON files.
//!
//! Data sets are plain comma-separated numeric rows. A first row that does
//! not parse as numbers is treated as a header. Columns listed in
//! `exclude_columns` (0-based) are dropped, e.g. a label column.
//!
//! Mixtures are JSON objects `{"weights": [..], "means": [[..]],
//! "covariances": [[..]]}` with each covariance flattened row-major.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::core_math::{DataMatrix, GmmParams, MixtureFile};
use crate::datagen::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct CsvOptions {
    pub exclude_columns: Vec<usize>,
}

pub fn read_data_csv(path: &Path, opts: &CsvOptions) -> Result<DataMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(idx as u64 + 1, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let kept: Vec<&str> = record
            .iter()
            .enumerate()
            .filter(|(c, _)| !opts.exclude_columns.contains(c))
            .map(|(_, f)| f)
            .collect();
        let parsed: std::result::Result<Vec<f64>, _> = kept.iter().map(|f| f.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if width.is_none() && values.is_empty() && idx == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("non-numeric field: {e}"),
                })
            }
        };
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("non-finite value {v}"),
            });
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("expected {w} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        values.extend(row);
    }
    let d = width.ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        message: "no data rows".into(),
    })?;
    DataMatrix::from_row_major(d, values).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes one row per point, no header; with `with_labels` a last column
/// holds the component index (`-1` for noise).
pub fn write_dataset_csv(path: &Path, set: &LabeledDataset, with_labels: bool) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        for (row, label) in set.data.rows().zip(&set.labels) {
            let mut first = true;
            for v in row {
                if !first {
                    out.write_all(b",")?;
                }
                first = false;
                write!(out, "{v}")?;
            }
            if with_labels {
                write!(out, ",{}", label.as_i64())?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

pub fn write_mixture_json(path: &Path, theta: &GmmParams) -> Result<()> {
    let text = serde_json::to_string_pretty(&MixtureFile::from(theta)).expect("plain data serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_mixture_json(path: &Path) -> Result<GmmParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: MixtureFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    GmmParams::try_from(file).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
