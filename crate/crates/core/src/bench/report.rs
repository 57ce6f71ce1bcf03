//! Report files.
//!
//! `records.csv` columns: `dataset_id, method, alpha, s, init_seed,
//! em_seed, nll_initial, nll_final, resamples, mixes, keeps, millis`.
//! `method` is the kind identifier (`uniform`, `kmeans++`, `adaptive`,
//! `agglomerative`, `gonzalez`, `gonzalez-for-gmm`, `kwedlos-gonzalez`);
//! `alpha` and `s` are empty when the method takes no such parameter.
//!
//! `rank_tables.csv` columns: `method, criterion, rank_1, …, rank_M`, one
//! row per (criterion, method), criteria in the order mean_initial,
//! mean_final, var_initial, var_final.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::{MethodKind, MethodSpec};

use super::{FailedCell, RankTable, RunRecord, Summary};

pub const RECORD_COLUMNS: [&str; 12] = [
    "dataset_id",
    "method",
    "alpha",
    "s",
    "init_seed",
    "em_seed",
    "nll_initial",
    "nll_final",
    "resamples",
    "mixes",
    "keeps",
    "millis",
];

/// Flat form of a [`RunRecord`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub dataset_id: String,
    pub method: String,
    pub alpha: Option<f64>,
    pub s: Option<f64>,
    pub init_seed: u64,
    pub em_seed: u64,
    pub nll_initial: f64,
    pub nll_final: f64,
    pub resamples: usize,
    pub mixes: usize,
    pub keeps: usize,
    pub millis: u64,
}

impl From<&RunRecord> for RecordRow {
    fn from(r: &RunRecord) -> Self {
        RecordRow {
            dataset_id: r.dataset_id.clone(),
            method: r.method.kind().id().to_string(),
            alpha: r.method.alpha(),
            s: r.method.sample_fraction(),
            init_seed: r.init_seed,
            em_seed: r.em_seed,
            nll_initial: r.nll_initial,
            nll_final: r.nll_final,
            resamples: r.resamples,
            mixes: r.mixes,
            keeps: r.keeps,
            millis: r.millis,
        }
    }
}

impl TryFrom<RecordRow> for RunRecord {
    type Error = Error;

    fn try_from(row: RecordRow) -> Result<Self> {
        let kind = MethodKind::from_id(&row.method)
            .ok_or_else(|| Error::invalid(format!("unknown method '{}'", row.method)))?;
        Ok(RunRecord {
            dataset_id: row.dataset_id,
            method: MethodSpec::from_parts(kind, row.alpha, row.s)?,
            init_seed: row.init_seed,
            em_seed: row.em_seed,
            nll_initial: row.nll_initial,
            nll_final: row.nll_final,
            resamples: row.resamples,
            mixes: row.mixes,
            keeps: row.keeps,
            millis: row.millis,
        })
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().has_headers(false).from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

pub fn write_records_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(RECORD_COLUMNS).map_err(|e| csv_err(path, e))?;
    for r in records {
        w.serialize(RecordRow::from(r)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<RecordRow>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        out.push(RunRecord::try_from(row).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_rank_tables_csv(path: &Path, tables: &[RankTable]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let m = tables.first().map_or(0, |t| t.methods.len());
    let mut header = vec!["method".to_string(), "criterion".to_string()];
    header.extend((1..=m).map(|r| format!("rank_{r}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for t in tables {
        for (method, counts) in t.methods.iter().zip(&t.counts) {
            let mut row = vec![method.label(), t.criterion.id().to_string()];
            row.extend(counts.iter().map(|c| c.to_string()));
            w.write_record(&row).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summaries_csv(path: &Path, summaries: &[Summary]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "dataset_id",
        "method",
        "count",
        "mean_initial",
        "var_initial",
        "mean_final",
        "var_final",
    ])
    .map_err(|e| csv_err(path, e))?;
    for s in summaries {
        w.write_record([
            s.dataset_id.clone(),
            s.method.label(),
            s.count.to_string(),
            s.mean_initial.to_string(),
            s.var_initial.to_string(),
            s.mean_final.to_string(),
            s.var_final.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_failures_csv(path: &Path, failures: &[FailedCell]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["dataset_id", "method", "init_seed", "message"])
        .map_err(|e| csv_err(path, e))?;
    for f in failures {
        w.write_record([
            f.dataset_id.clone(),
            f.method.label(),
            f.init_seed.to_string(),
            f.message.clone(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    /// One JSON document with records and tables.
    Json,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    criterion: &'a str,
    datasets: usize,
    rows: Vec<JsonRow>,
}

#[derive(Serialize)]
struct JsonRow {
    method: String,
    counts: Vec<usize>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    rank_tables: Vec<JsonTable<'a>>,
    records: Vec<RecordRow>,
}

/// Writes rank tables and raw records into `dir`; returns the written
/// paths.
pub fn export_report(
    dir: &Path,
    tables: &[RankTable],
    records: &[RunRecord],
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match format {
        ReportFormat::Csv => {
            let records_path = dir.join("records.csv");
            let tables_path = dir.join("rank_tables.csv");
            write_records_csv(&records_path, records)?;
            write_rank_tables_csv(&tables_path, tables)?;
            Ok(vec![records_path, tables_path])
        }
        ReportFormat::Json => {
            let path = dir.join("report.json");
            let report = JsonReport {
                rank_tables: tables
                    .iter()
                    .map(|t| JsonTable {
                        criterion: t.criterion.id(),
                        datasets: t.datasets,
                        rows: t
                            .methods
                            .iter()
                            .zip(&t.counts)
                            .map(|(m, c)| JsonRow {
                                method: m.label(),
                                counts: c.clone(),
                            })
                            .collect(),
                    })
                    .collect(),
                records: records.iter().map(RecordRow::from).collect(),
            };
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
            Ok(vec![path])
        }
    }
}
