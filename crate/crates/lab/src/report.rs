//! CSV and JSON report files.
//!
//! Every report kind is written to `<dir>/<kind>.<csv|json>` with a fixed
//! column order given by the row struct's field order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use warpell_core::ellwarp::{build_k1, build_k1_unsorted, build_k2, padding_difference_percentage};
use warpell_core::formats::{build_ell, build_hyb, default_hyb_width};
use warpell_core::kernel::default_threshold;
use warpell_core::{SparseCsr, WarpModelConfig};

use crate::alpha::AlphaRow;
use crate::bench::BenchRow;
use crate::error::{io_err, LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Padding of every padded format for one matrix and warp size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaddingRow {
    pub matrix: String,
    pub warp_size: usize,
    pub nrows: usize,
    pub nnz: usize,
    pub ell_padded: usize,
    pub hyb_padded: usize,
    pub k1_unsorted_padded: usize,
    pub k1_padded: usize,
    pub k2_threshold: usize,
    pub k2_padded: usize,
    /// Share of the unsorted warp padding removed by sorting, percent.
    pub padding_difference_pct: f64,
}

pub fn padding_row(name: &str, m: &SparseCsr, cfg: &WarpModelConfig) -> Result<PaddingRow> {
    let unsorted = build_k1_unsorted(m, cfg)?.padded_slots();
    let sorted = build_k1(m, cfg)?.padded_slots();
    let t = default_threshold(m);
    Ok(PaddingRow {
        matrix: name.to_string(),
        warp_size: cfg.warp_size,
        nrows: m.nrows(),
        nnz: m.nnz(),
        ell_padded: build_ell(m).padded_slots(),
        hyb_padded: build_hyb(m, default_hyb_width(m)).padded_slots(),
        k1_unsorted_padded: unsorted,
        k1_padded: sorted,
        k2_threshold: t,
        k2_padded: build_k2(m, cfg, t)?.padded_slots(),
        padding_difference_pct: padding_difference_percentage(unsorted, sorted),
    })
}

/// Number of rows of each length, with the matrix-wide extremes repeated
/// on every row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub matrix: String,
    pub row_length: usize,
    pub count: usize,
    pub minrow: usize,
    pub maxrow: usize,
}

pub fn row_histogram(name: &str, m: &SparseCsr) -> Vec<HistogramRow> {
    let (minrow, maxrow) = (m.min_row_len(), m.max_row_len());
    let mut counts = vec![0usize; maxrow + 1];
    for len in m.row_lengths() {
        counts[len] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(row_length, count)| HistogramRow {
            matrix: name.to_string(),
            row_length,
            count,
            minrow,
            maxrow,
        })
        .collect()
}

/// Seconds spent in one FEM phase, summed over the listed steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemTimingRow {
    pub kernel: String,
    pub steps: usize,
    pub phase: String,
    pub seconds: f64,
    /// Fraction of the step total; the rows of one run sum to 1.
    pub share: f64,
}

/// One report file's worth of rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Bandwidth(Vec<BenchRow>),
    Padding(Vec<PaddingRow>),
    Alpha(Vec<AlphaRow>),
    FemTiming(Vec<FemTimingRow>),
    Histogram(Vec<HistogramRow>),
}

impl Report {
    pub fn kind(&self) -> &'static str {
        match self {
            Report::Bandwidth(_) => "bandwidth",
            Report::Padding(_) => "padding",
            Report::Alpha(_) => "alpha",
            Report::FemTiming(_) => "fem_timing",
            Report::Histogram(_) => "histogram",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Report::Bandwidth(r) => r.len(),
            Report::Padding(r) => r.len(),
            Report::Alpha(r) => r.len(),
            Report::FemTiming(r) => r.len(),
            Report::Histogram(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn write_rows<T: Serialize>(rows: &[T], path: &Path, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(path)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush().map_err(io_err(path))?;
        }
        Format::Json => {
            let file = fs::File::create(path).map_err(io_err(path))?;
            serde_json::to_writer_pretty(std::io::BufWriter::new(file), rows)?;
        }
    }
    Ok(())
}

/// Writes `report` to `<dir>/<kind>.<ext>`, creating `dir` if needed.
/// Empty reports are rejected rather than written.
pub fn emit_report(report: &Report, dir: &Path, format: Format) -> Result<PathBuf> {
    if report.is_empty() {
        return Err(LabError::EmptyReport(report.kind().to_string()));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(format!("{}.{}", report.kind(), format.extension()));
    match report {
        Report::Bandwidth(r) => write_rows(r, &path, format)?,
        Report::Padding(r) => write_rows(r, &path, format)?,
        Report::Alpha(r) => write_rows(r, &path, format)?,
        Report::FemTiming(r) => write_rows(r, &path, format)?,
        Report::Histogram(r) => write_rows(r, &path, format)?,
    }
    Ok(path)
}

/// Writes several reports; fails before touching disk if any is empty.
pub fn emit_reports(reports: &[Report], dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(LabError::EmptyReport("report list".into()));
    }
    if let Some(r) = reports.iter().find(|r| r.is_empty()) {
        return Err(LabError::EmptyReport(r.kind().to_string()));
    }
    reports.iter().map(|r| emit_report(r, dir, format)).collect()
}

/// Reads rows back from a CSV or JSON report.
pub fn load_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    match Format::from_path(path) {
        Some(Format::Csv) => {
            let mut r = csv::Reader::from_path(path)?;
            Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
        }
        Some(Format::Json) => {
            let file = fs::File::open(path).map_err(io_err(path))?;
            Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
        }
        None => Err(LabError::Parse {
            line: 0,
            message: format!("{}: expected a .csv or .json report", path.display()),
        }),
    }
}
