//! Report emission: per-step backtest records rendered as CSV or JSON with
//! 12-significant-digit numbers and deterministic ordering, so identical
//! runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde::Deserialize;

use crate::backtest::BacktestRecord;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

/// 12 significant digits, scientific notation. Shared by both formats so
/// that CSV and JSON parse back to identical values.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Renders records as `t,mu_1..mu_n,value,drift,div_step,div_cum,residual`
/// (CSV) or an array of objects with the same keys (JSON).
pub fn render_report(records: &[BacktestRecord], format: ReportFormat) -> Result<String, CliError> {
    let first = records
        .first()
        .ok_or_else(|| CliError::Report("no records to emit".into()))?;
    let n = first.mu.len();
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push('t');
            for i in 1..=n {
                write!(out, ",mu_{i}").expect("string write");
            }
            out.push_str(",value,drift,div_step,div_cum,residual\n");
            for record in records {
                write!(out, "{}", record.t).expect("string write");
                for w in &record.mu {
                    write!(out, ",{}", fmt12(*w)).expect("string write");
                }
                writeln!(
                    out,
                    ",{},{},{},{},{}",
                    fmt12(record.value),
                    fmt12(record.drift),
                    fmt12(record.div_step),
                    fmt12(record.div_cum),
                    fmt12(record.residual)
                )
                .expect("string write");
            }
        }
        ReportFormat::Json => {
            out.push_str("[\n");
            for (i, record) in records.iter().enumerate() {
                write!(out, "{{\"t\":{}", record.t).expect("string write");
                for (j, w) in record.mu.iter().enumerate() {
                    write!(out, ",\"mu_{}\":{}", j + 1, fmt12(*w)).expect("string write");
                }
                write!(
                    out,
                    ",\"value\":{},\"drift\":{},\"div_step\":{},\"div_cum\":{},\"residual\":{}}}",
                    fmt12(record.value),
                    fmt12(record.drift),
                    fmt12(record.div_step),
                    fmt12(record.div_cum),
                    fmt12(record.residual)
                )
                .expect("string write");
                out.push_str(if i + 1 < records.len() { ",\n" } else { "\n" });
            }
            out.push_str("]\n");
        }
    }
    Ok(out)
}

/// Renders and writes a report file.
pub fn write_report(
    records: &[BacktestRecord],
    format: ReportFormat,
    path: &Path,
) -> Result<(), CliError> {
    let rendered = render_report(records, format)?;
    std::fs::write(path, rendered).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
