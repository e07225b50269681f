//! Command-line layer for functionally generated portfolio backtests:
//! CSV ingestion, configuration, report emission, alpha sweeps and the
//! numerical verification suite.

pub mod backtest;
pub mod config;
pub mod ingest;
pub mod report;
pub mod sample_data;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced to the CLI. Everything here maps to exit code 1
/// (validation/parse); verification failures are reported separately and
/// exit with code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid data: {0}")]
    Data(String),
    #[error("report error: {0}")]
    Report(String),
    #[error(transparent)]
    Market(#[from] fgp_core::MarketError),
    #[error(transparent)]
    GenFun(#[from] fgp_core::GenFunError),
    #[error(transparent)]
    Strategy(#[from] fgp_core::StrategyError),
}
