//! Backtest execution: market path from a price table, strategy run plus
//! decomposition, per-step records, and the alpha sweep.

use fgp_core::genfun::GeneratingFunction;
use fgp_core::strategy::{decompose, DecompositionReport, GenerationScheme};

use crate::ingest::PriceTable;
use crate::CliError;

/// One row of a backtest report.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestRecord {
    pub t: usize,
    pub mu: Vec<f64>,
    pub value: f64,
    /// `φ(μ(t)) − φ(μ(0))`.
    pub drift: f64,
    /// Divergence of the step into `t` (0 at `t = 0`).
    pub div_step: f64,
    pub div_cum: f64,
    /// `|g(V(t)) − g(V(0)) − drift − div_cum|`.
    pub residual: f64,
}

fn records_from_report(
    report: &DecompositionReport,
    table: &PriceTable,
) -> Vec<BacktestRecord> {
    let path = table
        .market_path()
        .expect("table validated at construction");
    (0..report.lhs.len())
        .map(|t| BacktestRecord {
            t,
            mu: path.point(t).weights().to_vec(),
            value: report.values.get(t),
            drift: report.drift[t],
            div_step: if t == 0 {
                0.0
            } else {
                report.divergence_increments[t - 1]
            },
            div_cum: report.cumulative_divergence[t],
            residual: (report.lhs[t] - report.drift[t] - report.cumulative_divergence[t]).abs(),
        })
        .collect()
}

/// Runs one scheme over the table and emits per-step records. A truncated
/// decomposition (value left the scale function's domain) yields records up
/// to the truncation point, with a warning.
pub fn run_backtest(
    phi: &dyn GeneratingFunction,
    scheme: &GenerationScheme,
    table: &PriceTable,
) -> Result<Vec<BacktestRecord>, CliError> {
    let path = table.market_path()?;
    let report = decompose(phi, scheme, &path)?;
    match report.truncated_at {
        Some(0) => {
            return Err(CliError::Data(
                "initial value is outside the scheme's admissible domain; nothing to report"
                    .into(),
            ))
        }
        Some(t) => {
            log::warn!("decomposition truncated at step {t}: value left the admissible domain")
        }
        None => {}
    }
    Ok(records_from_report(&report, table))
}

/// One series of the alpha sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries {
    pub label: String,
    pub records: Vec<BacktestRecord>,
}

/// Runs the `(α, 1/α)` family for each α (α = 0 dispatches to the additive
/// scheme), plus the multiplicatively generated reference `(α, C) = (1, 0)`.
pub fn run_sweep(
    phi: &dyn GeneratingFunction,
    alphas: &[f64],
    v0: f64,
    table: &PriceTable,
) -> Result<Vec<SweepSeries>, CliError> {
    let mut series = Vec::with_capacity(alphas.len() + 1);
    for &alpha in alphas {
        if alpha < 0.0 {
            return Err(CliError::Config(format!(
                "sweep alphas must be nonnegative, got {alpha}"
            )));
        }
        let scheme = if alpha == 0.0 {
            GenerationScheme::additive(v0)
        } else {
            GenerationScheme::alpha_c(alpha, 1.0 / alpha, v0)?
        };
        series.push(SweepSeries {
            label: format!("alpha_{alpha}"),
            records: run_backtest(phi, &scheme, table)?,
        });
    }
    let reference = GenerationScheme::multiplicative(v0)?;
    series.push(SweepSeries {
        label: "reference".into(),
        records: run_backtest(phi, &reference, table)?,
    });
    Ok(series)
}
