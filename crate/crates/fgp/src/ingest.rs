//! CSV price ingestion and the barycenter normalization.
//!
//! Expected layout: a header row whose first column holds the date-label
//! name and whose remaining columns name the assets, followed by one row
//! per period with a date label and strictly positive decimal prices.
//! Dates are opaque labels; no calendar arithmetic happens here.

use std::path::Path;

use fgp_core::market::{MarketPath, SimplexPoint};

use crate::CliError;

/// Rectangular table of strictly positive prices (or capitalizations),
/// one row per period, one column per asset.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub dates: Vec<String>,
    pub assets: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl PriceTable {
    pub fn new(
        dates: Vec<String>,
        assets: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, CliError> {
        if assets.len() < 2 {
            return Err(CliError::Data(format!(
                "need at least 2 assets, got {}",
                assets.len()
            )));
        }
        if rows.len() < 2 {
            return Err(CliError::Data(format!(
                "need at least 2 rows, got {}",
                rows.len()
            )));
        }
        if dates.len() != rows.len() {
            return Err(CliError::Data(format!(
                "{} dates for {} rows",
                dates.len(),
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != assets.len() {
                return Err(CliError::Data(format!(
                    "row {} has {} columns, expected {}",
                    i + 1,
                    row.len(),
                    assets.len()
                )));
            }
            for (j, &price) in row.iter().enumerate() {
                if !(price > 0.0 && price.is_finite()) {
                    return Err(CliError::Data(format!(
                        "nonpositive price {price} at row {} column '{}'",
                        i + 1,
                        assets[j]
                    )));
                }
            }
        }
        Ok(Self {
            dates,
            assets,
            rows,
        })
    }

    /// Number of periods.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of assets.
    pub fn n(&self) -> usize {
        self.assets.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Market-weight path: each row normalized by its total capitalization.
    pub fn market_path(&self) -> Result<MarketPath, CliError> {
        let points = self
            .rows
            .iter()
            .map(|row| SimplexPoint::from_caps(row))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MarketPath::new(points)?)
    }
}

/// Parses a price CSV. Reports the parsed shape via the returned table;
/// nonpositive prices and ragged rows are rejected with the offending
/// row/column named.
pub fn ingest_csv(path: &Path) -> Result<PriceTable, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .clone();
    if headers.len() < 3 {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            message: format!(
                "header must name a date column and at least 2 assets, got {} columns",
                headers.len()
            ),
        });
    }
    let assets: Vec<String> = headers.iter().skip(1).map(|s| s.trim().to_string()).collect();
    let mut dates = Vec::new();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: format!("row {}: {}", i + 1, e),
        })?;
        let mut fields = record.iter();
        let date = fields
            .next()
            .ok_or_else(|| CliError::Parse {
                path: path.to_path_buf(),
                message: format!("row {} is empty", i + 1),
            })?
            .trim()
            .to_string();
        let mut row = Vec::with_capacity(assets.len());
        for (j, field) in fields.enumerate() {
            let price: f64 = field.trim().parse().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                message: format!(
                    "row {} column '{}': cannot parse '{}' as a number",
                    i + 1,
                    assets[j],
                    field
                ),
            })?;
            if !(price > 0.0 && price.is_finite()) {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    message: format!(
                        "row {} column '{}': price must be strictly positive, got {}",
                        i + 1,
                        assets[j],
                        price
                    ),
                });
            }
            row.push(price);
        }
        dates.push(date);
        rows.push(row);
    }
    let table = PriceTable::new(dates, assets, rows)?;
    log::info!(
        "ingested {} rows x {} assets ({})",
        table.len(),
        table.n(),
        table.assets.join(", ")
    );
    Ok(table)
}

/// Rescales each asset column so the first row carries equal market weights
/// `(1/n, …, 1/n)`; later weights change only through the common scaling.
pub fn normalize_to_barycenter(table: &PriceTable) -> PriceTable {
    let n = table.n() as f64;
    let first = &table.rows()[0];
    let total: f64 = first.iter().sum();
    let scales: Vec<f64> = first.iter().map(|p| total / (n * p)).collect();
    let rows: Vec<Vec<f64>> = table
        .rows()
        .iter()
        .map(|row| row.iter().zip(&scales).map(|(p, s)| p * s).collect())
        .collect();
    PriceTable::new(table.dates.clone(), table.assets.clone(), rows)
        .expect("scaling by positive constants preserves validity")
}
