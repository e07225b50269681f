//! Bundled synthetic dataset: 333 monthly rows of three strictly positive
//! capitalizations following a seed-fixed geometric random walk. Shipped at
//! `data/sample_prices.csv`; the only contractual properties are its shape
//! and strict positivity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const SAMPLE_SEED: u64 = 19_900_132;
pub const SAMPLE_ROWS: usize = 333;
pub const SAMPLE_ASSETS: [&str; 3] = ["alpha_motors", "beta_retail", "gamma_systems"];

/// Monthly labels from 1990-01 through 2017-09.
pub fn month_labels() -> Vec<String> {
    (0..SAMPLE_ROWS)
        .map(|i| format!("{}-{:02}", 1990 + i / 12, 1 + i % 12))
        .collect()
}

/// The raw capitalization rows (333 x 3), deterministic in [`SAMPLE_SEED`].
pub fn sample_rows() -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let drifts = [0.0015, 0.0045, 0.0030];
    let vols = [0.11, 0.07, 0.09];
    let mut prices = [31.0f64, 47.0, 92.0];
    let mut rows = Vec::with_capacity(SAMPLE_ROWS);
    for _ in 0..SAMPLE_ROWS {
        rows.push(prices.to_vec());
        for (price, (drift, vol)) in prices.iter_mut().zip(drifts.iter().zip(&vols)) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *price *= (drift + vol * z).exp();
        }
    }
    rows
}

/// The dataset rendered exactly as shipped (6 decimal places).
pub fn sample_csv() -> String {
    let labels = month_labels();
    let mut out = String::from("date,");
    out.push_str(&SAMPLE_ASSETS.join(","));
    out.push('\n');
    for (label, row) in labels.iter().zip(sample_rows()) {
        out.push_str(label);
        for price in row {
            out.push_str(&format!(",{price:.6}"));
        }
        out.push('\n');
    }
    out
}
