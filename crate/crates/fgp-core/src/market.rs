//! Simplex arithmetic, market paths, value processes and the self-financing
//! machinery.
//!
//! Market states are points of the open unit simplex; trading strategies are
//! share vectors rebalanced without capital injection or withdrawal. All
//! values are relative to the market portfolio, whose own relative value is
//! identically 1. Types are immutable after construction and every operation
//! is a pure function of its inputs.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

/// Post-construction tolerance on `|Σ weights − 1|`.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// Inputs whose weight sum is within this distance of 1 are renormalized
/// (with a warning); anything worse is rejected. CSV-derived weights carry
/// rounding noise, so construction cannot demand machine-exact sums.
pub const SIMPLEX_RENORM_TOL: f64 = 1e-9;

/// Tolerance on `|Σ components|` for tangent vectors.
pub const TANGENT_SUM_TOL: f64 = 1e-12;

/// Gap in `|Σ π_i − 1|` beyond which portfolio weights are reported as a
/// self-financing violation.
pub const WEIGHT_SUM_TOL: f64 = 1e-8;

/// Errors from simplex and value-process operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("component {index} must be strictly positive, got {value}")]
    NonPositiveComponent { index: usize, value: f64 },
    #[error("component {index} is not finite")]
    NonFiniteComponent { index: usize },
    #[error("weights sum to {sum}, more than {SIMPLEX_RENORM_TOL} away from 1")]
    NotOnSimplex { sum: f64 },
    #[error("tangent components sum to {sum}, expected 0 within {TANGENT_SUM_TOL}")]
    NotTangent { sum: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("path must contain at least one point")]
    EmptyPath,
    #[error("sequences must have equal length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("value must be nonzero")]
    ZeroValue,
    #[error("initial value must be strictly positive, got {0}")]
    NonPositiveInitialValue(f64),
    #[error("portfolio weights sum to {sum}: self-financing violation beyond {WEIGHT_SUM_TOL}")]
    SelfFinancingViolation { sum: f64 },
    #[error("weight vector at step {step} sums to {sum}, expected 1")]
    WeightSumInvalid { step: usize, sum: f64 },
}

/// A strictly positive weight vector summing to 1: a point of the open unit
/// simplex. Market and portfolio states live here.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    /// Builds a simplex point, renormalizing inputs whose sum is within
    /// [`SIMPLEX_RENORM_TOL`] of 1 and rejecting anything worse.
    pub fn new(weights: Vec<f64>) -> Result<Self, MarketError> {
        if weights.len() < 2 {
            return Err(MarketError::DimensionTooSmall(weights.len()));
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(MarketError::NonFiniteComponent { index });
            }
            if w <= 0.0 {
                return Err(MarketError::NonPositiveComponent { index, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        let gap = (sum - 1.0).abs();
        if gap > SIMPLEX_RENORM_TOL {
            return Err(MarketError::NotOnSimplex { sum });
        }
        let mut weights = weights;
        if gap > SIMPLEX_SUM_TOL {
            log::warn!("renormalizing weights whose sum is off by {:e}", sum - 1.0);
            for w in &mut weights {
                *w /= sum;
            }
        }
        Ok(Self { weights })
    }

    /// Market weights from strictly positive capitalizations:
    /// `weights[i] = caps[i] / Σ caps[j]`.
    pub fn from_caps(caps: &[f64]) -> Result<Self, MarketError> {
        if caps.len() < 2 {
            return Err(MarketError::DimensionTooSmall(caps.len()));
        }
        for (index, &c) in caps.iter().enumerate() {
            if !c.is_finite() {
                return Err(MarketError::NonFiniteComponent { index });
            }
            if c <= 0.0 {
                return Err(MarketError::NonPositiveComponent { index, value: c });
            }
        }
        let total: f64 = caps.iter().sum();
        Ok(Self {
            weights: caps.iter().map(|c| c / total).collect(),
        })
    }

    /// The barycenter `(1/n, …, 1/n)`.
    pub fn barycenter(n: usize) -> Self {
        assert!(n >= 2, "simplex dimension must be at least 2");
        Self {
            weights: alloc::vec![1.0 / n as f64; n],
        }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Minimum component; strictly positive by construction.
    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl AsRef<[f64]> for SimplexPoint {
    fn as_ref(&self) -> &[f64] {
        &self.weights
    }
}

/// A vector tangent to the simplex: components sum to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    components: Vec<f64>,
}

impl TangentVector {
    pub fn new(components: Vec<f64>) -> Result<Self, MarketError> {
        let sum: f64 = components.iter().sum();
        if sum.abs() > TANGENT_SUM_TOL {
            return Err(MarketError::NotTangent { sum });
        }
        Ok(Self { components })
    }

    /// The displacement `to − from` between two simplex points.
    pub fn from_difference(to: &SimplexPoint, from: &SimplexPoint) -> Result<Self, MarketError> {
        check_dims(to.n(), from.n())?;
        Ok(Self {
            components: to
                .weights()
                .iter()
                .zip(from.weights())
                .map(|(t, f)| t - f)
                .collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }
}

impl AsRef<[f64]> for TangentVector {
    fn as_ref(&self) -> &[f64] {
        &self.components
    }
}

/// A finite sequence of simplex points of uniform dimension, indexed by
/// integer time `0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPath {
    points: Vec<SimplexPoint>,
}

impl MarketPath {
    pub fn new(points: Vec<SimplexPoint>) -> Result<Self, MarketError> {
        let first = points.first().ok_or(MarketError::EmptyPath)?;
        let n = first.n();
        for p in &points {
            check_dims(p.n(), n)?;
        }
        Ok(Self { points })
    }

    /// Number of points (`T + 1`).
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one point
    }

    /// Number of steps (`T`).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn n(&self) -> usize {
        self.points[0].n()
    }

    pub fn point(&self, t: usize) -> &SimplexPoint {
        &self.points[t]
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }
}

/// Numbers of shares held in each stock; components may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareVector {
    shares: Vec<f64>,
}

impl ShareVector {
    pub fn new(shares: Vec<f64>) -> Result<Self, MarketError> {
        for (index, &s) in shares.iter().enumerate() {
            if !s.is_finite() {
                return Err(MarketError::NonFiniteComponent { index });
            }
        }
        Ok(Self { shares })
    }

    pub fn n(&self) -> usize {
        self.shares.len()
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn get(&self, i: usize) -> f64 {
        self.shares[i]
    }

    /// Euclidean inner product with an arbitrary slice.
    pub fn dot(&self, other: &[f64]) -> f64 {
        self.shares.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}

impl AsRef<[f64]> for ShareVector {
    fn as_ref(&self) -> &[f64] {
        &self.shares
    }
}

/// Relative value of a strategy over time (market-portfolio numeraire).
/// No sign constraint: long-short strategies may go negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSeries {
    values: Vec<f64>,
}

impl ValueSeries {
    pub fn new(initial: f64) -> Self {
        Self {
            values: alloc::vec![initial],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "value series cannot be empty");
        Self { values }
    }

    pub fn push(&mut self, value: f64) {
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, t: usize) -> f64 {
        self.values[t]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("nonempty by construction")
    }
}

fn check_dims(left: usize, right: usize) -> Result<(), MarketError> {
    if left != right {
        return Err(MarketError::DimensionMismatch { left, right });
    }
    Ok(())
}

/// One step of the additive value recursion:
/// `v_next = v_now + η · (μ_next − μ_now)`.
pub fn value_step(
    eta: &ShareVector,
    mu_now: &SimplexPoint,
    mu_next: &SimplexPoint,
    v_now: f64,
) -> Result<f64, MarketError> {
    check_dims(eta.n(), mu_now.n())?;
    check_dims(mu_now.n(), mu_next.n())?;
    let gain: f64 = eta
        .shares()
        .iter()
        .zip(mu_now.weights().iter().zip(mu_next.weights()))
        .map(|(e, (now, next))| e * (next - now))
        .sum();
    Ok(v_now + gain)
}

/// Portfolio weights implied by a share vector: `π_i = η_i μ_i / v`.
///
/// Components may be negative (long-short). The weights sum to 1 exactly when
/// `η · μ = v`; a gap beyond [`WEIGHT_SUM_TOL`] is reported as a
/// self-financing violation.
pub fn weights_from_strategy(
    eta: &ShareVector,
    mu: &SimplexPoint,
    v: f64,
) -> Result<Vec<f64>, MarketError> {
    check_dims(eta.n(), mu.n())?;
    if v == 0.0 {
        return Err(MarketError::ZeroValue);
    }
    let weights: Vec<f64> = eta
        .shares()
        .iter()
        .zip(mu.weights())
        .map(|(e, m)| e * m / v)
        .collect();
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(MarketError::SelfFinancingViolation { sum });
    }
    Ok(weights)
}

/// Multiplicative value series along a path with given per-step weight
/// vectors, flagging the first step at which the value stops being positive.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativeValue {
    pub series: ValueSeries,
    /// Index `t` of the first value `V(t) ≤ 0`, if any. Later values remain
    /// computable but weights-from-value are meaningless from here on.
    pub first_nonpositive: Option<usize>,
}

/// Value process in product form:
/// `V(t) = v0 · Π_s ( π(s) · (μ(s+1)/μ(s)) )` with componentwise ratios.
///
/// Agrees with the additive recursion of [`value_step`] whenever both are
/// defined. Requires one weight vector per step (`path.steps()` of them),
/// each summing to 1.
pub fn value_multiplicative(
    path: &MarketPath,
    weight_sequence: &[Vec<f64>],
    v0: f64,
) -> Result<MultiplicativeValue, MarketError> {
    if v0 <= 0.0 {
        return Err(MarketError::NonPositiveInitialValue(v0));
    }
    if weight_sequence.len() != path.steps() {
        return Err(MarketError::LengthMismatch {
            left: weight_sequence.len(),
            right: path.steps(),
        });
    }
    let mut series = ValueSeries::new(v0);
    let mut first_nonpositive = None;
    let mut value = v0;
    for (s, weights) in weight_sequence.iter().enumerate() {
        check_dims(weights.len(), path.n())?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(MarketError::WeightSumInvalid { step: s, sum });
        }
        let factor: f64 = weights
            .iter()
            .zip(path.point(s).weights().iter().zip(path.point(s + 1).weights()))
            .map(|(w, (now, next))| w * next / now)
            .sum();
        value *= factor;
        if value <= 0.0 && first_nonpositive.is_none() {
            first_nonpositive = Some(s + 1);
        }
        series.push(value);
    }
    Ok(MultiplicativeValue {
        series,
        first_nonpositive,
    })
}

/// Corrects a raw share sequence for its defect of self-financibility:
/// `η_i(t) = η̃_i(t) − Q^{η̃}(t) − C`, where
/// `Q^{η̃}(t) = η̃(t)·μ(t) − η̃(0)·μ(0) − Σ_{s<t} η̃(s)·(μ(s+1) − μ(s))`.
///
/// The output satisfies the self-financing identity at every step while
/// leaving the per-step returns unchanged.
pub fn self_financing_correction(
    raw_shares: &[ShareVector],
    path: &MarketPath,
    c: f64,
) -> Result<Vec<ShareVector>, MarketError> {
    if raw_shares.len() != path.len() {
        return Err(MarketError::LengthMismatch {
            left: raw_shares.len(),
            right: path.len(),
        });
    }
    let n = path.n();
    for eta in raw_shares {
        check_dims(eta.n(), n)?;
    }
    let initial_book = raw_shares[0].dot(path.point(0).weights());
    let mut accumulated_gains = 0.0;
    let mut corrected = Vec::with_capacity(raw_shares.len());
    for (t, eta) in raw_shares.iter().enumerate() {
        let defect = eta.dot(path.point(t).weights()) - initial_book - accumulated_gains;
        let shift = defect + c;
        let shares: Vec<f64> = eta.shares().iter().map(|e| e - shift).collect();
        corrected.push(ShareVector::new(shares)?);
        if t + 1 < path.len() {
            let gain: f64 = eta
                .shares()
                .iter()
                .zip(path.point(t).weights().iter().zip(path.point(t + 1).weights()))
                .map(|(e, (now, next))| e * (next - now))
                .sum();
            accumulated_gains += gain;
        }
    }
    Ok(corrected)
}

/// Maximum absolute violation of the self-financing identity:
/// `max_t | η(t)·μ(t+1) − η(t+1)·μ(t+1) |`.
pub fn check_self_financing(
    shares: &[ShareVector],
    path: &MarketPath,
) -> Result<f64, MarketError> {
    if shares.len() != path.len() {
        return Err(MarketError::LengthMismatch {
            left: shares.len(),
            right: path.len(),
        });
    }
    let n = path.n();
    for eta in shares {
        check_dims(eta.n(), n)?;
    }
    let mut worst = 0.0f64;
    for t in 0..path.steps() {
        let mu_next = path.point(t + 1).weights();
        let gap = (shares[t].dot(mu_next) - shares[t + 1].dot(mu_next)).abs();
        worst = worst.max(gap);
    }
    Ok(worst)
}
