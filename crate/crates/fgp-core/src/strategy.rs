//! Construction and execution of functionally generated trading strategies,
//! and their pathwise value decompositions.
//!
//! Three generation schemes share one share formula,
//! `η_i(t) = α (C + V(t)) D_{e_i−μ(t)} φ(μ(t)) + V(t)`:
//! the `(α, C)` family directly, the multiplicative scheme as its `(1, 0)`
//! point, and the additive scheme as the `α = 1/C → 0` limit
//! (`η_i = D_{e_i−μ} φ(μ) + V`). Every generated sequence is self-financing,
//! and the value transforms under the scheme's scale function into a drift
//! plus an accumulated divergence:
//!
//! - multiplicative: `log V(t) − log V(0) = Δφ + Σ D_L`
//! - additive:       `V(t) − V(0)         = Δφ + Σ D_B`
//! - `(α, C)`:       `(1/α) log((C+V(t))/(C+V(0))) = Δφ + Σ D_{L^(α)}`

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::divergence::{self, DivergenceKind};
use crate::genfun::{directional_derivatives, GeneratingFunction, Scaled};
use crate::market::{value_step, MarketError, MarketPath, ShareVector, SimplexPoint, ValueSeries};

/// Multiplicative-map components below this are treated as exponential
/// concavity violations (the map should land in the closed simplex).
pub const MAP_NEGATIVITY_TOL: f64 = 1e-10;

/// Weight-sum consistency required of the portfolio maps.
pub const MAP_SUM_TOL: f64 = 1e-12;

/// One-step log arguments `1 + α ∇φ·Δμ` must exceed this or the
/// decomposition step errors out.
pub const LOG_ARG_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("market error: {0}")]
    Market(#[from] MarketError),
    #[error("divergence error: {0}")]
    Divergence(#[from] divergence::DivergenceError),
    #[error("alpha must be strictly positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("offset C must be nonnegative, got {0}")]
    NegativeC(f64),
    #[error("multiplicative generation requires a positive initial value, got {0}")]
    NonPositiveInitialValue(f64),
    #[error("alpha {alpha} exceeds the declared concavity bound {max}")]
    AlphaOutOfRange { alpha: f64, max: f64 },
    #[error(
        "portfolio map component {index} is {value}, below -{MAP_NEGATIVITY_TOL}: \
         generating function is not exponentially concave at this point"
    )]
    MapNegativeWeight { index: usize, value: f64 },
    #[error("tangent plane is degenerate: Σ c_i p_i = {0} is not positive")]
    DegenerateTangent(f64),
    #[error("multiplicative value became nonpositive ({value}) at step {step}: weights undefined")]
    NonPositiveValue { step: usize, value: f64 },
    #[error(
        "log argument {arg} at step {step} is below {LOG_ARG_FLOOR}: \
         generating function is not exponentially concave along this step"
    )]
    LogArgumentTooSmall { step: usize, arg: f64 },
    #[error("value must be nonzero to form portfolio weights")]
    ZeroValue,
}

/// Which generation scheme to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeKind {
    /// Weight ratios from an exponentially concave `φ`; executed as the
    /// `(1, 0)` point of the `(α, C)` family.
    Multiplicative,
    /// Shares from the gradient of a concave `φ` plus the current value.
    Additive,
    /// The two-parameter family, `α > 0`, `C ≥ 0`.
    AlphaC { alpha: f64, c: f64 },
}

impl SchemeKind {
    /// Divergence functional entering this scheme's decomposition.
    pub fn divergence_kind(&self) -> DivergenceKind {
        match self {
            SchemeKind::Multiplicative => DivergenceKind::L,
            SchemeKind::Additive => DivergenceKind::Bregman,
            SchemeKind::AlphaC { alpha, .. } => DivergenceKind::LAlpha(*alpha),
        }
    }

    /// Scale function `g` applied to the value in the decomposition.
    pub fn scale(&self, v: f64) -> f64 {
        match self {
            SchemeKind::Multiplicative => v.ln(),
            SchemeKind::Additive => v,
            SchemeKind::AlphaC { alpha, c } => (c + v).ln() / alpha,
        }
    }

    /// Whether `g` is defined at value `v`.
    pub fn scale_defined_at(&self, v: f64) -> bool {
        match self {
            SchemeKind::Multiplicative => v > 0.0,
            SchemeKind::Additive => true,
            SchemeKind::AlphaC { c, .. } => v > -c,
        }
    }
}

/// A generation scheme with its initial relative value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationScheme {
    pub kind: SchemeKind,
    pub v0: f64,
}

impl GenerationScheme {
    pub fn multiplicative(v0: f64) -> Result<Self, StrategyError> {
        if v0.is_nan() || v0 <= 0.0 {
            return Err(StrategyError::NonPositiveInitialValue(v0));
        }
        Ok(Self {
            kind: SchemeKind::Multiplicative,
            v0,
        })
    }

    pub fn additive(v0: f64) -> Self {
        Self {
            kind: SchemeKind::Additive,
            v0,
        }
    }

    pub fn alpha_c(alpha: f64, c: f64, v0: f64) -> Result<Self, StrategyError> {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(StrategyError::NonPositiveAlpha(alpha));
        }
        if c.is_nan() || c < 0.0 {
            return Err(StrategyError::NegativeC(c));
        }
        Ok(Self {
            kind: SchemeKind::AlphaC { alpha, c },
            v0,
        })
    }

    /// Checks `φ` against this scheme's concavity requirements.
    pub fn validate_for(&self, phi: &dyn GeneratingFunction) -> Result<(), StrategyError> {
        let required = match self.kind {
            SchemeKind::Multiplicative => 1.0,
            SchemeKind::Additive => return Ok(()), // concavity of φ itself is assumed
            SchemeKind::AlphaC { alpha, .. } => alpha,
        };
        if required > phi.alpha_max() {
            return Err(StrategyError::AlphaOutOfRange {
                alpha: required,
                max: phi.alpha_max(),
            });
        }
        Ok(())
    }
}

/// Strategy snapshot at one time index.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyState {
    pub eta: ShareVector,
    pub value: f64,
    pub time: usize,
}

/// A full run: one state per path point plus the value series.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRun {
    pub states: Vec<StrategyState>,
    pub values: ValueSeries,
}

/// Pathwise decomposition of a run, per time index `t`:
/// `lhs[t] = g(V(t)) − g(V(0))`, `drift[t] = φ(μ(t)) − φ(μ(0))`,
/// cumulative divergence, and the worst residual `|lhs − drift − cumdiv|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub lhs: Vec<f64>,
    pub drift: Vec<f64>,
    /// `D[μ(s+1) : μ(s)]` for each executed step `s`.
    pub divergence_increments: Vec<f64>,
    pub cumulative_divergence: Vec<f64>,
    /// `max_t |lhs[t] − drift[t] − cumdiv[t]|` over the reported range.
    pub residual: f64,
    /// Value series of the underlying run (one entry per path point).
    pub values: ValueSeries,
    /// First time index at which the scale function was undefined
    /// (`V ≤ −C` for the `(α, C)` family); the report stops there.
    pub truncated_at: Option<usize>,
}

/// Portfolio map of the multiplicative scheme:
/// `π_i(p) = p_i (1 + D_{e_i − p} φ(p))`, landing in the closed simplex.
pub fn multiplicative_portfolio_map(
    phi: &dyn GeneratingFunction,
    p: &SimplexPoint,
) -> Result<Vec<f64>, StrategyError> {
    let derivatives = directional_derivatives(phi, p);
    let mut weights = Vec::with_capacity(p.n());
    for (index, (&w, &d)) in p.weights().iter().zip(&derivatives).enumerate() {
        let value = w * (1.0 + d);
        if value < -MAP_NEGATIVITY_TOL {
            return Err(StrategyError::MapNegativeWeight { index, value });
        }
        weights.push(value);
    }
    debug_assert!(
        (weights.iter().sum::<f64>() - 1.0).abs() <= MAP_SUM_TOL,
        "portfolio map must sum to 1"
    );
    Ok(weights)
}

/// The same map computed from the tangent hyperplane of `Φ = e^φ` at `p`:
/// with `c_i = ∂_i Φ(p) + Φ(p) − ∇Φ(p)·p`, returns `c_i p_i / Σ_j c_j p_j`.
/// The weight ratio `π_i / p_i` is proportional to `c_i`. Agrees with
/// [`multiplicative_portfolio_map`] to machine precision; kept as an
/// independent algebraic route.
pub fn multiplicative_map_via_tangent_plane(
    phi: &dyn GeneratingFunction,
    p: &SimplexPoint,
) -> Result<Vec<f64>, StrategyError> {
    let w = p.weights();
    let big_phi = phi.eval(w).exp();
    let grad = phi.gradient(w);
    let grad_dot_p: f64 = grad.iter().zip(w).map(|(g, x)| g * x).sum();
    // ∂_i Φ = Φ ∂_i φ, ∇Φ·p = Φ ∇φ·p
    let coefficients: Vec<f64> = grad
        .iter()
        .map(|g| big_phi * g + big_phi - big_phi * grad_dot_p)
        .collect();
    let denominator: f64 = coefficients.iter().zip(w).map(|(c, x)| c * x).sum();
    if denominator <= 0.0 {
        return Err(StrategyError::DegenerateTangent(denominator));
    }
    Ok(coefficients
        .iter()
        .zip(w)
        .map(|(c, x)| c * x / denominator)
        .collect())
}

/// Shares of the additive scheme: `η_i = D_{e_i − μ} φ(μ) + v`.
pub fn additive_shares(phi: &dyn GeneratingFunction, mu: &SimplexPoint, v: f64) -> ShareVector {
    let derivatives = directional_derivatives(phi, mu);
    ShareVector::new(derivatives.iter().map(|d| d + v).collect())
        .expect("finite derivatives and value")
}

/// Shares of the `(α, C)` family:
/// `η_i = α (C + v) D_{e_i − μ} φ(μ) + v`.
pub fn alpha_c_shares(
    phi: &dyn GeneratingFunction,
    alpha: f64,
    c: f64,
    mu: &SimplexPoint,
    v: f64,
) -> ShareVector {
    debug_assert!(alpha > 0.0 && c >= 0.0);
    let scale = alpha * (c + v);
    let derivatives = directional_derivatives(phi, mu);
    ShareVector::new(derivatives.iter().map(|d| scale * d + v).collect())
        .expect("finite derivatives and value")
}

/// Portfolio weights of the `(α, C)` strategy at value `v ≠ 0`:
/// `π = ((C+v)/v) π^{(α)}(μ) − (C/v) μ`, where `π^{(α)}` is the
/// multiplicative map of `αφ`. Longs the multiplicatively generated
/// portfolio and shorts the market.
pub fn alpha_c_weights(
    phi: &dyn GeneratingFunction,
    alpha: f64,
    c: f64,
    mu: &SimplexPoint,
    v: f64,
) -> Result<Vec<f64>, StrategyError> {
    if v == 0.0 {
        return Err(StrategyError::ZeroValue);
    }
    let scaled = Scaled::new(phi, alpha).map_err(|_| StrategyError::NonPositiveAlpha(alpha))?;
    let map = multiplicative_portfolio_map(&scaled, mu)?;
    let long = (c + v) / v;
    let short = c / v;
    Ok(map
        .iter()
        .zip(mu.weights())
        .map(|(m, w)| long * m - short * w)
        .collect())
}

fn shares_at(
    phi: &dyn GeneratingFunction,
    kind: SchemeKind,
    mu: &SimplexPoint,
    v: f64,
) -> ShareVector {
    match kind {
        SchemeKind::Multiplicative => alpha_c_shares(phi, 1.0, 0.0, mu, v),
        SchemeKind::Additive => additive_shares(phi, mu, v),
        SchemeKind::AlphaC { alpha, c } => alpha_c_shares(phi, alpha, c, mu, v),
    }
}

/// Runs a scheme along a path: at each `t` the shares are a function of
/// `(μ(t), V(t))` only, and the value advances by the additive recursion.
/// A multiplicative run aborts as soon as its value stops being positive.
pub fn run_strategy(
    phi: &dyn GeneratingFunction,
    scheme: &GenerationScheme,
    path: &MarketPath,
) -> Result<StrategyRun, StrategyError> {
    scheme.validate_for(phi)?;
    if scheme.kind == SchemeKind::Multiplicative && scheme.v0 <= 0.0 {
        return Err(StrategyError::NonPositiveInitialValue(scheme.v0));
    }
    let mut states = Vec::with_capacity(path.len());
    let mut values = ValueSeries::new(scheme.v0);
    let mut v = scheme.v0;
    for t in 0..path.len() {
        if scheme.kind == SchemeKind::Multiplicative && v <= 0.0 {
            return Err(StrategyError::NonPositiveValue { step: t, value: v });
        }
        let eta = shares_at(phi, scheme.kind, path.point(t), v);
        if t + 1 < path.len() {
            let next = value_step(&eta, path.point(t), path.point(t + 1), v)?;
            values.push(next);
            states.push(StrategyState {
                eta,
                value: v,
                time: t,
            });
            v = next;
        } else {
            states.push(StrategyState {
                eta,
                value: v,
                time: t,
            });
        }
    }
    Ok(StrategyRun { states, values })
}

/// Runs the scheme and verifies its pathwise decomposition: for each
/// reported `t`, `g(V(t)) − g(V(0)) = φ(μ(t)) − φ(μ(0)) + Σ_{s<t} D`.
///
/// For the `(α, C)` family the report is truncated with a flag at the first
/// `t` with `V(t) ≤ −C` (the scale function is undefined there); the run
/// itself still continues. One-step log arguments below [`LOG_ARG_FLOOR`]
/// abort with an exponential-concavity diagnostic.
pub fn decompose(
    phi: &dyn GeneratingFunction,
    scheme: &GenerationScheme,
    path: &MarketPath,
) -> Result<DecompositionReport, StrategyError> {
    let run = run_strategy(phi, scheme, path)?;
    let kind = scheme.kind.divergence_kind();
    let alpha = kind.alpha();
    let phi0 = phi.eval(path.point(0).weights());
    let g0 = scheme.kind.scale(scheme.v0);

    let mut lhs = Vec::with_capacity(path.len());
    let mut drift = Vec::with_capacity(path.len());
    let mut increments = Vec::with_capacity(path.steps());
    let mut cumulative = Vec::with_capacity(path.len());
    let mut truncated_at = None;
    let mut running = 0.0;
    let mut residual = 0.0f64;

    for t in 0..path.len() {
        let v = run.values.get(t);
        if t > 0 && alpha > 0.0 {
            // diagnose a bad step before reporting its consequences
            let grad_dot: f64 = phi
                .gradient(path.point(t - 1).weights())
                .iter()
                .zip(
                    path.point(t)
                        .weights()
                        .iter()
                        .zip(path.point(t - 1).weights()),
                )
                .map(|(g, (next, now))| g * (next - now))
                .sum();
            let arg = 1.0 + alpha * grad_dot;
            if arg < LOG_ARG_FLOOR {
                return Err(StrategyError::LogArgumentTooSmall { step: t - 1, arg });
            }
        }
        if !scheme.kind.scale_defined_at(v) {
            truncated_at = Some(t);
            break;
        }
        if t > 0 {
            let d = divergence::evaluate(phi, kind, path.point(t), path.point(t - 1))?;
            increments.push(d);
            running += d;
        }
        lhs.push(scheme.kind.scale(v) - g0);
        drift.push(phi.eval(path.point(t).weights()) - phi0);
        cumulative.push(running);
        let gap = (lhs[t] - drift[t] - cumulative[t]).abs();
        residual = residual.max(gap);
    }

    Ok(DecompositionReport {
        lhs,
        drift,
        divergence_increments: increments,
        cumulative_divergence: cumulative,
        residual,
        values: run.values,
        truncated_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::{CrossEntropy, Diversity, NegHalfSquaredNorm};
    use crate::market::check_self_financing;
    use crate::sample;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sp(w: &[f64]) -> SimplexPoint {
        SimplexPoint::new(w.to_vec()).unwrap()
    }

    fn round_trip() -> MarketPath {
        MarketPath::new(vec![sp(&[0.5, 0.5]), sp(&[0.6, 0.4]), sp(&[0.5, 0.5])]).unwrap()
    }

    #[test]
    fn multiplicative_map_examples() {
        let cross = CrossEntropy::new(vec![0.3, 0.7]).unwrap();
        let p = sp(&[0.6, 0.4]);
        let map = multiplicative_portfolio_map(&cross, &p).unwrap();
        assert_abs_diff_eq!(map[0], 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(map[1], 0.7, epsilon = 1e-14);

        let quad = NegHalfSquaredNorm;
        let map = multiplicative_portfolio_map(&quad, &p).unwrap();
        assert_abs_diff_eq!(map[0], 0.552, epsilon = 1e-15);
        assert_abs_diff_eq!(map[1], 0.448, epsilon = 1e-15);

        let map = multiplicative_portfolio_map(&quad, &sp(&[0.5, 0.5])).unwrap();
        assert_abs_diff_eq!(map[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(map[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn map_rejects_negative_weights_beyond_tolerance() {
        // scaling the equal-weight cross entropy by 3 pushes the map outside
        // the closed simplex near the boundary (not exponentially concave)
        let cross = CrossEntropy::equal_weight(2);
        let scaled = crate::genfun::Scaled::new(&cross, 3.0).unwrap();
        let err = multiplicative_portfolio_map(&scaled, &sp(&[0.9, 0.1])).unwrap_err();
        assert!(matches!(err, StrategyError::MapNegativeWeight { index: 0, .. }));
    }

    #[test]
    fn tangent_plane_route_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cross = CrossEntropy::equal_weight(3);
        let diversity = Diversity::new(0.5).unwrap();
        let quad = NegHalfSquaredNorm;
        let phis: [&dyn GeneratingFunction; 3] = [&cross, &diversity, &quad];

        let p = sp(&[0.5, 0.5]);
        let sym = multiplicative_map_via_tangent_plane(&CrossEntropy::equal_weight(2), &p).unwrap();
        assert_abs_diff_eq!(sym[0], 0.5, epsilon = 1e-12);

        let q = sp(&[0.6, 0.4]);
        let direct = multiplicative_map_via_tangent_plane(&quad, &q).unwrap();
        assert_abs_diff_eq!(direct[0], 0.552, epsilon = 1e-12);
        assert_abs_diff_eq!(direct[1], 0.448, epsilon = 1e-12);

        for phi in phis {
            for _ in 0..50 {
                let p = sample::interior_point_bounded(3, 0.01, &mut rng);
                let a = multiplicative_portfolio_map(phi, &p).unwrap();
                let b = multiplicative_map_via_tangent_plane(phi, &p).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    assert_abs_diff_eq!(x, y, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn additive_shares_examples() {
        let quad = NegHalfSquaredNorm;
        let eta = additive_shares(&quad, &sp(&[0.5, 0.5]), 1.0);
        assert_abs_diff_eq!(eta.get(0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eta.get(1), 1.0, epsilon = 1e-15);

        let eta = additive_shares(&quad, &sp(&[0.6, 0.4]), 0.0);
        assert_abs_diff_eq!(eta.get(0), -0.08, epsilon = 1e-15);
        assert_abs_diff_eq!(eta.get(1), 0.12, epsilon = 1e-15);

        let cross = CrossEntropy::equal_weight(3);
        let eta = additive_shares(&cross, &SimplexPoint::barycenter(3), 1.0);
        for i in 0..3 {
            assert_abs_diff_eq!(eta.get(i), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn alpha_c_shares_examples() {
        let cross = CrossEntropy::equal_weight(3);
        let eta = alpha_c_shares(&cross, 1.0, 1.0, &SimplexPoint::barycenter(3), 1.0);
        for i in 0..3 {
            assert_abs_diff_eq!(eta.get(i), 1.0, epsilon = 1e-12);
        }

        // (α, C) = (1, 0) reproduces the multiplicative portfolio weights
        let quad = NegHalfSquaredNorm;
        let mu = sp(&[0.6, 0.4]);
        let eta = alpha_c_shares(&quad, 1.0, 0.0, &mu, 1.0);
        let weights = crate::market::weights_from_strategy(&eta, &mu, 1.0).unwrap();
        assert_abs_diff_eq!(weights[0], 0.552, epsilon = 1e-14);
        assert_abs_diff_eq!(weights[1], 0.448, epsilon = 1e-14);
    }

    #[test]
    fn alpha_c_approaches_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let cross = CrossEntropy::equal_weight(3);
        let mu = sample::interior_point(3, &mut rng);
        let v = 1.3;
        let additive = additive_shares(&cross, &mu, v);
        let max_d = crate::genfun::directional_derivatives(&cross, &mu)
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()));
        let mut errors = Vec::new();
        for alpha in [1e-2, 1e-4, 1e-6] {
            let eta = alpha_c_shares(&cross, alpha, 1.0 / alpha, &mu, v);
            let err = eta
                .shares()
                .iter()
                .zip(additive.shares())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            // gap per component is exactly α·v·D_i
            assert_abs_diff_eq!(err, alpha * v * max_d, epsilon = 1e-12);
            errors.push(err);
        }
        // each 100× drop in α drops the error 100×
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((90.0..110.0).contains(&ratio), "ratio {ratio}");
        }
        // far end of the limit: (α, C) = (1e-8, 1e8)
        let eta = alpha_c_shares(&cross, 1e-8, 1e8, &mu, v);
        let err = eta
            .shares()
            .iter()
            .zip(additive.shares())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-6);
    }

    #[test]
    fn alpha_c_weights_examples() {
        let cross = CrossEntropy::equal_weight(3);
        let bary = SimplexPoint::barycenter(3);
        let w = alpha_c_weights(&cross, 1.0, 1.0, &bary, 1.0).unwrap();
        for wi in &w {
            assert_abs_diff_eq!(*wi, 1.0 / 3.0, epsilon = 1e-12);
        }

        // C = 0 gives the multiplicative map exactly
        let quad = NegHalfSquaredNorm;
        let mu = sp(&[0.6, 0.4]);
        let w = alpha_c_weights(&quad, 1.0, 0.0, &mu, 2.5).unwrap();
        let map = multiplicative_portfolio_map(&quad, &mu).unwrap();
        for (a, b) in w.iter().zip(&map) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let mu = sample::interior_point(3, &mut rng);
            let w = alpha_c_weights(&cross, 0.5, 2.0, &mu, 0.8).unwrap();
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        assert!(matches!(
            alpha_c_weights(&cross, 0.5, 2.0, &bary, 0.0),
            Err(StrategyError::ZeroValue)
        ));
    }

    #[test]
    fn alpha_c_weights_match_run_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let cross = CrossEntropy::equal_weight(3);
        for _ in 0..20 {
            let mu = sample::interior_point(3, &mut rng);
            let v = 0.5 + rng.random::<f64>();
            let (alpha, c) = (0.7, 1.4);
            let eta = alpha_c_shares(&cross, alpha, c, &mu, v);
            let from_shares = crate::market::weights_from_strategy(&eta, &mu, v).unwrap();
            let direct = alpha_c_weights(&cross, alpha, c, &mu, v).unwrap();
            for (a, b) in from_shares.iter().zip(&direct) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn constant_path_keeps_value() {
        let p = sp(&[0.4, 0.35, 0.25]);
        let path = MarketPath::new(vec![p.clone(), p.clone(), p.clone(), p]).unwrap();
        let cross = CrossEntropy::equal_weight(3);
        let schemes = [
            GenerationScheme::multiplicative(1.0).unwrap(),
            GenerationScheme::additive(1.0),
            GenerationScheme::alpha_c(0.5, 2.0, 1.0).unwrap(),
        ];
        for scheme in schemes {
            let run = run_strategy(&cross, &scheme, &path).unwrap();
            for v in run.values.values() {
                assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn multiplicative_round_trip_value() {
        let cross = CrossEntropy::equal_weight(2);
        let scheme = GenerationScheme::multiplicative(1.0).unwrap();
        let run = run_strategy(&cross, &scheme, &round_trip()).unwrap();
        // product of the two per-step factors: 1.0 · 25/24
        assert_abs_diff_eq!(run.values.last(), 25.0 / 24.0, epsilon = 1e-12);
        assert_abs_diff_eq!(run.values.last(), 1.0416667, epsilon = 1e-7);
    }

    #[test]
    fn additive_round_trip_gains_twice_bregman() {
        let quad = NegHalfSquaredNorm;
        let scheme = GenerationScheme::additive(1.0);
        let run = run_strategy(&quad, &scheme, &round_trip()).unwrap();
        assert_abs_diff_eq!(run.values.last() - 1.0, 0.02, epsilon = 1e-12);
    }

    #[test]
    fn generated_runs_are_self_financing() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let cross = CrossEntropy::equal_weight(4);
        let diversity = Diversity::new(0.5).unwrap();
        let quad = NegHalfSquaredNorm;
        let phis: [&dyn GeneratingFunction; 3] = [&cross, &diversity, &quad];
        let schemes = [
            GenerationScheme::multiplicative(1.0).unwrap(),
            GenerationScheme::additive(1.0),
            GenerationScheme::alpha_c(0.5, 1.0, 1.0).unwrap(),
        ];
        for phi in phis {
            for scheme in schemes {
                let path = sample::random_path(4, 60, 0.05, &mut rng);
                let run = run_strategy(phi, &scheme, &path).unwrap();
                let etas: Vec<ShareVector> =
                    run.states.iter().map(|s| s.eta.clone()).collect();
                assert!(check_self_financing(&etas, &path).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn decompose_single_step_is_exact() {
        let path = MarketPath::new(vec![sp(&[0.5, 0.5]), sp(&[0.62, 0.38])]).unwrap();
        let cross = CrossEntropy::equal_weight(2);
        let schemes = [
            GenerationScheme::multiplicative(1.0).unwrap(),
            GenerationScheme::additive(1.0),
            GenerationScheme::alpha_c(0.5, 2.0, 1.0).unwrap(),
        ];
        for scheme in schemes {
            let report = decompose(&cross, &scheme, &path).unwrap();
            assert!(report.residual <= 1e-12, "residual {}", report.residual);
            assert_eq!(report.truncated_at, None);
        }
    }

    #[test]
    fn decompose_long_random_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let cross = CrossEntropy::equal_weight(4);
        let path = sample::random_path(4, 1000, 0.05, &mut rng);
        let schemes = [
            GenerationScheme::multiplicative(1.0).unwrap(),
            GenerationScheme::additive(1.0),
            GenerationScheme::alpha_c(0.75, 1.0 / 0.75, 1.0).unwrap(),
        ];
        for scheme in schemes {
            let report = decompose(&cross, &scheme, &path).unwrap();
            let scale = report
                .lhs
                .iter()
                .fold(1.0f64, |m, x| m.max(x.abs()));
            assert!(
                report.residual / scale < 1e-9,
                "relative residual {}",
                report.residual / scale
            );
        }
    }

    #[test]
    fn decompose_cycle_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let quad = NegHalfSquaredNorm;
        for _ in 0..10 {
            let cycle = sample::random_cycle(3, 12, 0.05, &mut rng);
            let report = decompose(&quad, &GenerationScheme::additive(1.0), &cycle).unwrap();
            // drift cancels on a cycle, so the transformed gain is the
            // accumulated divergence
            let last = *report.lhs.last().unwrap();
            assert!(last >= -1e-10);
            assert_abs_diff_eq!(
                last,
                *report.cumulative_divergence.last().unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn decompose_truncates_below_negative_c() {
        // v0 ≤ −C leaves the scale undefined from the start: flagged, not an error
        let path = round_trip();
        let cross = CrossEntropy::equal_weight(2);
        let scheme = GenerationScheme::alpha_c(1.0, 0.5, -1.0).unwrap();
        let report = decompose(&cross, &scheme, &path).unwrap();
        assert_eq!(report.truncated_at, Some(0));
        assert!(report.lhs.is_empty());
    }

    #[test]
    fn multiplicative_rejects_nonpositive_start() {
        assert!(matches!(
            GenerationScheme::multiplicative(0.0),
            Err(StrategyError::NonPositiveInitialValue(_))
        ));
        assert!(matches!(
            GenerationScheme::multiplicative(-1.0),
            Err(StrategyError::NonPositiveInitialValue(_))
        ));
    }

    #[test]
    fn scheme_validation_respects_alpha_max() {
        let cross = CrossEntropy::equal_weight(2);
        let scheme = GenerationScheme::alpha_c(2.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            scheme.validate_for(&cross),
            Err(StrategyError::AlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn strategy_depends_only_on_current_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let cross = CrossEntropy::equal_weight(3);
        let path = sample::random_path(3, 40, 0.05, &mut rng);
        let scheme = GenerationScheme::alpha_c(0.5, 1.0, 1.0).unwrap();
        let full = run_strategy(&cross, &scheme, &path).unwrap();

        let t0 = 17;
        let suffix = MarketPath::new(path.points()[t0..].to_vec()).unwrap();
        let resumed = GenerationScheme {
            kind: scheme.kind,
            v0: full.values.get(t0),
        };
        let partial = run_strategy(&cross, &resumed, &suffix).unwrap();
        for (s, t) in partial.states.iter().zip(&full.states[t0..]) {
            assert_eq!(s.eta, t.eta);
            assert_eq!(s.value, t.value);
        }
    }

    #[test]
    fn scheme_coincidence_alpha_one_c_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let diversity = Diversity::new(0.5).unwrap();
        let path = sample::random_path(3, 50, 0.05, &mut rng);
        let scheme = GenerationScheme::alpha_c(1.0, 0.0, 1.0).unwrap();
        let run = run_strategy(&diversity, &scheme, &path).unwrap();
        for state in &run.states {
            let mu = path.point(state.time);
            let weights =
                crate::market::weights_from_strategy(&state.eta, mu, state.value).unwrap();
            let map = multiplicative_portfolio_map(&diversity, mu).unwrap();
            for (a, b) in weights.iter().zip(&map) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn log_argument_guard_fires() {
        struct Steep;
        impl GeneratingFunction for Steep {
            fn name(&self) -> &str {
                "steep_test"
            }
            fn eval(&self, p: &[f64]) -> f64 {
                50.0 * p[0]
            }
            fn gradient(&self, p: &[f64]) -> Vec<f64> {
                let mut g = vec![0.0; p.len()];
                g[0] = 50.0;
                g
            }
            fn alpha_max(&self) -> f64 {
                f64::INFINITY
            }
        }
        let path = MarketPath::new(vec![sp(&[0.9, 0.1]), sp(&[0.1, 0.9])]).unwrap();
        let scheme = GenerationScheme::alpha_c(1.0, 0.0, 1.0).unwrap();
        let err = decompose(&Steep, &scheme, &path).unwrap_err();
        assert!(matches!(err, StrategyError::LogArgumentTooSmall { .. }));
    }
}
