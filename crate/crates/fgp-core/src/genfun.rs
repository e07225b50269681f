//! Generating functions `φ` on the simplex: evaluation, gradients,
//! directional derivatives and α-exponential-concavity diagnostics.
//!
//! A generating function is evaluated as written on the ambient positive
//! orthant, and its gradient is the ambient Euclidean gradient; the simplex
//! preconditions of the trading operations are enforced by the callers
//! through [`SimplexPoint`]. Analytic gradients are part of the contract —
//! the pathwise decompositions are exact identities only with exact
//! gradients — and are cross-validated against central finite differences
//! in the test suites.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use thiserror::Error;

use crate::market::SimplexPoint;
use crate::sample;

/// Step used to validate analytic gradients against central differences.
pub const FD_GRADIENT_STEP: f64 = 1e-6;

/// Step for the finite-difference Hessian fallback.
pub const FD_HESSIAN_STEP: f64 = 1e-5;

/// Slack allowed in the midpoint concavity test.
pub const MIDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenFunError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
}

/// A smooth generating function on (a neighborhood of) the simplex.
///
/// `eval` and `gradient` must be pure, stateless and finite on the positive
/// orthant near the simplex; this makes unsynchronized concurrent evaluation
/// safe. Implementations supply `alpha_max`, the largest `α` for which
/// `e^{αφ}` is claimed concave (`f64::INFINITY` when unbounded); the claim
/// can be probed with [`check_alpha_exp_concavity`] but is not certified.
pub trait GeneratingFunction {
    fn name(&self) -> &str;

    /// `φ(p)` at an ambient point of the positive orthant.
    fn eval(&self, p: &[f64]) -> f64;

    /// Ambient Euclidean gradient `∇φ(p)`.
    fn gradient(&self, p: &[f64]) -> Vec<f64>;

    /// Ambient Euclidean Hessian. The default is a central finite-difference
    /// of the gradient with step [`FD_HESSIAN_STEP`], symmetrized; builtins
    /// override with analytic Hessians.
    fn hessian(&self, p: &[f64]) -> DMatrix<f64> {
        fd_hessian_of(&|x| self.gradient(x), p, FD_HESSIAN_STEP)
    }

    /// Largest declared `α` with `e^{αφ}` concave.
    fn alpha_max(&self) -> f64;

    /// Whether the ambient Hessian is negative definite at interior points
    /// (makes the induced divergences strict).
    fn strictly_concave(&self) -> bool {
        false
    }

    /// Analytic inverse of the gradient map, when one is available.
    /// `None` sends callers to a Newton solve.
    fn gradient_inverse(&self, _dual: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// `φ(p) = Σ π_i log p_i` for a fixed `π` in the closed simplex; the
/// logarithm of the geometric mean with weights `π`. Generates the
/// constant-weighted portfolio.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossEntropy {
    pi: Vec<f64>,
}

impl CrossEntropy {
    pub fn new(pi: Vec<f64>) -> Result<Self, GenFunError> {
        if pi.len() < 2 {
            return Err(GenFunError::InvalidParameter(alloc::format!(
                "weight vector needs at least 2 components, got {}",
                pi.len()
            )));
        }
        if pi.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(GenFunError::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(GenFunError::InvalidParameter(alloc::format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        let mut pi = pi;
        if (sum - 1.0).abs() > 0.0 {
            for x in &mut pi {
                *x /= sum;
            }
        }
        Ok(Self { pi })
    }

    pub fn equal_weight(n: usize) -> Self {
        Self::new(alloc::vec![1.0 / n as f64; n]).expect("equal weights are valid")
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }
}

impl GeneratingFunction for CrossEntropy {
    fn name(&self) -> &str {
        "cross_entropy"
    }

    fn eval(&self, p: &[f64]) -> f64 {
        assert_eq!(p.len(), self.pi.len(), "dimension mismatch");
        self.pi
            .iter()
            .zip(p)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, x)| w * x.ln())
            .sum()
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        assert_eq!(p.len(), self.pi.len(), "dimension mismatch");
        self.pi.iter().zip(p).map(|(w, x)| w / x).collect()
    }

    fn hessian(&self, p: &[f64]) -> DMatrix<f64> {
        let n = p.len();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = -self.pi[i] / (p[i] * p[i]);
        }
        h
    }

    fn alpha_max(&self) -> f64 {
        1.0
    }

    fn strictly_concave(&self) -> bool {
        self.pi.iter().all(|&x| x > 0.0)
    }

    fn gradient_inverse(&self, dual: &[f64]) -> Option<Vec<f64>> {
        if !self.strictly_concave() || dual.iter().any(|&d| d <= 0.0) {
            return None;
        }
        Some(self.pi.iter().zip(dual).map(|(w, d)| w / d).collect())
    }
}

/// `φ(p) = −½|p|²`. Generates shares `η_i = |p|² − p_i + V`; its Bregman
/// divergence is half the squared Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NegHalfSquaredNorm;

impl GeneratingFunction for NegHalfSquaredNorm {
    fn name(&self) -> &str {
        "neg_half_sq_norm"
    }

    fn eval(&self, p: &[f64]) -> f64 {
        -0.5 * p.iter().map(|x| x * x).sum::<f64>()
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        p.iter().map(|x| -x).collect()
    }

    fn hessian(&self, p: &[f64]) -> DMatrix<f64> {
        -DMatrix::identity(p.len(), p.len())
    }

    fn alpha_max(&self) -> f64 {
        // e^{αφ} is concave on the simplex for α up to n/(n−1); 1 is safe
        // for every dimension.
        1.0
    }

    fn strictly_concave(&self) -> bool {
        true
    }

    fn gradient_inverse(&self, dual: &[f64]) -> Option<Vec<f64>> {
        Some(dual.iter().map(|d| -d).collect())
    }
}

/// `φ(p) = (1/λ) log Σ p_i^λ` for `0 < λ < 1`; the log of the power mean
/// generating the diversity-weighted portfolio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diversity {
    lambda: f64,
}

impl Diversity {
    pub fn new(lambda: f64) -> Result<Self, GenFunError> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(GenFunError::InvalidParameter(alloc::format!(
                "diversity exponent must lie in (0, 1), got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl GeneratingFunction for Diversity {
    fn name(&self) -> &str {
        "diversity"
    }

    fn eval(&self, p: &[f64]) -> f64 {
        let s: f64 = p.iter().map(|x| x.powf(self.lambda)).sum();
        s.ln() / self.lambda
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let s: f64 = p.iter().map(|x| x.powf(self.lambda)).sum();
        p.iter().map(|x| x.powf(self.lambda - 1.0) / s).collect()
    }

    fn hessian(&self, p: &[f64]) -> DMatrix<f64> {
        let n = p.len();
        let lambda = self.lambda;
        let s: f64 = p.iter().map(|x| x.powf(lambda)).sum();
        let g: Vec<f64> = p.iter().map(|x| x.powf(lambda - 1.0)).collect();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut v = -lambda * g[i] * g[j] / (s * s);
                if i == j {
                    v += (lambda - 1.0) * p[i].powf(lambda - 2.0) / s;
                }
                h[(i, j)] = v;
            }
        }
        h
    }

    fn alpha_max(&self) -> f64 {
        1.0
    }

    fn strictly_concave(&self) -> bool {
        true
    }
}

/// `α · φ` for `α > 0`; rescales gradients, Hessians and the concavity
/// budget (`alpha_max` divides by the factor).
pub struct Scaled<'a> {
    inner: &'a dyn GeneratingFunction,
    factor: f64,
}

impl<'a> Scaled<'a> {
    pub fn new(inner: &'a dyn GeneratingFunction, factor: f64) -> Result<Self, GenFunError> {
        if !factor.is_finite() || factor <= 0.0 {
            return Err(GenFunError::InvalidParameter(alloc::format!(
                "scale factor must be positive and finite, got {factor}"
            )));
        }
        Ok(Self { inner, factor })
    }
}

impl GeneratingFunction for Scaled<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn eval(&self, p: &[f64]) -> f64 {
        self.factor * self.inner.eval(p)
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        self.inner
            .gradient(p)
            .into_iter()
            .map(|g| self.factor * g)
            .collect()
    }

    fn hessian(&self, p: &[f64]) -> DMatrix<f64> {
        self.inner.hessian(p) * self.factor
    }

    fn alpha_max(&self) -> f64 {
        self.inner.alpha_max() / self.factor
    }

    fn strictly_concave(&self) -> bool {
        self.inner.strictly_concave()
    }

    fn gradient_inverse(&self, dual: &[f64]) -> Option<Vec<f64>> {
        let unscaled: Vec<f64> = dual.iter().map(|d| d / self.factor).collect();
        self.inner.gradient_inverse(&unscaled)
    }
}

/// Directional derivative `D_{e_i − p} φ(p) = ∇φ(p) · (e_i − p)`.
pub fn directional_derivative(
    phi: &dyn GeneratingFunction,
    p: &SimplexPoint,
    i: usize,
) -> Result<f64, GenFunError> {
    if i >= p.n() {
        return Err(GenFunError::IndexOutOfRange { index: i, n: p.n() });
    }
    Ok(directional_derivatives(phi, p)[i])
}

/// All directional derivatives `D_{e_i − p} φ(p)`, `i = 1..n`, sharing one
/// gradient evaluation. Their `p`-weighted average vanishes:
/// `Σ p_i D_{e_i − p} φ(p) = 0`.
pub fn directional_derivatives(phi: &dyn GeneratingFunction, p: &SimplexPoint) -> Vec<f64> {
    let grad = phi.gradient(p.weights());
    let pivot: f64 = grad.iter().zip(p.weights()).map(|(g, w)| g * w).sum();
    grad.iter().map(|g| g - pivot).collect()
}

/// Central finite-difference gradient, for validating analytic gradients.
pub fn fd_gradient(phi: &dyn GeneratingFunction, p: &[f64], step: f64) -> Vec<f64> {
    let mut grad = Vec::with_capacity(p.len());
    let mut x = p.to_vec();
    for i in 0..p.len() {
        x[i] = p[i] + step;
        let up = phi.eval(&x);
        x[i] = p[i] - step;
        let down = phi.eval(&x);
        x[i] = p[i];
        grad.push((up - down) / (2.0 * step));
    }
    grad
}

/// Central finite-difference Hessian of a gradient callback, symmetrized by
/// averaging with its transpose.
pub fn fd_hessian_of(
    gradient: &dyn Fn(&[f64]) -> Vec<f64>,
    p: &[f64],
    step: f64,
) -> DMatrix<f64> {
    let n = p.len();
    let mut h = DMatrix::zeros(n, n);
    let mut x = p.to_vec();
    for j in 0..n {
        x[j] = p[j] + step;
        let up = gradient(&x);
        x[j] = p[j] - step;
        let down = gradient(&x);
        x[j] = p[j];
        for i in 0..n {
            h[(i, j)] = (up[i] - down[i]) / (2.0 * step);
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = avg;
            h[(j, i)] = avg;
        }
    }
    h
}

/// Outcome of the sampling-based α-exponential-concavity check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityCheck {
    pub passed: bool,
    pub witness: Option<ConcavityWitness>,
    pub samples_checked: usize,
}

/// First violation found by [`check_alpha_exp_concavity`].
#[derive(Debug, Clone, PartialEq)]
pub enum ConcavityWitness {
    /// `e^{αφ}` fails midpoint concavity between `p` and `q`;
    /// `gap = e^{αφ(m)} − ½(e^{αφ(p)} + e^{αφ(q)})` is negative.
    Midpoint { p: Vec<f64>, q: Vec<f64>, gap: f64 },
    /// The finite-difference second derivative of `e^{αφ}` along a tangent
    /// direction at `p` is positive.
    Curvature {
        p: Vec<f64>,
        direction: Vec<f64>,
        second_difference: f64,
    },
}

/// Samples interior point pairs (half of them boundary-biased) and checks
/// midpoint concavity of `e^{αφ}`, plus negative semidefiniteness of its
/// finite-difference Hessian along tangent directions at the sampled points.
/// Returns the first violating witness. Diagnostic only: passing is
/// evidence, not a certificate.
pub fn check_alpha_exp_concavity<R: Rng + ?Sized>(
    phi: &dyn GeneratingFunction,
    alpha: f64,
    n: usize,
    samples: usize,
    rng: &mut R,
) -> ConcavityCheck {
    assert!(alpha > 0.0, "alpha must be positive");
    assert!(samples >= 1);
    assert!(n >= 2);
    let h = |x: &[f64]| (alpha * phi.eval(x)).exp();
    for s in 0..samples {
        let (p, q) = if s % 2 == 0 {
            (
                sample::interior_point(n, rng),
                sample::interior_point(n, rng),
            )
        } else {
            (
                sample::boundary_biased_point(n, rng),
                sample::boundary_biased_point(n, rng),
            )
        };
        let mid: Vec<f64> = p
            .weights()
            .iter()
            .zip(q.weights())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let gap = h(&mid) - 0.5 * (h(p.weights()) + h(q.weights()));
        if gap < -MIDPOINT_TOL {
            return ConcavityCheck {
                passed: false,
                witness: Some(ConcavityWitness::Midpoint {
                    p: p.weights().to_vec(),
                    q: q.weights().to_vec(),
                    gap,
                }),
                samples_checked: s + 1,
            };
        }
        // Tangent curvature spot check; skipped very close to the boundary
        // where the finite differences lose accuracy.
        if p.min_weight() >= 1e-2 {
            if let Some(witness) = curvature_violation(&h, &p, n, rng) {
                return ConcavityCheck {
                    passed: false,
                    witness: Some(witness),
                    samples_checked: s + 1,
                };
            }
        }
    }
    ConcavityCheck {
        passed: true,
        witness: None,
        samples_checked: samples,
    }
}

fn curvature_violation<R: Rng + ?Sized>(
    h: &dyn Fn(&[f64]) -> f64,
    p: &SimplexPoint,
    n: usize,
    rng: &mut R,
) -> Option<ConcavityWitness> {
    let eps = (0.25 * p.min_weight()).min(1e-3);
    let center = h(p.weights());
    let scale = center.abs().max(1.0);
    let mut directions: Vec<Vec<f64>> = Vec::new();
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let mut edge = alloc::vec![0.0; n];
    edge[i] = 1.0;
    edge[j] = -1.0;
    directions.push(edge);
    directions.push(sample::tangent_vector(n, 1.0, rng).components().to_vec());
    for direction in directions {
        let max_abs = direction.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if max_abs == 0.0 {
            continue;
        }
        let unit: Vec<f64> = direction.iter().map(|d| d / max_abs).collect();
        let plus: Vec<f64> = p
            .weights()
            .iter()
            .zip(&unit)
            .map(|(w, d)| w + eps * d)
            .collect();
        let minus: Vec<f64> = p
            .weights()
            .iter()
            .zip(&unit)
            .map(|(w, d)| w - eps * d)
            .collect();
        let second = (h(&plus) - 2.0 * center + h(&minus)) / (eps * eps);
        if second > 1e-6 * scale {
            return Some(ConcavityWitness::Curvature {
                p: p.weights().to_vec(),
                direction: unit,
                second_difference: second,
            });
        }
    }
    None
}
