//! The L-, Bregman- and `L^(α)`-divergences of a generating function, and
//! their local quadratic (Riemannian) structure.
//!
//! All three are nonnegative, vanish on the diagonal, and need not be
//! symmetric. They are the volatility-capture functionals of the three
//! generation schemes: `L` for multiplicative, Bregman for additive, and
//! `L^(α)` for the `(α, C)` family. `L^(α)` interpolates the other two:
//! it is the L-divergence at `α = 1` and tends to the Bregman divergence
//! as `α ↓ 0`, via the scaling identity
//! `D_{L^(α),φ} = (1/α) · D_{L, αφ}`.

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::genfun::{GeneratingFunction, Scaled};
use crate::market::{SimplexPoint, TangentVector};

/// Divergences may dip this far below zero from floating-point rounding.
pub const NONNEGATIVITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DivergenceError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("alpha must be strictly positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("alpha {alpha} exceeds the declared concavity bound {max}")]
    AlphaOutOfRange { alpha: f64, max: f64 },
    #[error(
        "log argument {arg} is not positive: the generating function is not \
         {alpha}-exponentially concave between these points"
    )]
    LogDomain { arg: f64, alpha: f64 },
    #[error("divergence {value} is negative beyond tolerance: concavity violated at runtime")]
    NegativeDivergence { value: f64 },
    #[error("weight vector is not in the closed simplex: {reason}")]
    InvalidWeights { reason: &'static str },
}

/// Which divergence functional to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceKind {
    /// Bregman divergence of a concave `φ` (the `α → 0` limit).
    Bregman,
    /// L-divergence of an exponentially concave `φ`.
    L,
    /// `L^(α)`-divergence of an `α`-exponentially concave `φ`.
    LAlpha(f64),
}

impl DivergenceKind {
    /// The `α` entering the quadratic form `−(Hess φ + α ∇φ∇φᵀ)`.
    pub fn alpha(&self) -> f64 {
        match self {
            DivergenceKind::Bregman => 0.0,
            DivergenceKind::L => 1.0,
            DivergenceKind::LAlpha(a) => *a,
        }
    }

    /// Checks the declared concavity budget of `phi` against this kind.
    pub fn validate_for(&self, phi: &dyn GeneratingFunction) -> Result<(), DivergenceError> {
        match self {
            DivergenceKind::Bregman => Ok(()),
            DivergenceKind::L => {
                if phi.alpha_max() < 1.0 {
                    return Err(DivergenceError::AlphaOutOfRange {
                        alpha: 1.0,
                        max: phi.alpha_max(),
                    });
                }
                Ok(())
            }
            DivergenceKind::LAlpha(alpha) => {
                if alpha.is_nan() || *alpha <= 0.0 {
                    return Err(DivergenceError::NonPositiveAlpha(*alpha));
                }
                if *alpha > phi.alpha_max() {
                    return Err(DivergenceError::AlphaOutOfRange {
                        alpha: *alpha,
                        max: phi.alpha_max(),
                    });
                }
                Ok(())
            }
        }
    }
}

fn check_pair(q: &SimplexPoint, p: &SimplexPoint) -> Result<(), DivergenceError> {
    if q.n() != p.n() {
        return Err(DivergenceError::DimensionMismatch {
            left: q.n(),
            right: p.n(),
        });
    }
    Ok(())
}

fn gradient_dot_difference(phi: &dyn GeneratingFunction, q: &SimplexPoint, p: &SimplexPoint) -> f64 {
    phi.gradient(p.weights())
        .iter()
        .zip(q.weights().iter().zip(p.weights()))
        .map(|(g, (qi, pi))| g * (qi - pi))
        .sum()
}

/// Bregman divergence `D_B[q : p] = ∇φ(p)·(q − p) − (φ(q) − φ(p))`.
///
/// Nonnegative for concave `φ`; a value below `−`[`NONNEGATIVITY_TOL`] is
/// reported as a runtime concavity violation.
pub fn bregman(
    phi: &dyn GeneratingFunction,
    q: &SimplexPoint,
    p: &SimplexPoint,
) -> Result<f64, DivergenceError> {
    check_pair(q, p)?;
    let value = gradient_dot_difference(phi, q, p) - (phi.eval(q.weights()) - phi.eval(p.weights()));
    if value < -NONNEGATIVITY_TOL {
        return Err(DivergenceError::NegativeDivergence { value });
    }
    Ok(value)
}

/// L-divergence `D_L[q : p] = log(1 + ∇φ(p)·(q − p)) − (φ(q) − φ(p))`.
pub fn l_divergence(
    phi: &dyn GeneratingFunction,
    q: &SimplexPoint,
    p: &SimplexPoint,
) -> Result<f64, DivergenceError> {
    DivergenceKind::L.validate_for(phi)?;
    check_pair(q, p)?;
    let dot = gradient_dot_difference(phi, q, p);
    if 1.0 + dot <= 0.0 {
        return Err(DivergenceError::LogDomain {
            arg: 1.0 + dot,
            alpha: 1.0,
        });
    }
    Ok(dot.ln_1p() - (phi.eval(q.weights()) - phi.eval(p.weights())))
}

/// `L^(α)`-divergence
/// `D[q : p] = (1/α) log(1 + α ∇φ(p)·(q − p)) − (φ(q) − φ(p))`.
///
/// Satisfies `D_{L^(α),φ} = (1/α) D_{L, αφ}` and converges pointwise to the
/// Bregman divergence as `α ↓ 0`.
pub fn l_alpha(
    phi: &dyn GeneratingFunction,
    alpha: f64,
    q: &SimplexPoint,
    p: &SimplexPoint,
) -> Result<f64, DivergenceError> {
    DivergenceKind::LAlpha(alpha).validate_for(phi)?;
    check_pair(q, p)?;
    let dot = gradient_dot_difference(phi, q, p);
    if 1.0 + alpha * dot <= 0.0 {
        return Err(DivergenceError::LogDomain {
            arg: 1.0 + alpha * dot,
            alpha,
        });
    }
    Ok((alpha * dot).ln_1p() / alpha - (phi.eval(q.weights()) - phi.eval(p.weights())))
}

/// Excess growth rate of a constant-weighted portfolio:
/// `log(π · (q/p)) − π · log(q/p)` with componentwise ratios.
///
/// Closed form of the L-divergence of the cross-entropy generating function
/// with weights `π` in the closed simplex.
pub fn excess_growth(
    pi: &[f64],
    q: &SimplexPoint,
    p: &SimplexPoint,
) -> Result<f64, DivergenceError> {
    check_pair(q, p)?;
    if pi.len() != p.n() {
        return Err(DivergenceError::DimensionMismatch {
            left: pi.len(),
            right: p.n(),
        });
    }
    if pi.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(DivergenceError::InvalidWeights {
            reason: "components must be finite and nonnegative",
        });
    }
    if (pi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(DivergenceError::InvalidWeights {
            reason: "components must sum to 1",
        });
    }
    // Zero-weight components contribute nothing to either term.
    let mut arithmetic = 0.0;
    let mut logarithmic = 0.0;
    for ((&w, &qi), &pi_) in pi.iter().zip(q.weights()).zip(p.weights()) {
        if w > 0.0 {
            let ratio = qi / pi_;
            arithmetic += w * ratio;
            logarithmic += w * ratio.ln();
        }
    }
    Ok(arithmetic.ln() - logarithmic)
}

/// Evaluates the divergence selected by `kind`.
pub fn evaluate(
    phi: &dyn GeneratingFunction,
    kind: DivergenceKind,
    q: &SimplexPoint,
    p: &SimplexPoint,
) -> Result<f64, DivergenceError> {
    match kind {
        DivergenceKind::Bregman => bregman(phi, q, p),
        DivergenceKind::L => l_divergence(phi, q, p),
        DivergenceKind::LAlpha(alpha) => l_alpha(phi, alpha, q, p),
    }
}

/// The matrix `G(p)` of the quadratic approximation
/// `D[p + εv : p] = ½ ε² vᵀ G(p) v + O(ε³)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    matrix: DMatrix<f64>,
}

impl MetricMatrix {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// `vᵀ G v`; nonnegative on tangent vectors, strictly positive when the
    /// generating function is strictly concave.
    pub fn quadratic_form(&self, v: &TangentVector) -> f64 {
        let x = DVector::from_column_slice(v.components());
        (&x.transpose() * &self.matrix * &x)[(0, 0)]
    }
}

/// Local metric of the divergence at `p`:
/// Bregman gives `−Hess φ(p)`, `L`/`L^(α)` give
/// `−(Hess φ(p) + α ∇φ(p)∇φ(p)ᵀ)` with `α = 1` for `L`.
///
/// Builtins supply analytic Hessians; other generating functions fall back
/// to the finite-difference Hessian of the trait default.
pub fn metric_matrix(
    phi: &dyn GeneratingFunction,
    kind: DivergenceKind,
    p: &SimplexPoint,
) -> MetricMatrix {
    let n = p.n();
    let alpha = kind.alpha();
    let mut matrix = -phi.hessian(p.weights());
    if alpha != 0.0 {
        let grad = phi.gradient(p.weights());
        for i in 0..n {
            for j in 0..n {
                matrix[(i, j)] -= alpha * grad[i] * grad[j];
            }
        }
    }
    MetricMatrix { matrix }
}

/// Scaling identity route: `(1/α) · D_L[q : p]` computed through `αφ`.
/// Provided as an independent algebraic path for cross-checking [`l_alpha`].
pub fn l_alpha_via_scaling(
    phi: &dyn GeneratingFunction,
    alpha: f64,
    q: &SimplexPoint,
    p: &SimplexPoint,
) -> Result<f64, DivergenceError> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(DivergenceError::NonPositiveAlpha(alpha));
    }
    let scaled = Scaled::new(phi, alpha)
        .map_err(|_| DivergenceError::NonPositiveAlpha(alpha))?;
    Ok(l_divergence(&scaled, q, p)? / alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::{CrossEntropy, Diversity, NegHalfSquaredNorm};
    use crate::sample;
    use alloc::vec;
    use alloc::vec::Vec;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sp(w: &[f64]) -> SimplexPoint {
        SimplexPoint::new(w.to_vec()).unwrap()
    }

    #[test]
    fn bregman_examples() {
        let quad = NegHalfSquaredNorm;
        let p = sp(&[0.5, 0.5]);
        let q = sp(&[0.6, 0.4]);
        // closed form: half the squared Euclidean distance
        assert_abs_diff_eq!(bregman(&quad, &q, &p).unwrap(), 0.01, epsilon = 1e-15);
        assert_eq!(bregman(&quad, &p, &p).unwrap(), 0.0);

        let cross = CrossEntropy::equal_weight(2);
        let oracle = -0.5 * 0.96f64.ln();
        assert_abs_diff_eq!(bregman(&cross, &q, &p).unwrap(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(bregman(&cross, &q, &p).unwrap(), 0.0204110, epsilon = 1e-6);
    }

    #[test]
    fn bregman_flags_convexity() {
        // +½|p|² is convex, so its "Bregman divergence" goes negative.
        struct Convex;
        impl GeneratingFunction for Convex {
            fn name(&self) -> &str {
                "convex_test"
            }
            fn eval(&self, p: &[f64]) -> f64 {
                0.5 * p.iter().map(|x| x * x).sum::<f64>()
            }
            fn gradient(&self, p: &[f64]) -> Vec<f64> {
                p.to_vec()
            }
            fn alpha_max(&self) -> f64 {
                0.0
            }
        }
        let err = bregman(&Convex, &sp(&[0.6, 0.4]), &sp(&[0.5, 0.5])).unwrap_err();
        assert!(matches!(err, DivergenceError::NegativeDivergence { .. }));
    }

    #[test]
    fn l_divergence_examples() {
        let cross = CrossEntropy::equal_weight(2);
        let p = sp(&[0.5, 0.5]);
        let q = sp(&[0.6, 0.4]);
        let oracle = -0.5 * 0.96f64.ln();
        assert_abs_diff_eq!(l_divergence(&cross, &q, &p).unwrap(), oracle, epsilon = 1e-12);
        assert_eq!(l_divergence(&cross, &p, &p).unwrap(), 0.0);
    }

    #[test]
    fn l_divergence_matches_excess_growth() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pi = vec![0.2, 0.5, 0.3];
        let cross = CrossEntropy::new(pi.clone()).unwrap();
        for _ in 0..200 {
            let p = sample::interior_point(3, &mut rng);
            let q = sample::interior_point(3, &mut rng);
            assert_abs_diff_eq!(
                l_divergence(&cross, &q, &p).unwrap(),
                excess_growth(&pi, &q, &p).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn excess_growth_examples() {
        let p = sp(&[0.5, 0.5]);
        let q = sp(&[0.6, 0.4]);
        let expected = -0.5 * (1.2f64.ln() + 0.8f64.ln());
        assert_abs_diff_eq!(
            excess_growth(&[0.5, 0.5], &q, &p).unwrap(),
            expected,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            excess_growth(&[0.5, 0.5], &q, &p).unwrap(),
            0.0204110,
            epsilon = 1e-6
        );
        // single-asset weights: the ratio cancels
        assert_abs_diff_eq!(
            excess_growth(&[1.0, 0.0], &q, &p).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(excess_growth(&[0.5, 0.5], &p, &p).unwrap(), 0.0);
    }

    #[test]
    fn l_alpha_examples() {
        let cross = CrossEntropy::equal_weight(2);
        let p = sp(&[0.5, 0.5]);
        let q = sp(&[0.6, 0.4]);
        // gradient term vanishes at the barycenter
        assert_abs_diff_eq!(
            l_alpha(&cross, 0.5, &q, &p).unwrap(),
            -0.5 * 0.96f64.ln(),
            epsilon = 1e-12
        );
        // α = 1 is exactly the L-divergence
        assert_eq!(
            l_alpha(&cross, 1.0, &q, &p).unwrap(),
            l_divergence(&cross, &q, &p).unwrap()
        );
        // α → 0 approaches the Bregman divergence
        let quad = NegHalfSquaredNorm;
        assert_abs_diff_eq!(
            l_alpha(&quad, 1e-8, &q, &p).unwrap(),
            0.01,
            epsilon = 1e-8
        );
    }

    #[test]
    fn l_alpha_rejects_out_of_range() {
        let cross = CrossEntropy::equal_weight(2);
        let p = sp(&[0.5, 0.5]);
        let q = sp(&[0.6, 0.4]);
        assert!(matches!(
            l_alpha(&cross, 3.0, &q, &p),
            Err(DivergenceError::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            l_alpha(&cross, 0.0, &q, &p),
            Err(DivergenceError::NonPositiveAlpha(_))
        ));
    }

    #[test]
    fn log_domain_error_for_steep_gradient() {
        // A test-only generating function with an enormous gradient makes
        // the log argument negative between well-separated points.
        struct Steep;
        impl GeneratingFunction for Steep {
            fn name(&self) -> &str {
                "steep_test"
            }
            fn eval(&self, p: &[f64]) -> f64 {
                100.0 * p[0]
            }
            fn gradient(&self, p: &[f64]) -> Vec<f64> {
                let mut g = vec![0.0; p.len()];
                g[0] = 100.0;
                g
            }
            fn alpha_max(&self) -> f64 {
                f64::INFINITY
            }
        }
        let p = sp(&[0.9, 0.1]);
        let q = sp(&[0.1, 0.9]);
        assert!(matches!(
            l_divergence(&Steep, &q, &p),
            Err(DivergenceError::LogDomain { .. })
        ));
    }

    #[test]
    fn scaling_identity_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cross = CrossEntropy::equal_weight(3);
        let diversity = Diversity::new(0.5).unwrap();
        let quad = NegHalfSquaredNorm;
        let phis: [&dyn GeneratingFunction; 3] = [&cross, &diversity, &quad];
        for phi in phis {
            for alpha in [0.25, 0.5, 1.0] {
                for _ in 0..100 {
                    let p = sample::interior_point(3, &mut rng);
                    let q = sample::interior_point(3, &mut rng);
                    let direct = l_alpha(phi, alpha, &q, &p).unwrap();
                    let scaled = l_alpha_via_scaling(phi, alpha, &q, &p).unwrap();
                    assert_abs_diff_eq!(direct, scaled, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn bregman_limit_linear_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let quad = NegHalfSquaredNorm;
        let pairs: Vec<(SimplexPoint, SimplexPoint)> = (0..50)
            .map(|_| {
                (
                    sample::interior_point(3, &mut rng),
                    sample::interior_point(3, &mut rng),
                )
            })
            .collect();
        let sup = |alpha: f64| {
            pairs
                .iter()
                .map(|(p, q)| {
                    (l_alpha(&quad, alpha, q, p).unwrap() - bregman(&quad, q, p).unwrap()).abs()
                })
                .fold(0.0f64, f64::max)
        };
        let sups = [sup(1e-1), sup(1e-2), sup(1e-3)];
        assert!(sups[0] > sups[1] && sups[1] > sups[2]);
        // linear rate: each decade of α shrinks the gap by roughly a decade
        for w in sups.windows(2) {
            let ratio = w[0] / w[1];
            assert!((6.0..14.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn metric_matrix_examples() {
        let quad = NegHalfSquaredNorm;
        let bary = SimplexPoint::barycenter(3);
        let g = metric_matrix(&quad, DivergenceKind::Bregman, &bary);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(g.entry(i, j), expected, epsilon = 1e-15);
            }
        }

        let cross = CrossEntropy::equal_weight(3);
        let g = metric_matrix(&cross, DivergenceKind::Bregman, &bary);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 3.0 } else { 0.0 };
                assert_abs_diff_eq!(g.entry(i, j), expected, epsilon = 1e-12);
            }
        }

        // L subtracts the rank-one term ∇φ∇φᵀ, all ones at the barycenter;
        // on tangent vectors it contributes nothing there (∇φ·v = 0), so the
        // quadratic form matches the Bregman one.
        let g = metric_matrix(&cross, DivergenceKind::L, &bary);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 2.0 } else { -1.0 };
                assert_abs_diff_eq!(g.entry(i, j), expected, epsilon = 1e-12);
            }
        }
        let v = TangentVector::new(alloc::vec![1.0, -1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g.quadratic_form(&v), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn metric_matrix_quadratic_order() {
        // the quadratic form must reproduce D[p+εv : p] to O(ε³); this pins
        // the sign of the rank-one gradient term away from the barycenter
        let cross = CrossEntropy::equal_weight(3);
        let p = sp(&[0.5, 0.25, 0.25]);
        let v = TangentVector::new(alloc::vec![1.0, -1.0, 0.0]).unwrap();
        for kind in [DivergenceKind::L, DivergenceKind::LAlpha(0.5)] {
            let g = metric_matrix(&cross, kind, &p);
            let form = g.quadratic_form(&v);
            let mut residuals = Vec::new();
            for eps in [1e-2, 5e-3, 2.5e-3] {
                let q = SimplexPoint::new(
                    p.weights()
                        .iter()
                        .zip(v.components())
                        .map(|(w, c)| w + eps * c)
                        .collect(),
                )
                .unwrap();
                let d = evaluate(&cross, kind, &q, &p).unwrap();
                residuals.push((d - 0.5 * eps * eps * form).abs());
            }
            for w in residuals.windows(2) {
                let ratio = w[0] / w[1];
                assert!((6.0..10.0).contains(&ratio), "ratio {ratio}");
            }
        }
    }

    #[test]
    fn quadratic_form_positive_on_tangents() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let cross = CrossEntropy::equal_weight(4);
        let kinds = [
            DivergenceKind::Bregman,
            DivergenceKind::L,
            DivergenceKind::LAlpha(0.5),
        ];
        for kind in kinds {
            for _ in 0..50 {
                let p = sample::interior_point_bounded(4, 0.02, &mut rng);
                let v = sample::tangent_vector(4, 1.0, &mut rng);
                let g = metric_matrix(&cross, kind, &p);
                assert!(g.quadratic_form(&v) > 0.0);
            }
        }
    }

    #[test]
    fn nonnegativity_and_identity_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let cross = CrossEntropy::equal_weight(3);
        let diversity = Diversity::new(0.5).unwrap();
        let quad = NegHalfSquaredNorm;
        let phis: [&dyn GeneratingFunction; 3] = [&cross, &diversity, &quad];
        let kinds = [
            DivergenceKind::Bregman,
            DivergenceKind::L,
            DivergenceKind::LAlpha(0.5),
        ];
        for phi in phis {
            for kind in kinds {
                for _ in 0..300 {
                    let p = sample::interior_point(3, &mut rng);
                    let q = sample::interior_point(3, &mut rng);
                    let d = evaluate(phi, kind, &q, &p).unwrap();
                    assert!(d >= -NONNEGATIVITY_TOL);
                    assert_eq!(evaluate(phi, kind, &p, &p).unwrap(), 0.0);
                }
            }
        }
    }
}
