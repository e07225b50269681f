//! Optimal-transport monotonicity oracles, dually flat Bregman geometry,
//! the three-point rebalancing comparison, and the scale-function ODE.
//!
//! The transport side certifies that generated maps are cyclically monotone
//! for their cost (log inner product for the multiplicative map, plain inner
//! product for gradient maps) by exhaustive enumeration — these are
//! verification oracles, not solvers, so sample sizes stay small. The
//! geometry side implements primal/dual coordinates of a concave generating
//! function, the induced Riemannian metric, and the generalized Pythagorean
//! sign test that governs whether an intermediate rebalance helps.

use alloc::vec::Vec;

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::divergence::bregman;
use crate::genfun::GeneratingFunction;
use crate::market::{MarketPath, SimplexPoint, TangentVector};
use crate::strategy::{
    self, decompose, GenerationScheme, SchemeKind, StrategyError,
};

/// Largest point count accepted by the exhaustive transport oracles.
pub const MAX_BRUTE_FORCE_POINTS: usize = 8;

/// One-sided slack allowed in the cyclical-monotonicity inequality.
pub const MONOTONICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("strategy error: {0}")]
    Strategy(#[from] StrategyError),
    #[error("divergence error: {0}")]
    Divergence(#[from] crate::divergence::DivergenceError),
    #[error("cost log(p·q) requires p·q > 0, got {0}")]
    CostDomain(f64),
    #[error("sources and targets differ in length: {sources} vs {targets}")]
    SampleMismatch { sources: usize, targets: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{n} points exceed the exhaustive-enumeration cap {MAX_BRUTE_FORCE_POINTS}")]
    TooManyPoints { n: usize },
    #[error("cycle length {max_cycle} exceeds sample size {n}")]
    CycleLengthExceedsSample { max_cycle: usize, n: usize },
    #[error("transport map denominator is {0}, expected positive")]
    ZeroDenominator(f64),
    #[error("gradient inversion did not converge (residual {residual} after {iterations} iterations)")]
    InversionFailed { residual: f64, iterations: usize },
    #[error("Hessian is singular at the evaluation point")]
    SingularHessian,
    #[error("points must be pairwise distinct")]
    CoincidentPoints,
    #[error("rebalancing comparison is implemented for the additive scheme only")]
    UnsupportedScheme,
    #[error("scale function must be strictly increasing: g'({x}) = {slope}")]
    NotIncreasing { x: f64, slope: f64 },
}

/// Transport cost functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostFunction {
    /// `c(p, q) = log(p · q)` on `Δ_n × Δ̄_n`.
    LogDot,
    /// `c(p, v) = p · v` on `Δ_n × Rⁿ`.
    InnerProduct,
}

impl CostFunction {
    pub fn cost(&self, source: &[f64], target: &[f64]) -> Result<f64, GeomError> {
        if source.len() != target.len() {
            return Err(GeomError::DimensionMismatch {
                left: source.len(),
                right: target.len(),
            });
        }
        let dot: f64 = source.iter().zip(target).map(|(a, b)| a * b).sum();
        match self {
            CostFunction::LogDot => {
                if dot <= 0.0 {
                    return Err(GeomError::CostDomain(dot));
                }
                Ok(dot.ln())
            }
            CostFunction::InnerProduct => Ok(dot),
        }
    }
}

/// Paired sources and target images for the transport oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSample {
    sources: Vec<SimplexPoint>,
    targets: Vec<Vec<f64>>,
}

impl TransportSample {
    pub fn new(sources: Vec<SimplexPoint>, targets: Vec<Vec<f64>>) -> Result<Self, GeomError> {
        if sources.len() != targets.len() {
            return Err(GeomError::SampleMismatch {
                sources: sources.len(),
                targets: targets.len(),
            });
        }
        for (s, t) in sources.iter().zip(&targets) {
            if s.n() != t.len() {
                return Err(GeomError::DimensionMismatch {
                    left: s.n(),
                    right: t.len(),
                });
            }
        }
        Ok(Self { sources, targets })
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn sources(&self) -> &[SimplexPoint] {
        &self.sources
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }
}

/// The transport map induced by the multiplicative portfolio map:
/// `T_i(p) = (π_i(p)/p_i) / Σ_j (π_j(p)/p_j)`.
pub fn multiplicative_transport_map(
    phi: &dyn GeneratingFunction,
    p: &SimplexPoint,
) -> Result<Vec<f64>, GeomError> {
    let map = strategy::multiplicative_portfolio_map(phi, p)?;
    let ratios: Vec<f64> = map.iter().zip(p.weights()).map(|(m, w)| m / w).collect();
    let total: f64 = ratios.iter().sum();
    if total <= 0.0 {
        return Err(GeomError::ZeroDenominator(total));
    }
    Ok(ratios.iter().map(|r| r / total).collect())
}

/// Result of the exhaustive cyclical-monotonicity check.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub passed: bool,
    /// Smallest value of `Σ c(x_k, y_{k+1}) − Σ c(x_k, y_k)` over all cycles.
    pub min_slack: f64,
    /// A cycle attaining the minimal slack (source indices in order).
    pub worst_cycle: Vec<usize>,
    pub cycles_checked: usize,
}

/// Checks `Σ c(x_{i_k}, y_{i_k}) ≤ Σ c(x_{i_k}, y_{i_{k+1}})` over every
/// cycle of 2..=`max_cycle` distinct indices (both orientations, rotations
/// collapsed). Passing certifies the sampled graph is cyclically monotone
/// up to [`MONOTONICITY_TOL`].
pub fn check_cyclical_monotonicity(
    cost: CostFunction,
    sample: &TransportSample,
    max_cycle: usize,
) -> Result<MonotonicityReport, GeomError> {
    let n = sample.len();
    if n > MAX_BRUTE_FORCE_POINTS {
        return Err(GeomError::TooManyPoints { n });
    }
    if max_cycle > n || max_cycle < 2 {
        return Err(GeomError::CycleLengthExceedsSample { max_cycle, n });
    }
    // cost matrix c(x_i, y_j)
    let mut costs = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            costs[i * n + j] =
                cost.cost(sample.sources()[i].weights(), &sample.targets()[j])?;
        }
    }
    let mut report = MonotonicityReport {
        passed: true,
        min_slack: f64::INFINITY,
        worst_cycle: Vec::new(),
        cycles_checked: 0,
    };
    let indices: Vec<usize> = (0..n).collect();
    for m in 2..=max_cycle {
        for_each_combination(&indices, m, &mut |subset| {
            // fix the smallest index first; permute the rest, keeping both
            // cycle orientations
            let mut rest: Vec<usize> = subset[1..].to_vec();
            for_each_permutation(&mut rest, &mut |tail| {
                let mut cycle = Vec::with_capacity(m);
                cycle.push(subset[0]);
                cycle.extend_from_slice(tail);
                let mut assigned = 0.0;
                let mut shifted = 0.0;
                for k in 0..m {
                    let i = cycle[k];
                    let next = cycle[(k + 1) % m];
                    assigned += costs[i * n + i];
                    shifted += costs[i * n + next];
                }
                let slack = shifted - assigned;
                report.cycles_checked += 1;
                if slack < report.min_slack {
                    report.min_slack = slack;
                    report.worst_cycle = cycle;
                }
            });
        });
    }
    report.passed = report.min_slack >= -MONOTONICITY_TOL;
    Ok(report)
}

/// The minimal-cost assignment found by exhaustive permutation search.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub permutation: Vec<usize>,
    pub cost: f64,
}

/// Exhaustively minimizes `Σ c(x_i, y_{σ(i)})` over permutations `σ`.
/// Capped at [`MAX_BRUTE_FORCE_POINTS`] points; this is the optimality
/// oracle against which generated maps are judged.
pub fn brute_force_assignment(
    cost: CostFunction,
    sources: &[SimplexPoint],
    targets: &[Vec<f64>],
) -> Result<Assignment, GeomError> {
    let n = sources.len();
    if n != targets.len() {
        return Err(GeomError::SampleMismatch {
            sources: n,
            targets: targets.len(),
        });
    }
    if n > MAX_BRUTE_FORCE_POINTS {
        return Err(GeomError::TooManyPoints { n });
    }
    let mut costs = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            costs[i * n + j] = cost.cost(sources[i].weights(), &targets[j])?;
        }
    }
    let mut best: Option<Assignment> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    for_each_permutation(&mut perm, &mut |sigma| {
        let total: f64 = (0..n).map(|i| costs[i * n + sigma[i]]).sum();
        if best.as_ref().is_none_or(|b| total < b.cost) {
            best = Some(Assignment {
                permutation: sigma.to_vec(),
                cost: total,
            });
        }
    });
    Ok(best.expect("at least the identity permutation"))
}

fn for_each_combination(items: &[usize], m: usize, f: &mut dyn FnMut(&[usize])) {
    fn recurse(
        items: &[usize],
        m: usize,
        start: usize,
        current: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if current.len() == m {
            f(current);
            return;
        }
        for i in start..items.len() {
            current.push(items[i]);
            recurse(items, m, i + 1, current, f);
            current.pop();
        }
    }
    let mut current = Vec::with_capacity(m);
    recurse(items, m, 0, &mut current, f);
}

fn for_each_permutation(items: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    // Heap's algorithm, iterative form
    let n = items.len();
    if n == 0 {
        f(items);
        return;
    }
    let mut counters = alloc::vec![0usize; n];
    f(items);
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(counters[i], i);
            }
            f(items);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

/// Primal/dual coordinates of a concave generating function with an
/// invertible gradient: `p* = ∇φ(p)`, inverse by analytic formula when the
/// builtin provides one, otherwise by a damped Newton solve.
pub struct DualChart<'a> {
    phi: &'a dyn GeneratingFunction,
}

impl<'a> DualChart<'a> {
    pub fn new(phi: &'a dyn GeneratingFunction) -> Self {
        Self { phi }
    }

    /// `p ↦ p* = ∇φ(p)`.
    pub fn to_dual(&self, p: &SimplexPoint) -> Vec<f64> {
        self.phi.gradient(p.weights())
    }

    /// Inverse map `p* ↦ p`, starting the Newton iteration at `guess`.
    pub fn from_dual(&self, dual: &[f64], guess: &[f64]) -> Result<Vec<f64>, GeomError> {
        if let Some(inverse) = self.phi.gradient_inverse(dual) {
            return Ok(inverse);
        }
        newton_gradient_inverse(self.phi, dual, guess)
    }
}

fn newton_gradient_inverse(
    phi: &dyn GeneratingFunction,
    target: &[f64],
    guess: &[f64],
) -> Result<Vec<f64>, GeomError> {
    const MAX_ITERATIONS: usize = 50;
    const RESIDUAL_TOL: f64 = 1e-12;
    let n = target.len();
    if guess.len() != n {
        return Err(GeomError::DimensionMismatch {
            left: guess.len(),
            right: n,
        });
    }
    let mut x = guess.to_vec();
    let mut residual_norm = f64::INFINITY;
    for iteration in 0..MAX_ITERATIONS {
        if x.iter().any(|xi| !xi.is_finite() || xi.abs() > 1e9) {
            // iterates ran away: the target is outside the gradient's range
            return Err(GeomError::InversionFailed {
                residual: residual_norm,
                iterations: iteration,
            });
        }
        let grad = phi.gradient(&x);
        let residual: Vec<f64> = grad.iter().zip(target).map(|(g, t)| g - t).collect();
        residual_norm = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if residual_norm < RESIDUAL_TOL {
            return Ok(x);
        }
        let hessian = phi.hessian(&x);
        let rhs = DVector::from_column_slice(&residual);
        let step = hessian
            .lu()
            .solve(&rhs)
            .ok_or(GeomError::SingularHessian)?;
        // damped update: keep iterates strictly positive
        let mut damping = 1.0;
        loop {
            let candidate: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(i, xi)| xi - damping * step[i])
                .collect();
            if candidate.iter().all(|&c| c > 0.0) {
                x = candidate;
                break;
            }
            damping *= 0.5;
            if damping < 1e-8 {
                return Err(GeomError::InversionFailed {
                    residual: residual_norm,
                    iterations: MAX_ITERATIONS,
                });
            }
        }
    }
    Err(GeomError::InversionFailed {
        residual: residual_norm,
        iterations: MAX_ITERATIONS,
    })
}

/// Riemannian inner product `⟨u, v⟩_p = uᵀ (−Hess φ(p)) v` of tangent
/// vectors in primal coordinates.
pub fn riemannian_inner_product(
    phi: &dyn GeneratingFunction,
    p: &SimplexPoint,
    u: &TangentVector,
    v: &TangentVector,
) -> f64 {
    let h = phi.hessian(p.weights());
    let uu = DVector::from_column_slice(u.components());
    let vv = DVector::from_column_slice(v.components());
    -(uu.transpose() * h * vv)[(0, 0)]
}

/// Outcome of the generalized Pythagorean test at the corner `q` of the
/// triplet `(p, q, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PythagoreanReport {
    /// `D[r:q] + D[q:p] − D[r:p]`.
    pub delta: f64,
    /// Riemannian inner product at `q` between the primal-geodesic velocity
    /// toward `p` and the dual-geodesic velocity toward `r`.
    pub angle: f64,
    /// `delta ≥ 0` (within 1e-10): the two-rebalance route is not worse.
    pub inequality_holds: bool,
    /// Both `delta` and `angle` vanish within 1e-10: the geodesics meet
    /// orthogonally at `q`.
    pub equality: bool,
    pub bregman_r_q: f64,
    pub bregman_q_p: f64,
    pub bregman_r_p: f64,
}

/// Computes the Pythagorean gap `Δ = D[r:q] + D[q:p] − D[r:p]` for the
/// Bregman divergence of `φ`, together with the Riemannian angle term at
/// `q`. The dual-geodesic velocity `r* − q*` is pushed to primal
/// coordinates through the inverse-gradient Jacobian (a Hessian solve)
/// before the angle is measured. The sign of `Δ` matches the sign of the
/// angle term, with equality exactly at orthogonality.
pub fn pythagorean_check(
    phi: &dyn GeneratingFunction,
    p: &SimplexPoint,
    q: &SimplexPoint,
    r: &SimplexPoint,
) -> Result<PythagoreanReport, GeomError> {
    let distinct = |a: &SimplexPoint, b: &SimplexPoint| {
        a.weights()
            .iter()
            .zip(b.weights())
            .any(|(x, y)| x != y)
    };
    if !(distinct(p, q) && distinct(q, r) && distinct(p, r)) {
        return Err(GeomError::CoincidentPoints);
    }
    let bregman_r_q = bregman(phi, r, q)?;
    let bregman_q_p = bregman(phi, q, p)?;
    let bregman_r_p = bregman(phi, r, p)?;
    let delta = bregman_r_q + bregman_q_p - bregman_r_p;

    let hessian = phi.hessian(q.weights());
    let chart = DualChart::new(phi);
    let q_star = chart.to_dual(q);
    let r_star = chart.to_dual(r);
    let dual_velocity = DVector::from_iterator(
        q.n(),
        r_star.iter().zip(&q_star).map(|(r_, q_)| r_ - q_),
    );
    // primal pushforward: J_{∇φ*}(q*) = Hess φ(q)^{-1}
    let primal_velocity = hessian
        .clone()
        .lu()
        .solve(&dual_velocity)
        .ok_or(GeomError::SingularHessian)?;
    let primal_toward_p = DVector::from_iterator(
        q.n(),
        p.weights()
            .iter()
            .zip(q.weights())
            .map(|(pi, qi)| pi - qi),
    );
    let angle = -(primal_toward_p.transpose() * hessian * primal_velocity)[(0, 0)];

    Ok(PythagoreanReport {
        delta,
        angle,
        inequality_holds: delta >= -1e-10,
        equality: delta.abs() <= 1e-10 && angle.abs() <= 1e-10,
        bregman_r_q,
        bregman_q_p,
        bregman_r_p,
    })
}

/// Which rebalancing schedule earned more over `[t0, t2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Better {
    /// Rebalancing only at `t0` (single leg `p → r`).
    A,
    /// Rebalancing at the intermediate time as well (`p → q → r`).
    B,
    Tie,
}

/// Values of the two schedules for the additive scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct RebalancingComparison {
    /// Terminal value when rebalancing only at the start.
    pub value_a: f64,
    /// Terminal value when also rebalancing at the intermediate point.
    pub value_b: f64,
    pub better: Better,
}

/// Runs the additive strategy over `p → r` (schedule a) and `p → q → r`
/// (schedule b) and reports which terminal value is larger. Schedule b wins
/// exactly when the Pythagorean inequality holds at `q`.
pub fn rebalancing_comparison(
    phi: &dyn GeneratingFunction,
    p: &SimplexPoint,
    q: &SimplexPoint,
    r: &SimplexPoint,
    scheme: &GenerationScheme,
) -> Result<RebalancingComparison, GeomError> {
    if scheme.kind != SchemeKind::Additive {
        return Err(GeomError::UnsupportedScheme);
    }
    let direct = MarketPath::new(alloc::vec![p.clone(), r.clone()])
        .expect("two points form a path");
    let via_q = MarketPath::new(alloc::vec![p.clone(), q.clone(), r.clone()])
        .expect("three points form a path");
    let value_a = decompose(phi, scheme, &direct)?.values.last();
    let value_b = decompose(phi, scheme, &via_q)?.values.last();
    let better = if (value_b - value_a).abs() <= 1e-12 {
        Better::Tie
    } else if value_b > value_a {
        Better::B
    } else {
        Better::A
    };
    Ok(RebalancingComparison {
        value_a,
        value_b,
        better,
    })
}

/// A scalar function with three derivatives, candidate scale function for
/// the value decomposition.
pub trait ScaleFunction {
    fn eval(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
    fn d3(&self, x: f64) -> f64;
}

/// `g(x) = c₁ x + c₂`, `c₁ > 0`: the additive scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineScale {
    pub slope: f64,
    pub intercept: f64,
}

impl ScaleFunction for AffineScale {
    fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
    fn d1(&self, _x: f64) -> f64 {
        self.slope
    }
    fn d2(&self, _x: f64) -> f64 {
        0.0
    }
    fn d3(&self, _x: f64) -> f64 {
        0.0
    }
}

/// `g(x) = c₂ log(c₁ + x) + c₃`, `c₁ ≥ 0`, `c₂ > 0`: the scale of the
/// `(α, C)` family with `c₂ = 1/α` and `c₁ = C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedLogScale {
    pub shift: f64,
    pub coefficient: f64,
    pub offset: f64,
}

impl ScaleFunction for ShiftedLogScale {
    fn eval(&self, x: f64) -> f64 {
        self.coefficient * (self.shift + x).ln() + self.offset
    }
    fn d1(&self, x: f64) -> f64 {
        self.coefficient / (self.shift + x)
    }
    fn d2(&self, x: f64) -> f64 {
        -self.coefficient / ((self.shift + x) * (self.shift + x))
    }
    fn d3(&self, x: f64) -> f64 {
        2.0 * self.coefficient / ((self.shift + x) * (self.shift + x) * (self.shift + x))
    }
}

/// `g(x) = x²`: not an admissible scale (fails the ODE).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SquareScale;

impl ScaleFunction for SquareScale {
    fn eval(&self, x: f64) -> f64 {
        x * x
    }
    fn d1(&self, x: f64) -> f64 {
        2.0 * x
    }
    fn d2(&self, _x: f64) -> f64 {
        2.0
    }
    fn d3(&self, _x: f64) -> f64 {
        0.0
    }
}

/// `g(x) = eˣ`: not an admissible scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExpScale;

impl ScaleFunction for ExpScale {
    fn eval(&self, x: f64) -> f64 {
        x.exp()
    }
    fn d1(&self, x: f64) -> f64 {
        x.exp()
    }
    fn d2(&self, x: f64) -> f64 {
        x.exp()
    }
    fn d3(&self, x: f64) -> f64 {
        x.exp()
    }
}

/// `g(x) = √x`: not an admissible scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SqrtScale;

impl ScaleFunction for SqrtScale {
    fn eval(&self, x: f64) -> f64 {
        x.sqrt()
    }
    fn d1(&self, x: f64) -> f64 {
        0.5 / x.sqrt()
    }
    fn d2(&self, x: f64) -> f64 {
        -0.25 / (x * x.sqrt())
    }
    fn d3(&self, x: f64) -> f64 {
        0.375 / (x * x * x.sqrt())
    }
}

/// Residual of the scale-function ODE, `g′(x) g‴(x) − 2 (g″(x))²`.
///
/// Vanishes exactly on the two admitted families (affine and shifted-log)
/// and is bounded away from zero for other shapes. Errors when `g` is not
/// strictly increasing at `x`.
pub fn scale_ode_residual(g: &dyn ScaleFunction, x: f64) -> Result<f64, GeomError> {
    let slope = g.d1(x);
    if slope <= 0.0 {
        return Err(GeomError::NotIncreasing { x, slope });
    }
    Ok(slope * g.d3(x) - 2.0 * g.d2(x) * g.d2(x))
}
