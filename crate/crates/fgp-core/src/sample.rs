//! Seeded random interior points, tangent vectors and market paths.
//!
//! These samplers back the concavity diagnostics and the verification
//! suites. Distributions are chosen for coverage, not statistical fidelity:
//! interior points are flat-Dirichlet draws, boundary-biased points push
//! mass toward the simplex edges, and paths are multiplicative log-walks
//! that stay strictly interior.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::market::{MarketPath, SimplexPoint, TangentVector};

/// Uniform (flat Dirichlet) interior point with a small rejection floor so
/// that downstream logs and ratios stay well conditioned.
pub fn interior_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SimplexPoint {
    interior_point_bounded(n, 1e-9, rng)
}

/// Flat Dirichlet draw conditioned on `min weight ≥ floor`.
pub fn interior_point_bounded<R: Rng + ?Sized>(
    n: usize,
    floor: f64,
    rng: &mut R,
) -> SimplexPoint {
    assert!(n >= 2);
    assert!(floor > 0.0 && floor < 1.0 / n as f64);
    loop {
        let raw: Vec<f64> = (0..n)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let weights: Vec<f64> = raw.iter().map(|x| x / total).collect();
        if weights.iter().all(|&w| w >= floor) {
            return SimplexPoint::new(weights).expect("normalized positive weights");
        }
    }
}

/// Interior point biased toward the boundary of the simplex (cubed uniform
/// coordinates before normalization). Useful for catching concavity
/// violations that only show up near the edges.
pub fn boundary_biased_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SimplexPoint {
    assert!(n >= 2);
    loop {
        let raw: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                u * u * u
            })
            .collect();
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let weights: Vec<f64> = raw.iter().map(|x| x / total).collect();
        if weights.iter().all(|&w| w >= 1e-9) {
            return SimplexPoint::new(weights).expect("normalized positive weights");
        }
    }
}

/// Random tangent vector with components of order `scale`.
pub fn tangent_vector<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> TangentVector {
    assert!(n >= 2);
    let mut components: Vec<f64> = (0..n)
        .map(|_| scale * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    let mean: f64 = components.iter().sum::<f64>() / n as f64;
    for c in &mut components {
        *c -= mean;
    }
    TangentVector::new(components).expect("centered components sum to zero")
}

/// Market path of `steps` steps started from a flat Dirichlet point and
/// driven by a multiplicative log-walk: `w'_i ∝ w_i · exp(σ z_i)` with
/// `z_i` uniform on [−1, 1]. Increments scale with the current weights, so
/// the path stays strictly interior for any `σ`.
pub fn random_path<R: Rng + ?Sized>(
    n: usize,
    steps: usize,
    sigma: f64,
    rng: &mut R,
) -> MarketPath {
    let start = interior_point_bounded(n, 0.01 / n as f64, rng);
    path_from(start, steps, sigma, rng)
}

/// Same walk as [`random_path`], from a fixed starting point.
pub fn path_from<R: Rng + ?Sized>(
    start: SimplexPoint,
    steps: usize,
    sigma: f64,
    rng: &mut R,
) -> MarketPath {
    let n = start.n();
    let mut points = Vec::with_capacity(steps + 1);
    points.push(start);
    for _ in 0..steps {
        let current = points.last().expect("nonempty").weights();
        let raw: Vec<f64> = (0..n)
            .map(|i| {
                let z = 2.0 * rng.random::<f64>() - 1.0;
                current[i] * (sigma * z).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|x| x / total).collect();
        points.push(SimplexPoint::new(weights).expect("interior by construction"));
    }
    MarketPath::new(points).expect("at least the start point")
}

/// Closed path: a random walk whose final point is the exact start.
pub fn random_cycle<R: Rng + ?Sized>(
    n: usize,
    steps: usize,
    sigma: f64,
    rng: &mut R,
) -> MarketPath {
    assert!(steps >= 1);
    let open = random_path(n, steps - 1, sigma, rng);
    let mut points = open.points().to_vec();
    points.push(points[0].clone());
    MarketPath::new(points).expect("nonempty")
}
