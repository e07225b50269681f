//! Property tests for the structural invariants: simplex construction,
//! self-financing machinery, value-process consistency, divergence axioms
//! and one-step decomposition exactness on arbitrary inputs.

use fgp_core::divergence::{self, DivergenceKind, NONNEGATIVITY_TOL};
use fgp_core::genfun::{CrossEntropy, GeneratingFunction, NegHalfSquaredNorm};
use fgp_core::market::{
    check_self_financing, self_financing_correction, value_multiplicative, value_step,
    weights_from_strategy, MarketPath, ShareVector, SimplexPoint,
};
use fgp_core::strategy::{decompose, run_strategy, GenerationScheme};
use proptest::prelude::*;

fn caps(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..10.0, n..=n)
}

fn path(n: usize, max_steps: usize) -> impl Strategy<Value = MarketPath> {
    prop::collection::vec(caps(n), 2..=max_steps + 1).prop_map(|rows| {
        MarketPath::new(
            rows.iter()
                .map(|row| SimplexPoint::from_caps(row).unwrap())
                .collect(),
        )
        .unwrap()
    })
}

fn share_rows(n: usize, len: usize) -> impl Strategy<Value = Vec<ShareVector>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, n..=n), len..=len)
        .prop_map(|rows| rows.into_iter().map(|r| ShareVector::new(r).unwrap()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn caps_always_land_on_simplex(raw in (2usize..6).prop_flat_map(caps)) {
        let p = SimplexPoint::from_caps(&raw).unwrap();
        prop_assert!(p.min_weight() > 0.0);
        prop_assert!((p.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn constant_shares_never_move_value(
        (p, q, c, v) in (2usize..6).prop_flat_map(|n| (caps(n), caps(n), -3.0f64..3.0, -2.0f64..2.0))
    ) {
        let p = SimplexPoint::from_caps(&p).unwrap();
        let q = SimplexPoint::from_caps(&q).unwrap();
        let eta = ShareVector::new(vec![c; p.n()]).unwrap();
        let next = value_step(&eta, &p, &q, v).unwrap();
        prop_assert!((next - v).abs() <= 1e-12);
    }

    #[test]
    fn correction_always_restores_self_financing(
        (path, raw, c) in (2usize..5, 2usize..8).prop_flat_map(|(n, steps)| {
            (path(n, steps), share_rows(n, steps + 1), -3.0f64..3.0)
        }).prop_filter("aligned", |(p, r, _)| p.len() == r.len())
    ) {
        let corrected = self_financing_correction(&raw, &path, c).unwrap();
        prop_assert!(check_self_financing(&corrected, &path).unwrap() < 1e-10);
        // per-step returns are untouched
        for t in 0..path.steps() {
            let diff: Vec<f64> = path
                .point(t + 1)
                .weights()
                .iter()
                .zip(path.point(t).weights())
                .map(|(next, now)| next - now)
                .collect();
            prop_assert!((raw[t].dot(&diff) - corrected[t].dot(&diff)).abs() <= 1e-12);
        }
    }

    #[test]
    fn multiplicative_and_additive_values_agree(
        path in (2usize..5).prop_flat_map(|n| path(n, 12))
    ) {
        // additively generated run expressed through portfolio weights must
        // reproduce its own value series in product form
        let quad = NegHalfSquaredNorm;
        let scheme = GenerationScheme::additive(1.0);
        let run = run_strategy(&quad, &scheme, &path).unwrap();
        prop_assume!(run.values.values().iter().all(|v| *v > 0.05));
        let weights: Vec<Vec<f64>> = (0..path.steps())
            .map(|t| {
                weights_from_strategy(&run.states[t].eta, path.point(t), run.values.get(t))
                    .unwrap()
            })
            .collect();
        let product = value_multiplicative(&path, &weights, 1.0).unwrap();
        prop_assert_eq!(product.first_nonpositive, None);
        for (a, b) in product.series.values().iter().zip(run.values.values()) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn correction_of_generated_strategies_is_identity(
        path in (2usize..5).prop_flat_map(|n| path(n, 10))
    ) {
        // additively generated sequences are already self-financing, so the
        // correction has zero defect and C = 0 leaves them untouched
        let quad = NegHalfSquaredNorm;
        let run = run_strategy(&quad, &GenerationScheme::additive(1.0), &path).unwrap();
        let raw: Vec<ShareVector> = run.states.iter().map(|s| s.eta.clone()).collect();
        let corrected = self_financing_correction(&raw, &path, 0.0).unwrap();
        for (c, r) in corrected.iter().zip(&raw) {
            for (a, b) in c.shares().iter().zip(r.shares()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn divergences_are_nonnegative_and_vanish_on_diagonal(
        (p, q) in (2usize..5).prop_flat_map(|n| (caps(n), caps(n)))
    ) {
        let p = SimplexPoint::from_caps(&p).unwrap();
        let q = SimplexPoint::from_caps(&q).unwrap();
        let cross = CrossEntropy::equal_weight(p.n());
        let quad = NegHalfSquaredNorm;
        let phis: [&dyn GeneratingFunction; 2] = [&cross, &quad];
        for phi in phis {
            for kind in [
                DivergenceKind::Bregman,
                DivergenceKind::L,
                DivergenceKind::LAlpha(0.5),
            ] {
                let d = divergence::evaluate(phi, kind, &q, &p).unwrap();
                prop_assert!(d >= -NONNEGATIVITY_TOL);
                prop_assert_eq!(divergence::evaluate(phi, kind, &p, &p).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn one_step_decomposition_is_exact(
        (p, q, v0) in (2usize..5).prop_flat_map(|n| (caps(n), caps(n), 0.2f64..3.0))
    ) {
        let p = SimplexPoint::from_caps(&p).unwrap();
        let q = SimplexPoint::from_caps(&q).unwrap();
        let path = MarketPath::new(vec![p.clone(), q]).unwrap();
        let cross = CrossEntropy::equal_weight(p.n());
        let schemes = [
            GenerationScheme::multiplicative(v0).unwrap(),
            GenerationScheme::additive(v0),
            GenerationScheme::alpha_c(0.5, 1.0, v0).unwrap(),
        ];
        for scheme in schemes {
            let report = decompose(&cross, &scheme, &path).unwrap();
            prop_assert!(report.truncated_at.is_none());
            prop_assert!(report.residual <= 1e-12, "residual {}", report.residual);
        }
    }

    #[test]
    fn closed_paths_never_lose_in_transformed_scale(
        rows in (2usize..5).prop_flat_map(|n| prop::collection::vec(caps(n), 2..10))
    ) {
        let mut points: Vec<SimplexPoint> = rows
            .iter()
            .map(|row| SimplexPoint::from_caps(row).unwrap())
            .collect();
        points.push(points[0].clone());
        let path = MarketPath::new(points).unwrap();
        let cross = CrossEntropy::equal_weight(path.n());
        let scheme = GenerationScheme::multiplicative(1.0).unwrap();
        let report = decompose(&cross, &scheme, &path).unwrap();
        // drift cancels on a cycle: transformed gain is a sum of divergences
        prop_assert!(*report.lhs.last().unwrap() >= -1e-10);
    }
}
