//! Seeded verification suite driving the numerical oracles of every module:
//! decomposition residuals, divergence axioms, the Bregman limit, transport
//! optimality, the Pythagorean sign test, the scale-function ODE and the
//! concavity sampler. Deterministic in the seed; prints one line per check.

use fgp_core::divergence::{self, DivergenceKind, NONNEGATIVITY_TOL};
use fgp_core::genfun::{
    check_alpha_exp_concavity, fd_gradient, CrossEntropy, Diversity, GeneratingFunction,
    NegHalfSquaredNorm, FD_GRADIENT_STEP,
};
use fgp_core::geomtrans::{
    brute_force_assignment, check_cyclical_monotonicity, multiplicative_transport_map,
    pythagorean_check, scale_ode_residual, AffineScale, CostFunction, ExpScale, GeomError,
    ScaleFunction, ShiftedLogScale, SqrtScale, SquareScale, TransportSample,
};
use fgp_core::market::SimplexPoint;
use fgp_core::sample;
use fgp_core::strategy::{decompose, GenerationScheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Debug switch: evaluates the L^(α) divergence with the opposite sign
    /// on the `φ(q) − φ(p)` term inside the decomposition and Bregman-limit
    /// checks. Those checks must then fail; everything else is unaffected.
    pub flip_lalpha_sign: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            flip_lalpha_sign: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Worst margin observed, in the check's own units (see `note`).
    pub worst: f64,
    pub note: String,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {}: {} cases, worst {:.3e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst,
            self.note
        )
    }
}

pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed)
}

/// Runs every check with RNG streams derived from `options.seed`.
pub fn verify_suite(options: &VerifyOptions) -> Vec<CheckOutcome> {
    vec![
        decomposition_check(options),
        gradient_check(options),
        divergence_axioms_check(options),
        bregman_limit_check(options),
        transport_check(options),
        pythagorean_suite_check(options),
        scale_ode_check(),
        concavity_check(options),
    ]
}

fn rng_for(options: &VerifyOptions, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(options.seed.wrapping_mul(0x9e37_79b9).wrapping_add(stream))
}

fn builtins() -> (CrossEntropy, Diversity, NegHalfSquaredNorm) {
    (
        CrossEntropy::equal_weight(3),
        Diversity::new(0.5).expect("valid exponent"),
        NegHalfSquaredNorm,
    )
}

fn flipped_increment(
    phi: &dyn GeneratingFunction,
    alpha: f64,
    q: &SimplexPoint,
    p: &SimplexPoint,
) -> f64 {
    // the sign-flipped variant differs from the implemented divergence by
    // exactly 2(φ(q) − φ(p))
    divergence::l_alpha(phi, alpha, q, p).expect("admissible step")
        + 2.0 * (phi.eval(q.weights()) - phi.eval(p.weights()))
}

fn decomposition_check(options: &VerifyOptions) -> CheckOutcome {
    let mut rng = rng_for(options, 1);
    let diversity = Diversity::new(0.5).expect("valid exponent");
    let quad = NegHalfSquaredNorm;
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [2usize, 3, 5] {
        let path = sample::random_path(n, 400, 0.05, &mut rng);
        let cross = CrossEntropy::equal_weight(n);
        let phis: [&dyn GeneratingFunction; 3] = [&cross, &diversity, &quad];
        for phi in phis {
            let schemes = [
                GenerationScheme::multiplicative(1.0).expect("positive start"),
                GenerationScheme::additive(1.0),
                GenerationScheme::alpha_c(0.5, 2.0, 1.0).expect("valid parameters"),
            ];
            for scheme in schemes {
                let report = decompose(phi, &scheme, &path).expect("run succeeds");
                let scale = report.lhs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                let mut residual = report.residual / scale;
                if options.flip_lalpha_sign {
                    if let fgp_core::strategy::SchemeKind::AlphaC { alpha, .. } = scheme.kind {
                        // recompute the divergence sum with the flipped sign
                        let mut cumulative = 0.0;
                        let mut flipped_worst = 0.0f64;
                        for t in 1..report.lhs.len() {
                            cumulative +=
                                flipped_increment(phi, alpha, path.point(t), path.point(t - 1));
                            let gap = (report.lhs[t] - report.drift[t] - cumulative).abs();
                            flipped_worst = flipped_worst.max(gap / scale);
                        }
                        residual = flipped_worst;
                    }
                }
                worst = worst.max(residual);
                cases += 1;
            }
        }
    }
    CheckOutcome {
        name: "decomposition_residual",
        passed: worst < 1e-9,
        cases,
        worst,
        note: "max relative residual, threshold 1e-9".into(),
    }
}

fn gradient_check(options: &VerifyOptions) -> CheckOutcome {
    let mut rng = rng_for(options, 2);
    let (cross, diversity, quad) = builtins();
    let phis: [&dyn GeneratingFunction; 3] = [&cross, &diversity, &quad];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for phi in phis {
        for _ in 0..100 {
            let p = sample::interior_point_bounded(3, 0.02, &mut rng);
            let analytic = phi.gradient(p.weights());
            let numeric = fd_gradient(phi, p.weights(), FD_GRADIENT_STEP);
            for (a, b) in analytic.iter().zip(&numeric) {
                worst = worst.max((a - b).abs());
            }
            cases += 1;
        }
    }
    CheckOutcome {
        name: "gradient_finite_difference",
        passed: worst < 1e-6,
        cases,
        worst,
        note: "max |analytic - central difference|, threshold 1e-6".into(),
    }
}

fn divergence_axioms_check(options: &VerifyOptions) -> CheckOutcome {
    let mut rng = rng_for(options, 3);
    let (cross, diversity, quad) = builtins();
    let phis: [&dyn GeneratingFunction; 3] = [&cross, &diversity, &quad];
    let kinds = [
        DivergenceKind::Bregman,
        DivergenceKind::L,
        DivergenceKind::LAlpha(0.5),
    ];
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut passed = true;
    for phi in phis {
        for kind in kinds {
            for _ in 0..1000 {
                let p = sample::interior_point(3, &mut rng);
                let q = sample::interior_point(3, &mut rng);
                let d = divergence::evaluate(phi, kind, &q, &p).expect("admissible pair");
                worst = worst.max(-d);
                if d < -NONNEGATIVITY_TOL {
                    passed = false;
                }
                if divergence::evaluate(phi, kind, &p, &p).expect("diagonal") != 0.0 {
                    passed = false;
                }
                cases += 1;
            }
        }
        // scaling identity
        for alpha in [0.25, 0.5, 1.0] {
            for _ in 0..200 {
                let p = sample::interior_point(3, &mut rng);
                let q = sample::interior_point(3, &mut rng);
                let direct = divergence::l_alpha(phi, alpha, &q, &p).expect("admissible");
                let scaled =
                    divergence::l_alpha_via_scaling(phi, alpha, &q, &p).expect("admissible");
                let gap = (direct - scaled).abs();
                worst = worst.max(gap);
                if gap > 1e-12 {
                    passed = false;
                }
                cases += 1;
            }
        }
    }
    CheckOutcome {
        name: "divergence_axioms",
        passed,
        cases,
        worst,
        note: "max of negativity margin and scaling-identity gap".into(),
    }
}

fn bregman_limit_check(options: &VerifyOptions) -> CheckOutcome {
    let cross = CrossEntropy::equal_weight(2);
    let quad = NegHalfSquaredNorm;
    let phis: [&dyn GeneratingFunction; 2] = [&cross, &quad];
    let grid: Vec<SimplexPoint> = (0..20)
        .map(|i| {
            let x = 0.05 + 0.9 * (i as f64) / 19.0;
            SimplexPoint::new(vec![x, 1.0 - x]).expect("interior")
        })
        .collect();
    let mut worst_ratio_gap = 0.0f64;
    let mut cases = 0;
    let mut passed = true;
    for phi in phis {
        let sup = |alpha: f64| -> f64 {
            let mut sup = 0.0f64;
            for p in &grid {
                for q in &grid {
                    let la = if options.flip_lalpha_sign {
                        flipped_increment(phi, alpha, q, p)
                    } else {
                        divergence::l_alpha(phi, alpha, q, p).expect("admissible")
                    };
                    let b = divergence::bregman(phi, q, p).expect("concave");
                    sup = sup.max((la - b).abs());
                }
            }
            sup
        };
        let sups = [sup(1e-1), sup(1e-2), sup(1e-3)];
        cases += 3 * grid.len() * grid.len();
        if !(sups[0] > sups[1] && sups[1] > sups[2]) {
            passed = false;
        }
        for w in sups.windows(2) {
            let ratio = w[0] / w[1];
            worst_ratio_gap = worst_ratio_gap.max((ratio - 10.0).abs());
            if !(6.0..14.0).contains(&ratio) {
                passed = false;
            }
        }
    }
    CheckOutcome {
        name: "bregman_limit",
        passed,
        cases,
        worst: worst_ratio_gap,
        note: "deviation of decade ratios from 10 (linear rate)".into(),
    }
}

fn transport_check(options: &VerifyOptions) -> CheckOutcome {
    let mut rng = rng_for(options, 4);
    let (cross, diversity, quad) = builtins();
    let phis: [&dyn GeneratingFunction; 3] = [&cross, &diversity, &quad];
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut passed = true;
    for trial in 0..20 {
        let phi = phis[trial % 3];
        let sources: Vec<SimplexPoint> =
            (0..5).map(|_| sample::interior_point(3, &mut rng)).collect();
        let log_targets: Vec<Vec<f64>> = sources
            .iter()
            .map(|p| multiplicative_transport_map(phi, p).expect("interior"))
            .collect();
        let grad_targets: Vec<Vec<f64>> =
            sources.iter().map(|p| phi.gradient(p.weights())).collect();
        for (cost, targets) in [
            (CostFunction::LogDot, &log_targets),
            (CostFunction::InnerProduct, &grad_targets),
        ] {
            let best = brute_force_assignment(cost, &sources, targets).expect("small instance");
            let identity: f64 = sources
                .iter()
                .zip(targets.iter())
                .map(|(s, t)| cost.cost(s.weights(), t).expect("domain"))
                .sum();
            let margin = identity - best.cost;
            worst = worst.max(margin);
            if margin > 1e-12 {
                passed = false;
            }
            cases += 1;
        }
    }
    // cyclical monotonicity over a larger pair set
    for (cost, use_gradient) in [(CostFunction::LogDot, false), (CostFunction::InnerProduct, true)]
    {
        let phi: &dyn GeneratingFunction = &quad;
        let sources: Vec<SimplexPoint> =
            (0..7).map(|_| sample::interior_point(3, &mut rng)).collect();
        let targets: Vec<Vec<f64>> = sources
            .iter()
            .map(|p| {
                if use_gradient {
                    phi.gradient(p.weights())
                } else {
                    multiplicative_transport_map(phi, p).expect("interior")
                }
            })
            .collect();
        let sample = TransportSample::new(sources, targets).expect("aligned");
        let report =
            check_cyclical_monotonicity(cost, &sample, 4).expect("within enumeration cap");
        worst = worst.max(-report.min_slack);
        if !report.passed {
            passed = false;
        }
        cases += report.cycles_checked;
    }
    CheckOutcome {
        name: "transport_optimality",
        passed,
        cases,
        worst,
        note: "max optimality/monotonicity violation, threshold 1e-12".into(),
    }
}

fn pythagorean_suite_check(options: &VerifyOptions) -> CheckOutcome {
    let mut rng = rng_for(options, 5);
    let quad = NegHalfSquaredNorm;
    let mut cases = 0;
    let mut passed = true;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = sample::interior_point_bounded(3, 0.02, &mut rng);
        let q = sample::interior_point_bounded(3, 0.02, &mut rng);
        let r = sample::interior_point_bounded(3, 0.02, &mut rng);
        let report = match pythagorean_check(&quad, &p, &q, &r) {
            Ok(report) => report,
            Err(GeomError::CoincidentPoints) => continue,
            Err(_) => {
                passed = false;
                continue;
            }
        };
        cases += 1;
        let sign_consistent = if report.delta.abs() <= 1e-10 && report.angle.abs() <= 1e-10 {
            true
        } else {
            (report.delta >= 0.0) == (report.angle >= 0.0)
        };
        if !sign_consistent {
            passed = false;
            worst = worst.max(report.delta.abs().min(report.angle.abs()));
        }
    }
    // hand-derived equality triplet
    let q = SimplexPoint::barycenter(3);
    let shift = |deltas: [f64; 3]| {
        SimplexPoint::new(
            q.weights()
                .iter()
                .zip(deltas.iter())
                .map(|(w, d)| w + d)
                .collect(),
        )
        .expect("interior")
    };
    let p = shift([0.1, -0.1, 0.0]);
    let r = shift([0.05, 0.05, -0.1]);
    let report = pythagorean_check(&quad, &p, &q, &r).expect("distinct");
    cases += 1;
    if report.delta.abs() > 1e-12 || !report.equality {
        passed = false;
        worst = worst.max(report.delta.abs());
    }
    CheckOutcome {
        name: "pythagorean",
        passed,
        cases,
        worst,
        note: "sign mismatches and equality-triplet gap".into(),
    }
}

fn scale_ode_check() -> CheckOutcome {
    let mut worst_family = 0.0f64;
    let mut cases = 0;
    let mut passed = true;
    for slope in [0.5, 1.0, 2.0] {
        for intercept in [-1.0, 0.0, 2.0] {
            for x in [0.1, 1.0, 5.0] {
                let residual = scale_ode_residual(
                    &AffineScale { slope, intercept },
                    x,
                )
                .expect("increasing");
                worst_family = worst_family.max(residual.abs());
                cases += 1;
            }
        }
    }
    for shift in [0.0, 0.5, 2.0] {
        for coefficient in [0.25, 1.0, 3.0] {
            for x in [0.1, 1.0, 5.0] {
                let residual = scale_ode_residual(
                    &ShiftedLogScale {
                        shift,
                        coefficient,
                        offset: -0.7,
                    },
                    x,
                )
                .expect("increasing");
                worst_family = worst_family.max(residual.abs());
                cases += 1;
            }
        }
    }
    if worst_family >= 1e-8 {
        passed = false;
    }
    // the foils must be bounded away from zero at x = 1
    let foils: [(&str, &dyn ScaleFunction); 3] = [
        ("x^2", &SquareScale),
        ("exp(x)", &ExpScale),
        ("sqrt(x)", &SqrtScale),
    ];
    let mut foil_note = String::new();
    for (name, foil) in foils {
        let residual = scale_ode_residual(foil, 1.0).expect("increasing at 1");
        cases += 1;
        if residual.abs() < 0.05 {
            passed = false;
        }
        foil_note.push_str(&format!(" {name}={residual:.3}"));
    }
    CheckOutcome {
        name: "scale_ode",
        passed,
        cases,
        worst: worst_family,
        note: format!("family residual max; foils:{foil_note}"),
    }
}

fn concavity_check(options: &VerifyOptions) -> CheckOutcome {
    let mut rng = rng_for(options, 6);
    let mut cases = 0;
    let mut passed = true;
    let cross = CrossEntropy::equal_weight(2);
    let quad = NegHalfSquaredNorm;
    let probes: Vec<(&dyn GeneratingFunction, f64, usize)> = vec![
        (&cross, 1.0, 2),
        (&quad, 1.0, 3),
        (&quad, 1e-6, 2),
    ];
    for (phi, alpha, n) in probes {
        let check = check_alpha_exp_concavity(phi, alpha, n, 200, &mut rng);
        cases += check.samples_checked;
        if !check.passed {
            passed = false;
        }
    }
    for lambda in [0.25, 0.5, 0.75] {
        let diversity = Diversity::new(lambda).expect("valid exponent");
        let check = check_alpha_exp_concavity(&diversity, 1.0, 3, 200, &mut rng);
        cases += check.samples_checked;
        if !check.passed {
            passed = false;
        }
    }
    CheckOutcome {
        name: "concavity",
        passed,
        cases,
        worst: 0.0,
        note: "builtin catalog at declared alpha budgets".into(),
    }
}
