mod common;

use momentkit::orthopoly::recurrence_coefficients_partial;
use momentkit::sequence::Generator;
use momentkit::weyl::DeterminacyVerdict;
use momentkit::{
    circle_equation_residual, circle_parametrization, determinacy_diagnostics, nevanlinna_partial,
    nevanlinna_transform, recurrence_coefficients, stieltjes_point, weyl_circle, DiscreteMeasure,
    MomentSequence, Phi, RecurrenceCoefficients,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ATOMS: usize = 8;
const DEPTH: usize = 6;

fn setup(seed: u64) -> (DiscreteMeasure, RecurrenceCoefficients) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = common::random_measure(&mut rng, ATOMS, -3, 3);
    let s = mu.moments(2 * ATOMS + 2);
    let c = recurrence_coefficients_partial(&s).unwrap();
    (mu, c)
}

fn lambda_strategy() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, 0.1f64..10.0, any::<bool>())
        .prop_map(|(re, im, up)| Complex64::new(re, if up { im } else { -im }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parametrized_points_satisfy_circle_equation(seed in any::<u64>(), lambda in lambda_strategy(), tau in -1e3f64..1e3, n in 1usize..=DEPTH) {
        let (_, c) = setup(seed);
        let circle = weyl_circle(&c, lambda, n).unwrap();
        let w = circle_parametrization(&c, lambda, tau, n).unwrap();
        let scale = circle.radius.max(w.norm());
        prop_assert!((((w - circle.center).norm() - circle.radius) / scale).abs() < 1e-9);
        // the quadratic form is scaled by Σ|P_k|^2 = 1/(2 r |Im λ|)
        let res = circle_equation_residual(&c, lambda, w, n).unwrap();
        let form_scale = (w.norm() / circle.radius).powi(2) / lambda.im.abs();
        prop_assert!(res.abs() < 1e-8 * form_scale.max(1.0), "residual {}", res);
    }

    #[test]
    fn circles_nest_and_contain_the_transform(seed in any::<u64>(), lambda in lambda_strategy()) {
        let (mu, c) = setup(seed);
        let target = stieltjes_point(&mu, lambda).unwrap();
        let circles: Vec<_> = (1..=DEPTH).map(|n| weyl_circle(&c, lambda, n).unwrap()).collect();
        for pair in circles.windows(2) {
            prop_assert!(pair[1].radius < pair[0].radius);
            let gap = (pair[1].center - pair[0].center).norm();
            prop_assert!(gap <= pair[0].radius - pair[1].radius + 1e-9);
        }
        for k in &circles {
            prop_assert!(k.contains(target, 1e-9));
            // disks stay in the half-plane of λ
            prop_assert!(k.center.im * lambda.im.signum() >= k.radius * (1.0 - 1e-9));
        }
    }

    #[test]
    fn nevanlinna_determinant_is_one(seed in any::<u64>(), z in lambda_strategy(), n in 1usize..=DEPTH) {
        let (_, c) = setup(seed);
        let quad = nevanlinna_partial(&c, z, n).unwrap();
        let det = quad.determinant();
        let size = (quad.a * quad.d).norm().max(1.0);
        prop_assert!((det - 1.0).norm() < 1e-9 * size, "AD - BC = {}", det);
    }

    #[test]
    fn nevanlinna_points_are_solutions_of_the_truncated_problem(seed in any::<u64>(), z in lambda_strategy(), t in -50.0f64..50.0) {
        let (_, c) = setup(seed);
        let quad = nevanlinna_partial(&c, z, DEPTH).unwrap();
        let w = nevanlinna_transform(&quad, Phi::Constant(t)).unwrap();
        let circle = weyl_circle(&c, z, DEPTH - 1).unwrap();
        prop_assert!(circle.contains(w, 1e-7 * w.norm().max(1.0)));
    }
}

#[test]
fn nevanlinna_transform_at_infinity_is_finite() {
    let s = MomentSequence::hilbert(15);
    let c = recurrence_coefficients(&s, 6).unwrap();
    let quad = nevanlinna_partial(&c, Complex64::new(0.2, 1.0), 5).unwrap();
    let w = nevanlinna_transform(&quad, Phi::Infinity).unwrap();
    assert!(w.norm().is_finite());
}

#[test]
fn stieltjes_wigert_circles_stay_open() {
    let g = Generator::StieltjesWigert {
        q: momentkit::scalar::ratio(1, 2),
    };
    let s = MomentSequence::from_generator(g, 41).unwrap();
    let c = recurrence_coefficients_partial(&s).unwrap();
    let probe = Complex64::new(0.0, 1.0);
    let report = determinacy_diagnostics(&s, &c, probe, 20).unwrap();
    assert_eq!(report.verdict, DeterminacyVerdict::LikelyIndeterminate);
    let radii = &report.radius_sequence;
    assert!(radii.windows(2).all(|w| w[1] <= w[0]));
    assert!(*radii.last().unwrap() > 1e-6);
}

#[test]
fn finite_rank_is_certified() {
    let s = MomentSequence::geometric(momentkit::scalar::ratio(1, 3), 21);
    let c = recurrence_coefficients_partial(&s).unwrap();
    let report = determinacy_diagnostics(&s, &c, Complex64::new(0.0, 1.0), 10).unwrap();
    assert_eq!(report.verdict, DeterminacyVerdict::DeterminateCertified);
    assert_eq!(report.finite_rank, Some(1));
}
