use proptest::prelude::*;
use robin_core::compare::{
    eigen_compare, kernel_compare, random_gamma_fields, sub_supersolution_residual, transplant_check, BartaContext,
    CompareOptions, ComparisonScenario, Direction, Hypothesis, ResidualMode, TransplantScenario,
};
use robin_core::geometry::{RadialGeometry, RobinParameter, WarpingFunction};
use robin_core::heat::{kernel_spectral, TimeGrid};
use robin_core::sturm::{first_eigenvalue, solve};
use robin_core::Verdict;

const OPTS: CompareOptions = CompareOptions { nodes: 513, modes: 120 };

fn finite(a: f64) -> RobinParameter {
    RobinParameter::Finite(a)
}

fn scenario(dim: usize, k_lhs: f64, k_rhs: f64, alpha: f64) -> ComparisonScenario {
    let (hypothesis, direction) = if k_lhs >= k_rhs {
        (Hypothesis::RicciLower, Direction::LhsGeq)
    } else {
        (Hypothesis::SectUpper, Direction::LhsLeq)
    };
    ComparisonScenario {
        id: format!("k{k_lhs}-vs-k{k_rhs}"),
        lhs: RadialGeometry::warped(dim, WarpingFunction::sn_kappa(k_lhs), 1.0, finite(alpha)).unwrap(),
        rhs: RadialGeometry::space_form(dim, k_rhs, 1.0, finite(alpha)).unwrap(),
        direction,
        hypothesis,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10, ..ProptestConfig::default() })]

    #[test]
    fn curvature_brackets_the_kernel(k_lhs in -1.0f64..1.0, k_rhs in -1.0f64..1.0, alpha in 0.2f64..3.0) {
        let sc = scenario(3, k_lhs, k_rhs, alpha);
        let tg = TimeGrid::new(vec![0.05, 0.3, 1.0]).unwrap();
        let rep = kernel_compare(&sc, &tg, &OPTS).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::Pass, "{:#?}", rep);
    }

    #[test]
    fn eigenvalue_ordering_matches_curvature(k_lhs in -1.0f64..1.0, k_rhs in -1.0f64..1.0) {
        // Two dimensions need a finer grid to resolve the center.
        let opts = CompareOptions { nodes: 1025, modes: 8 };
        let rep = eigen_compare(&scenario(2, k_lhs, k_rhs, 1.0), &opts).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::Pass, "{:#?}", rep);
    }

    #[test]
    fn constant_gamma_transplants_pass(gamma in 0.01f64..=1.0, angle in -1.0f64..=1.0) {
        let model = RadialGeometry::space_form(3, 0.5, 1.0, finite(1.5)).unwrap();
        let ts = TransplantScenario::constant("p", model, gamma, angle);
        let tg = TimeGrid::new(vec![0.05, 0.3]).unwrap();
        let rep = transplant_check(&ts, &tg, &OPTS).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::Pass, "{:#?}", rep);
    }
}

#[test]
fn first_eigenvalue_is_nonincreasing_in_kappa() {
    for dim in [2, 3] {
        let lambdas: Vec<f64> = [-1.0, -0.5, 0.0, 0.5, 1.0]
            .iter()
            .map(|&k| first_eigenvalue(&RadialGeometry::space_form(dim, k, 1.0, finite(1.0)).unwrap(), 1025).unwrap())
            .collect();
        assert!(lambdas.windows(2).all(|w| w[1] < w[0]), "{lambdas:?}");
    }
}

#[test]
fn verdicts_survive_refinement() {
    let tg = TimeGrid::new(vec![0.1, 0.5]).unwrap();
    let sc = scenario(3, 0.7, 0.0, 1.0);
    let coarse = kernel_compare(&sc, &tg, &OPTS).unwrap();
    let fine = kernel_compare(&sc, &tg, &CompareOptions { nodes: 1025, modes: 200 }).unwrap();
    assert_eq!(coarse.verdict, Verdict::Pass);
    assert_eq!(fine.verdict, Verdict::Pass);
    assert_eq!(coarse.details["stable_under_refinement"], serde_json::Value::Bool(true));
}

#[test]
fn model_kernel_on_hyperbolic_ball_is_supersolution() {
    let flat = RadialGeometry::space_form(3, 0.0, 1.0, finite(1.0)).unwrap();
    let hyp = RadialGeometry::warped(3, WarpingFunction::sn_kappa(-1.0), 1.0, finite(1.0)).unwrap();
    let f = kernel_spectral(&solve(&flat, 1025, 200).unwrap(), &TimeGrid::new(vec![0.05, 0.2, 1.0]).unwrap()).unwrap();
    assert_eq!(sub_supersolution_residual(&f, &hyp, ResidualMode::Super, None).unwrap().verdict, Verdict::Pass);
    assert_eq!(sub_supersolution_residual(&f, &hyp, ResidualMode::Sub, None).unwrap().verdict, Verdict::Fail);
}

#[test]
fn seeded_gamma_sweep_passes_barta() {
    let model = RadialGeometry::space_form(3, 1.0, 0.8, finite(1.5)).unwrap();
    let ctx = BartaContext::new(&model, &OPTS).unwrap();
    for (i, g) in random_gamma_fields(11, 25, 9, 0.3, 1.0).into_iter().enumerate() {
        let ts = TransplantScenario { id: format!("g{i}"), model: model.clone(), gamma: g, boundary_angle: -0.5 };
        let rep = ctx.evaluate(&ts).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:#?}");
        let lower = rep.details["barta_quotient_min"].as_f64().unwrap();
        assert!(lower >= ctx.diag.lambda * (1.0 - 1e-4));
    }
}

#[test]
fn reports_round_trip_through_json() {
    let rep = eigen_compare(&scenario(3, 1.0, 0.0, 1.0), &OPTS).unwrap();
    let text = serde_json::to_string(&rep).unwrap();
    let back: robin_core::compare::ComparisonReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep);
}
