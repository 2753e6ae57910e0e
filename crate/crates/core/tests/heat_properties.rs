use proptest::prelude::*;
use robin_core::geometry::{RadialGeometry, RobinParameter};
use robin_core::heat::{field_checks, kernel_spectral, propagate, TimeGrid};
use robin_core::sturm::solve;

const N: usize = 513;
const K: usize = 120;

fn ball(dim: usize, kappa: f64, alpha: f64) -> RadialGeometry {
    RadialGeometry::space_form(dim, kappa, 1.0, RobinParameter::Finite(alpha)).unwrap()
}

fn times() -> TimeGrid {
    TimeGrid::new(vec![0.05, 0.2, 0.8]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn kernel_is_positive(dim in 3usize..=5, kappa in -1.0f64..1.0, alpha in 0.05f64..4.0) {
        let g = ball(dim, kappa, alpha);
        let f = kernel_spectral(&solve(&g, N, K).unwrap(), &times()).unwrap();
        prop_assert!(f.min_value() > 0.0);
        let checks = field_checks(&f);
        prop_assert!(checks.mass_nonincreasing.is_acceptable());
        prop_assert!(checks.decreasing.is_acceptable());
    }

    #[test]
    fn kernel_decreases_in_alpha(kappa in -1.0f64..1.0, a in 0.05f64..2.0, factor in 1.2f64..3.0) {
        let lo = kernel_spectral(&solve(&ball(3, kappa, a * factor), N, K).unwrap(), &times()).unwrap();
        let hi = kernel_spectral(&solve(&ball(3, kappa, a), N, K).unwrap(), &times()).unwrap();
        for (x, y) in lo.values.iter().flatten().zip(hi.values.iter().flatten()) {
            prop_assert!(x < y, "{x} !< {y}");
        }
    }

    #[test]
    fn mass_decays_like_first_mode(kappa in -1.0f64..1.0, alpha in 0.2f64..3.0) {
        let spectrum = solve(&ball(3, kappa, alpha), N, K).unwrap();
        let tg = TimeGrid::new(vec![4.0, 5.0]).unwrap();
        let f = kernel_spectral(&spectrum, &tg).unwrap();
        let rate = (f.mass[0] / f.mass[1]).ln();
        prop_assert!((rate - spectrum.lambda1()).abs() < 1e-3 * spectrum.lambda1());
    }
}

#[test]
fn semigroup_holds_on_curved_balls() {
    for kappa in [-1.0, 1.0] {
        let spectrum = solve(&ball(3, kappa, 1.0), N, K).unwrap();
        let f = kernel_spectral(&spectrum, &TimeGrid::new(vec![0.1, 0.3]).unwrap()).unwrap();
        let stepped = propagate(&spectrum, &f.values[0], 0.2);
        let scale = f.values[1].iter().cloned().fold(0.0, f64::max);
        let gap = stepped.iter().zip(&f.values[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-9 * scale, "κ = {kappa}: {gap}");
    }
}
