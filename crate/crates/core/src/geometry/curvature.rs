//! Curvature bounds of warped products `dr² + f(r)² g_{S^{m-1}}`.
//!
//! Radial sectional curvature `K_rad = -f''/f`, tangential sectional curvature
//! `K_tan = (1 - f'²)/f²`. Ricci in the radial direction is `(m-1) K_rad`, in a
//! tangential direction `K_rad + (m-2) K_tan`. Near `r = 0` both quotients
//! lose precision, so the first nodes are filled by quadratic extrapolation.

use serde::{Deserialize, Serialize};

use super::{CurvatureScale, WarpingFunction};
use crate::numerics::polyfit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureMode {
    /// `Ric ≥ (m-1) κ`.
    RicciLower,
    /// `K ≤ κ`.
    SectUpper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureCheck {
    pub mode: CurvatureMode,
    pub passed: bool,
    /// Smallest signed slack over the grid; negative when the bound fails.
    pub margin: f64,
    pub worst_r: f64,
    pub tolerance: f64,
    /// Value at `r = 0` came from extrapolation rather than a direct formula.
    pub center_extrapolated: bool,
    pub formulas: String,
}

const SAMPLES: usize = 2001;

/// Checks the warped-product curvature bound on `[0, radius]` for real
/// dimension `dim`.
pub fn hypothesis_check(
    warping: &WarpingFunction,
    dim: usize,
    radius: f64,
    kappa: CurvatureScale,
    mode: CurvatureMode,
) -> CurvatureCheck {
    let k = kappa.value();
    let m = dim as f64;
    let rs: Vec<f64> = (0..SAMPLES).map(|j| radius * j as f64 / (SAMPLES - 1) as f64).collect();
    // Slack per node: bound minus quantity (SectUpper) or quantity minus bound (RicciLower).
    let slack_at = |r: f64| -> f64 {
        let f = warping.value(r);
        let df = warping.first(r);
        let ddf = warping.second(r);
        let k_rad = -ddf / f;
        let k_tan = (1.0 - df * df) / (f * f);
        match mode {
            CurvatureMode::RicciLower => {
                let ric_rad = (m - 1.0) * k_rad;
                let ric_tan = k_rad + (m - 2.0) * k_tan;
                let ric = if dim >= 2 { ric_rad.min(ric_tan) } else { ric_rad };
                ric - (m - 1.0) * k
            }
            CurvatureMode::SectUpper => k - k_rad.max(k_tan),
        }
    };
    let mut slack: Vec<f64> = rs.iter().map(|&r| if r > 0.0 { slack_at(r) } else { f64::NAN }).collect();
    // The tangential quotient loses all precision near 0; replace the first
    // few nodes by a quadratic extrapolation from a clean window.
    let skip = 8;
    let xs: Vec<f64> = rs[skip..skip + 24].to_vec();
    let ys: Vec<f64> = slack[skip..skip + 24].to_vec();
    let fit = polyfit(&xs, &ys, 2).expect("enough nodes");
    for j in 0..skip {
        slack[j] = fit.eval(rs[j]);
    }
    let tolerance = 1e-8 * (1.0 + k.abs() * m);
    let (mut worst, mut worst_j) = (f64::INFINITY, 0);
    for (j, &v) in slack.iter().enumerate() {
        if v < worst {
            worst = v;
            worst_j = j;
        }
    }
    CurvatureCheck {
        mode,
        passed: worst >= -tolerance,
        margin: worst,
        worst_r: rs[worst_j],
        tolerance,
        center_extrapolated: true,
        formulas: "K_rad = -f''/f, K_tan = (1 - f'^2)/f^2, Ric_rad = (m-1) K_rad, Ric_tan = K_rad + (m-2) K_tan"
            .into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks(k: f64) -> CurvatureScale {
        CurvatureScale::new(k).unwrap()
    }

    #[test]
    fn sphere_warping_has_ricci_margin_m_minus_one() {
        let c = hypothesis_check(&WarpingFunction::sn_kappa(1.0), 3, 1.0, ks(0.0), CurvatureMode::RicciLower);
        assert!(c.passed);
        assert!((c.margin - 2.0).abs() < 1e-6);
    }

    #[test]
    fn hyperbolic_warping_below_flat() {
        let c = hypothesis_check(&WarpingFunction::sn_kappa(-1.0), 2, 1.0, ks(0.0), CurvatureMode::SectUpper);
        assert!(c.passed);
        assert!((c.margin - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flat_warping_fails_positive_ricci_bound() {
        let c = hypothesis_check(&WarpingFunction::sn_kappa(0.0), 3, 1.0, ks(1.0), CurvatureMode::RicciLower);
        assert!(!c.passed);
        assert!((c.margin + 2.0).abs() < 1e-6);
    }

    #[test]
    fn equal_curvature_passes_both_modes() {
        for k in [-1.0, 0.0, 0.5] {
            for mode in [CurvatureMode::RicciLower, CurvatureMode::SectUpper] {
                let c = hypothesis_check(&WarpingFunction::sn_kappa(k), 3, 1.0, ks(k), mode);
                assert!(c.passed, "{k} {mode:?} {}", c.margin);
            }
        }
    }

    #[test]
    fn sampled_warping_with_variable_curvature() {
        // f = r + r³: K_rad = -6r/(1+r²) ≤ 0 and K_tan = -(6 + 9r²) /(1+r²)² ≤ 0.
        let w = WarpingFunction::sampled_from(1.0, 401, |r| r + r.powi(3), |r| 1.0 + 3.0 * r * r, |r| 6.0 * r);
        let c = hypothesis_check(&w, 3, 1.0, ks(0.0), CurvatureMode::SectUpper);
        assert!(c.passed, "{}", c.margin);
        let c = hypothesis_check(&w, 3, 1.0, ks(0.0), CurvatureMode::RicciLower);
        assert!(!c.passed);
    }
}
