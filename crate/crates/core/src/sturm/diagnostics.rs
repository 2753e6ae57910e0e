//! Shape diagnostics of the first Robin eigenfunction on space-form balls.

use serde::{Deserialize, Serialize};

use super::SpectralData;
use crate::geometry::{s_closed_form, sn, sn_log_derivative, Family, RadialGeometry, RobinParameter};
use crate::numerics::{derivative, polyfit, EndTreatment, PolyFit};
use crate::{Error, Result, Verdict};

/// Nodes near the center where `g` is replaced by its polynomial fit.
const CENTER_SKIP: usize = 16;
const G_ABS_TOL: f64 = 1e-5;
const G2_REL_TOL: f64 = 1e-2;

/// First eigenfunction, normalized to `u(0) = 1`, with derived profiles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigfuncDiagnostics {
    pub geom: RadialGeometry,
    pub lambda: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// `g(r) = m (sn'/sn) u' + λu`; the center value is extrapolated.
    pub g: Vec<f64>,
    pub s: Vec<f64>,
    /// `dw/ds` and `d²w/ds²` for `w(s(r)) = u(r)`.
    pub w_s: Vec<f64>,
    pub w_ss: Vec<f64>,
    /// Leading nodes whose `w_ss` came from extrapolation.
    pub extrapolated_nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FirstModeReport {
    /// `u' < 0` on `(0, R]`.
    pub decreasing: Verdict,
    pub max_du: f64,
    /// `(log u)'` nonincreasing.
    pub log_concave: Verdict,
    pub max_log_increment: f64,
    /// `u' ≥ -αu` on `(0, R]`.
    pub robin_slope: Verdict,
    pub min_robin_slack: f64,
    /// `|u'(R) + αu(R)|`, zero for the exact eigenfunction.
    pub boundary_gap: f64,
    pub noise_floor: f64,
    pub verdict: Verdict,
}

/// Classifies the largest violation `worst` (positive means violated).
pub(crate) fn sign_verdict(worst: f64, floor: f64) -> Verdict {
    if worst < 0.0 {
        Verdict::Pass
    } else if worst <= floor {
        Verdict::Inconclusive
    } else {
        Verdict::Fail
    }
}

fn require_space_form(geom: &RadialGeometry) -> Result<()> {
    if geom.family != Family::RealSpaceForm {
        return Err(Error::Precondition(format!(
            "first-mode diagnostics need a real space form, got {}",
            geom.label()
        )));
    }
    Ok(())
}

fn require_positive_alpha(geom: &RadialGeometry) -> Result<f64> {
    match geom.alpha {
        RobinParameter::Finite(a) if a > 0.0 => Ok(a),
        _ => Err(Error::Precondition(format!("needs a finite Robin parameter α > 0, got {}", geom.alpha))),
    }
}

fn center_window(r: &[f64], upto: usize) -> (Vec<f64>, Vec<usize>) {
    let idx: Vec<usize> = (1..=upto).collect();
    (idx.iter().map(|&j| r[j]).collect(), idx)
}

fn fit_center(r: &[f64], g: &[f64], nodes: usize) -> PolyFit {
    let (xs, idx) = center_window(r, nodes);
    let ys: Vec<f64> = idx.iter().map(|&j| g[j]).collect();
    polyfit(&xs, &ys, 6).expect("window larger than degree")
}

fn center_nodes(n: usize, h: f64, radius: f64) -> usize {
    ((0.1 * radius / h) as usize).clamp(24, 400).min(n / 3)
}

/// Builds the first-mode profiles and checks `u' < 0`, `(log u)'` decreasing
/// and `u' ≥ -αu`.
pub fn first_mode_diagnostics(spectrum: &SpectralData) -> Result<(EigfuncDiagnostics, FirstModeReport)> {
    let geom = &spectrum.geom;
    require_space_form(geom)?;
    let alpha = require_positive_alpha(geom)?;
    let n = spectrum.grid.n;
    let h = spectrum.grid.h();
    let r = spectrum.grid.nodes();
    let lambda = spectrum.lambda1();
    let u0 = spectrum.modes[0][0];
    if !(u0 > 0.0) {
        return Err(Error::Precondition("first mode vanishes at the center".into()));
    }
    let u: Vec<f64> = spectrum.modes[0].iter().map(|x| x / u0).collect();
    let du = derivative(&u, h, 1, EndTreatment::Even);
    let k = geom.kappa.value();
    let m = geom.dim as f64;

    let mut g = vec![0.0; n];
    for j in 1..n {
        g[j] = m * sn_log_derivative(k, r[j]) * du[j] + lambda * u[j];
    }
    let fit = fit_center(&r, &g, center_nodes(n, h, geom.radius));
    g[0] = fit.derivative_at_zero(0);

    let s: Vec<f64> = r.iter().map(|&x| s_closed_form(k, x)).collect();
    // w'' = -g/sn². The fitted center offset g(0) + g'(0) r, zero for the exact
    // eigenfunction, is removed first so that the O(h²) bias of g is not
    // amplified by 1/sn² near the center; the first nodes use the fit itself.
    let (p0, p1) = (fit.derivative_at_zero(0), fit.derivative_at_zero(1));
    let skip = CENTER_SKIP.min(n / 8);
    let mut w_s = vec![0.0; n];
    let mut w_ss = vec![0.0; n];
    let ddu = derivative(&u, h, 2, EndTreatment::Even);
    w_s[0] = ddu[0];
    w_ss[0] = -0.5 * fit.derivative_at_zero(2);
    for j in 1..n {
        let sj = sn(k, r[j]);
        w_s[j] = du[j] / sj;
        let gj = if j < skip { fit.eval(r[j]) } else { g[j] };
        w_ss[j] = -(gj - p0 - p1 * r[j]) / (sj * sj);
    }

    let du_scale = du.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let noise_floor = 1e-6 * du_scale;
    let max_du = du[1..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let logd: Vec<f64> = du.iter().zip(&u).map(|(d, v)| d / v).collect();
    let max_log_increment = logd.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let slack: Vec<f64> = (1..n).map(|j| du[j] + alpha * u[j]).collect();
    let interior_min = slack[..n - 2].iter().cloned().fold(f64::INFINITY, f64::min);
    let boundary_gap = slack[n - 2].abs();

    let decreasing = sign_verdict(max_du, noise_floor);
    let log_concave = sign_verdict(max_log_increment, noise_floor);
    let robin_slope = {
        let interior = sign_verdict(-interior_min, noise_floor);
        let edge = if boundary_gap <= 1e-4 * du_scale { Verdict::Pass } else { Verdict::Fail };
        interior.and(edge)
    };
    let verdict = decreasing.and(log_concave).and(robin_slope);
    Ok((
        EigfuncDiagnostics {
            geom: geom.clone(),
            lambda,
            r,
            u,
            du,
            g,
            s,
            w_s,
            w_ss,
            extrapolated_nodes: skip,
        },
        FirstModeReport {
            decreasing,
            max_du,
            log_concave,
            max_log_increment,
            robin_slope,
            min_robin_slack: interior_min,
            boundary_gap,
            noise_floor,
            verdict,
        },
    ))
}

/// `λ₁ ≥ mκ` on spheres with `√κ tan(√κ R) ≤ α`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    pub gate: bool,
    pub lambda1: f64,
    pub bound: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

pub fn lambda_lower_bound_check(geom: &RadialGeometry, spectrum: &SpectralData) -> Result<LowerBoundCheck> {
    require_space_form(geom)?;
    let k = geom.kappa.value();
    if !(k > 0.0) {
        return Err(Error::Precondition(format!("the lower bound λ₁ ≥ mκ needs κ > 0, got {k}")));
    }
    if !geom.alpha.is_positive() {
        return Err(Error::Precondition("the lower bound λ₁ ≥ mκ needs α > 0".into()));
    }
    let bound = geom.dim as f64 * k;
    let lambda1 = spectrum.lambda1();
    let gate = geom.arctan_gate();
    let verdict = if !gate {
        Verdict::NotApplicable
    } else if lambda1 >= bound - 1e-8 * bound.max(1.0) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(LowerBoundCheck { gate, lambda1, bound, margin: lambda1 - bound, verdict })
}

/// Limits of `g`, `g'`, `g''` at the center.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GLimits {
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    /// `-2λ(λ - κm)/(m(m+2)) · u(0)`.
    pub expected_g2: f64,
    pub g2_error: f64,
    pub verdict: Verdict,
    /// Two extrapolation windows disagree by more than ten tolerances.
    pub unstable: bool,
}

/// `-2λ(λ - κm)/(m(m+2)) · u(0)`.
pub fn g_second_derivative_formula(lambda: f64, kappa: f64, m: f64, u0: f64) -> f64 {
    -2.0 * lambda * (lambda - kappa * m) / (m * (m + 2.0)) * u0
}

pub fn g_limit_diagnostics(diag: &EigfuncDiagnostics, lambda: f64, geom: &RadialGeometry) -> Result<GLimits> {
    require_space_form(geom)?;
    let n = diag.r.len();
    let h = diag.r[1];
    let nodes = center_nodes(n, h, geom.radius);
    let wide = fit_center(&diag.r, &diag.g, nodes);
    let narrow = fit_center(&diag.r, &diag.g, (nodes / 2).max(12));
    let (g0, g1, g2) = (wide.derivative_at_zero(0), wide.derivative_at_zero(1), wide.derivative_at_zero(2));
    let m = geom.dim as f64;
    let expected_g2 = g_second_derivative_formula(lambda, geom.kappa.value(), m, diag.u[0]);
    let g2_error = if expected_g2 != 0.0 { (g2 - expected_g2).abs() / expected_g2.abs() } else { g2.abs() };
    let unstable = (narrow.derivative_at_zero(0) - g0).abs() > 10.0 * G_ABS_TOL
        || (narrow.derivative_at_zero(1) - g1).abs() > 10.0 * G_ABS_TOL
        || (narrow.derivative_at_zero(2) - g2).abs() > 10.0 * G2_REL_TOL * g2.abs().max(G_ABS_TOL);
    let ok = g0.abs() < G_ABS_TOL && g1.abs() < G_ABS_TOL && g2_error < G2_REL_TOL;
    Ok(GLimits {
        g0,
        g1,
        g2,
        expected_g2,
        g2_error,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        unstable,
    })
}

/// Signs of `w'` and `w''` in the `s` variable and the transformed Robin condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WConvexity {
    pub decreasing: Verdict,
    pub max_w_s: f64,
    pub convex: Verdict,
    pub min_w_ss: f64,
    /// `w''(0)`, from the center extrapolation.
    pub center_w_ss: f64,
    /// `sn(R) w'(s(R)) + α w(s(R))`.
    pub boundary_residual: f64,
    pub boundary: Verdict,
    pub center_extrapolated: bool,
    pub verdict: Verdict,
}

pub fn w_convexity_check(diag: &EigfuncDiagnostics) -> Result<WConvexity> {
    let geom = &diag.geom;
    require_space_form(geom)?;
    let alpha = require_positive_alpha(geom)?;
    if !geom.arctan_gate() {
        return Err(Error::Precondition(format!(
            "R = {} exceeds arctan(α/√κ)/√κ for κ = {}, α = {alpha}",
            geom.radius,
            geom.kappa.value()
        )));
    }
    let n = diag.r.len();
    let k = geom.kappa.value();
    let scale_s = diag.w_s.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    // w'' vanishes identically on the gate boundary (u = cos √κr there), so its
    // noise floor uses the flat-space center value λ²/(m(m+2)) as scale.
    let m = geom.dim as f64;
    let scale_ss = diag.lambda * diag.lambda / (m * (m + 2.0));
    let max_w_s = diag.w_s[1..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_w_ss = diag.w_ss.iter().cloned().fold(f64::INFINITY, f64::min);
    let decreasing = sign_verdict(max_w_s, 1e-6 * scale_s);
    let convex = sign_verdict(-min_w_ss, 1e-3 * scale_ss);
    let boundary_residual = sn(k, geom.radius) * diag.w_s[n - 1] + alpha * diag.u[n - 1];
    let boundary = if boundary_residual.abs() <= 1e-4 * scale_s * sn(k, geom.radius).max(1.0) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(WConvexity {
        decreasing,
        max_w_s,
        convex,
        min_w_ss,
        center_w_ss: diag.w_ss[0],
        boundary_residual,
        boundary,
        center_extrapolated: diag.extrapolated_nodes > 0,
        verdict: decreasing.and(convex).and(boundary),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RobinParameter::Finite;
    use crate::sturm::solve;
    use std::f64::consts::PI;

    fn flat_spectrum() -> SpectralData {
        let g = RadialGeometry::space_form(3, 0.0, 1.0, Finite(1.0)).unwrap();
        solve(&g, 2049, 4).unwrap()
    }

    #[test]
    fn flat_first_mode_shape() {
        let spectrum = flat_spectrum();
        let (diag, rep) = first_mode_diagnostics(&spectrum).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        // u = sin(kr)/(kr) with k = π/2.
        let k = PI / 2.0;
        for j in (1..diag.r.len()).step_by(97) {
            let exact = (k * diag.r[j]).sin() / (k * diag.r[j]);
            assert!((diag.u[j] - exact).abs() < 1e-5);
        }
        let lim = g_limit_diagnostics(&diag, spectrum.lambda1(), &spectrum.geom).unwrap();
        assert!(lim.g0.abs() < 1e-5 && lim.g1.abs() < 1e-5, "{lim:?}");
        let oracle = -PI.powi(4) / 120.0;
        assert!((lim.g2 - oracle).abs() < 0.01 * oracle.abs(), "{lim:?}");
        let wc = w_convexity_check(&diag).unwrap();
        assert_eq!(wc.verdict, Verdict::Pass, "{wc:?}");
        // w''(0) = -g''(0)/2.
        assert!((wc.center_w_ss + oracle / 2.0).abs() < 0.01 * oracle.abs());
    }

    #[test]
    fn formula_vanishes_at_km() {
        assert_eq!(g_second_derivative_formula(3.0, 1.0, 3.0, 1.0), 0.0);
    }

    #[test]
    fn lower_bound_on_gate_boundary() {
        let g = RadialGeometry::space_form(2, 1.0, 2f64.atan(), Finite(2.0)).unwrap();
        let spectrum = solve(&g, 2049, 2).unwrap();
        let c = lambda_lower_bound_check(&g, &spectrum).unwrap();
        assert!(c.gate);
        assert_eq!(c.verdict, Verdict::Pass);
        assert!(c.margin > 0.0);
        let wide = g.with_radius(1.3).unwrap();
        let spectrum = solve(&wide, 2049, 2).unwrap();
        assert_eq!(lambda_lower_bound_check(&wide, &spectrum).unwrap().verdict, Verdict::NotApplicable);
        let flat = RadialGeometry::space_form(2, 0.0, 1.0, Finite(2.0)).unwrap();
        assert!(lambda_lower_bound_check(&flat, &spectrum).is_err());
    }

    #[test]
    fn convexity_gate_rejects_wide_sphere_balls() {
        let g = RadialGeometry::space_form(3, 1.0, 1.3, Finite(1.0)).unwrap();
        let spectrum = solve(&g, 1025, 2).unwrap();
        let (diag, _) = first_mode_diagnostics(&spectrum).unwrap();
        assert!(matches!(w_convexity_check(&diag), Err(Error::Precondition(_))));
    }
}
