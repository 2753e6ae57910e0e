//! Curvature-normalized sine `sn_κ` and the closed-form space-form substitution.

use crate::{Error, Result};

/// Below this value of `|κ| r²` the trigonometric forms are replaced by
/// their Taylor series so that sweeps through `κ = 0` stay smooth.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Sectional-curvature normalization `κ` (units 1/length²).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct CurvatureScale(f64);

impl CurvatureScale {
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::Domain(format!("curvature must be finite, got {kappa}")));
        }
        Ok(Self(kappa))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// First conjugate radius `π/√κ` for `κ > 0`, infinite otherwise.
    pub fn conjugate_radius(self) -> f64 {
        if self.0 > 0.0 {
            std::f64::consts::PI / self.0.sqrt()
        } else {
            f64::INFINITY
        }
    }
}

impl From<CurvatureScale> for f64 {
    fn from(k: CurvatureScale) -> f64 {
        k.0
    }
}

/// `sn_κ(r)`, without domain checks.
pub fn sn(kappa: f64, r: f64) -> f64 {
    let x = kappa * r * r;
    if x.abs() < SERIES_THRESHOLD {
        r * (1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0)))
    } else if kappa > 0.0 {
        let q = kappa.sqrt();
        (q * r).sin() / q
    } else {
        let q = (-kappa).sqrt();
        (q * r).sinh() / q
    }
}

/// `sn'_κ(r)`, without domain checks.
pub fn sn_prime(kappa: f64, r: f64) -> f64 {
    let x = kappa * r * r;
    if x.abs() < SERIES_THRESHOLD {
        1.0 - x / 2.0 * (1.0 - x / 12.0 * (1.0 - x / 30.0))
    } else if kappa > 0.0 {
        (kappa.sqrt() * r).cos()
    } else {
        ((-kappa).sqrt() * r).cosh()
    }
}

/// `sn'_κ(r) / sn_κ(r)` for `r > 0`.
pub fn sn_log_derivative(kappa: f64, r: f64) -> f64 {
    sn_prime(kappa, r) / sn(kappa, r)
}

/// Checked evaluation of `sn_κ` (`order = 0`) or `sn'_κ` (`order = 1`).
pub fn sn_eval(kappa: CurvatureScale, r: f64, order: u8) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("sn_κ needs r ≥ 0, got {r}")));
    }
    let k = kappa.value();
    if k > 0.0 && r > kappa.conjugate_radius() * (1.0 + 1e-15) {
        return Err(Error::Domain(format!(
            "sn_κ with κ = {k} is only used on [0, π/√κ] = [0, {}], got r = {r}",
            kappa.conjugate_radius()
        )));
    }
    match order {
        0 => Ok(sn(k, r)),
        1 => Ok(sn_prime(k, r)),
        _ => Err(Error::Domain(format!("sn_κ order must be 0 or 1, got {order}"))),
    }
}

/// Space-form substitution `s(r) = ∫_0^r sn_κ`, written without cancellation.
pub fn s_closed_form(kappa: f64, r: f64) -> f64 {
    let x = kappa * r * r;
    if x.abs() < SERIES_THRESHOLD {
        0.5 * r * r * (1.0 - x / 12.0 * (1.0 - x / 30.0 * (1.0 - x / 56.0)))
    } else if kappa > 0.0 {
        let h = (0.5 * kappa.sqrt() * r).sin();
        2.0 * h * h / kappa
    } else {
        let h = (0.5 * (-kappa).sqrt() * r).sinh();
        -2.0 * h * h / kappa
    }
}

/// Inverse of [`s_closed_form`].
pub fn r_of_s_closed_form(kappa: f64, s: f64) -> f64 {
    let s = s.max(0.0);
    if kappa == 0.0 {
        (2.0 * s).sqrt()
    } else if kappa > 0.0 {
        let arg = (0.5 * kappa * s).sqrt().min(1.0);
        2.0 * arg.asin() / kappa.sqrt()
    } else {
        let arg = (-0.5 * kappa * s).sqrt();
        2.0 * arg.asinh() / (-kappa).sqrt()
    }
}

/// Area of the unit sphere `S^k` in `R^{k+1}`.
pub fn unit_sphere_area(k: usize) -> f64 {
    use std::f64::consts::PI;
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * unit_sphere_area(k - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sn_examples() {
        let k0 = CurvatureScale::new(0.0).unwrap();
        assert_eq!(sn_eval(k0, 2.0, 0).unwrap(), 2.0);
        let k1 = CurvatureScale::new(1.0).unwrap();
        assert!((sn_eval(k1, PI / 2.0, 0).unwrap() - 1.0).abs() < 1e-15);
        let km = CurvatureScale::new(-1.0).unwrap();
        // sinh(1) from its power series, summed independently.
        let sinh1: f64 = (0..12)
            .map(|k| 1.0 / (1..=(2 * k + 1)).map(|i| i as f64).product::<f64>())
            .sum();
        assert!((sn_eval(km, 1.0, 0).unwrap() - sinh1).abs() < 1e-14);
        assert!((sinh1 - 1.175201).abs() < 1e-6);
    }

    #[test]
    fn sn_domain_errors() {
        let k1 = CurvatureScale::new(1.0).unwrap();
        assert!(sn_eval(k1, 4.0, 0).is_err());
        assert!(sn_eval(k1, -0.1, 1).is_err());
        assert!(sn_eval(k1, 0.3, 2).is_err());
        assert!(CurvatureScale::new(f64::NAN).is_err());
    }

    #[test]
    fn continuity_across_zero_curvature() {
        for &r in &[0.1, 0.7, 1.3] {
            let below = sn(-1e-9, r);
            let at = sn(0.0, r);
            let above = sn(1e-9, r);
            assert!((below - at).abs() < 1e-9 && (above - at).abs() < 1e-9);
            let threshold = SERIES_THRESHOLD / (r * r);
            // The series branch agrees with the trigonometric forms at the switch.
            let k = threshold * 0.999;
            let q = k.sqrt();
            assert!((sn(k, r) - (q * r).sin() / q).abs() < 1e-15);
            assert!((sn_prime(-k, r) - (q * r).cosh()).abs() < 1e-15);
            assert!((s_closed_form(k, r) - 2.0 * (0.5 * q * r).sin().powi(2) / k).abs() < 1e-14 * r * r);
        }
    }

    #[test]
    fn substitution_closed_forms() {
        assert!((s_closed_form(0.0, 2.0) - 2.0).abs() < 1e-15);
        assert!((s_closed_form(1.0, PI / 2.0) - 1.0).abs() < 1e-15);
        for &k in &[-1.0, -1e-8, 0.0, 1e-8, 0.5, 1.0] {
            for &r in &[0.01, 0.5, 1.0] {
                let back = r_of_s_closed_form(k, s_closed_form(k, r));
                assert!((back - r).abs() < 1e-12, "k={k} r={r}");
            }
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
    }
}
