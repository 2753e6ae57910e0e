//! Radial reductions of model balls and warped products.
//!
//! Every geometry is reduced to a weight `w(r)` on `[0, R]` (the area of the
//! geodesic sphere of radius `r`, including the unit-sphere constant) and its
//! drift `c(r) = w'(r)/w(r)`, so that the radial Laplacian is
//! `u'' + c(r) u' = (1/w)(w u')'`.

mod curvature;
mod special;
mod substitution;

pub use curvature::{hypothesis_check, CurvatureCheck, CurvatureMode};
pub use special::{
    r_of_s_closed_form, s_closed_form, sn, sn_eval, sn_log_derivative, sn_prime,
    unit_sphere_area, CurvatureScale, SERIES_THRESHOLD,
};
pub use substitution::{substitution_for, Substitution};

use serde::{Deserialize, Serialize};

use crate::numerics::{interp_hermite, interp_linear};
use crate::{Error, Result};

/// Robin parameter `α` in `∂u/∂ν + αu = 0`; `Dirichlet` is the `α = ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobinParameter {
    Finite(f64),
    Dirichlet,
}

impl RobinParameter {
    pub fn finite(self) -> Option<f64> {
        match self {
            RobinParameter::Finite(a) => Some(a),
            RobinParameter::Dirichlet => None,
        }
    }

    pub fn is_dirichlet(self) -> bool {
        matches!(self, RobinParameter::Dirichlet)
    }

    /// `α > 0`, counting the Dirichlet limit as positive.
    pub fn is_positive(self) -> bool {
        match self {
            RobinParameter::Finite(a) => a > 0.0,
            RobinParameter::Dirichlet => true,
        }
    }
}

impl std::fmt::Display for RobinParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RobinParameter::Finite(a) => write!(f, "{a}"),
            RobinParameter::Dirichlet => f.write_str("dirichlet"),
        }
    }
}

impl std::str::FromStr for RobinParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dirichlet" | "inf" | "+inf" | "infinity" => Ok(RobinParameter::Dirichlet),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|a| a.is_finite())
                .map(RobinParameter::Finite)
                .ok_or_else(|| Error::Domain(format!("cannot parse Robin parameter {s:?}"))),
        }
    }
}

impl Serialize for RobinParameter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RobinParameter::Finite(a) => s.serialize_f64(*a),
            RobinParameter::Dirichlet => s.serialize_str("dirichlet"),
        }
    }
}

impl<'de> Deserialize<'de> for RobinParameter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(a) if a.is_finite() => Ok(RobinParameter::Finite(a)),
            Raw::Num(a) => Err(serde::de::Error::custom(format!("non-finite Robin parameter {a}"))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RealSpaceForm,
    Kahler,
    QuaternionKahler,
    CustomWarped,
}

/// Tabulated warping function with its first two derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledWarping {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub ddf: Vec<f64>,
}

/// Warping function `f` of a rotationally symmetric metric `dr² + f(r)² dθ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum WarpingFunction {
    SnKappa { kappa: f64 },
    Sampled(SampledWarping),
}

impl WarpingFunction {
    pub fn sn_kappa(kappa: f64) -> Self {
        WarpingFunction::SnKappa { kappa }
    }

    /// Samples `g` on `n` uniform nodes of `[0, radius]` with derivatives from
    /// the supplied closures.
    pub fn sampled_from(
        radius: f64,
        n: usize,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
        ddf: impl Fn(f64) -> f64,
    ) -> Self {
        let r: Vec<f64> = (0..n).map(|j| radius * j as f64 / (n - 1) as f64).collect();
        WarpingFunction::Sampled(SampledWarping {
            f: r.iter().map(|&x| f(x)).collect(),
            df: r.iter().map(|&x| df(x)).collect(),
            ddf: r.iter().map(|&x| ddf(x)).collect(),
            r,
        })
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            WarpingFunction::SnKappa { kappa } => sn(*kappa, r),
            WarpingFunction::Sampled(s) => interp_hermite(&s.r, &s.f, &s.df, r),
        }
    }

    pub fn first(&self, r: f64) -> f64 {
        match self {
            WarpingFunction::SnKappa { kappa } => sn_prime(*kappa, r),
            WarpingFunction::Sampled(s) => interp_hermite(&s.r, &s.df, &s.ddf, r),
        }
    }

    pub fn second(&self, r: f64) -> f64 {
        match self {
            WarpingFunction::SnKappa { kappa } => -kappa * sn(*kappa, r),
            WarpingFunction::Sampled(s) => interp_linear(&s.r, &s.ddf, r),
        }
    }

    /// Checks `f(0) = 0`, `f'(0) = 1` and `f > 0` on `(0, radius]`.
    pub fn validate(&self, radius: f64) -> Result<()> {
        match self {
            WarpingFunction::SnKappa { kappa } => {
                if !kappa.is_finite() {
                    return Err(Error::InvalidGeometry("warping curvature must be finite".into()));
                }
                let limit = CurvatureScale::new(*kappa)?.conjugate_radius();
                if radius >= limit {
                    return Err(Error::InvalidGeometry(format!(
                        "sn_κ' warping with κ' = {kappa} vanishes at r = {limit} ≤ R = {radius}"
                    )));
                }
                Ok(())
            }
            WarpingFunction::Sampled(s) => {
                let n = s.r.len();
                if n < 4 || s.f.len() != n || s.df.len() != n || s.ddf.len() != n {
                    return Err(Error::InvalidGeometry(
                        "sampled warping needs ≥ 4 samples of f, f', f'' on a common grid".into(),
                    ));
                }
                if s.r.windows(2).any(|w| w[1] <= w[0]) || s.r[0] != 0.0 {
                    return Err(Error::InvalidGeometry(
                        "sampled warping grid must start at 0 and increase strictly".into(),
                    ));
                }
                if s.r[n - 1] < radius * (1.0 - 1e-12) {
                    return Err(Error::InvalidGeometry(format!(
                        "sampled warping covers [0, {}] but R = {radius}",
                        s.r[n - 1]
                    )));
                }
                if s.f[0].abs() > 1e-10 || (s.df[0] - 1.0).abs() > 1e-8 {
                    return Err(Error::InvalidGeometry(
                        "warping must satisfy f(0) = 0 and f'(0) = 1".into(),
                    ));
                }
                if let Some(j) = (1..n).find(|&j| s.r[j] <= radius && !(s.f[j] > 0.0)) {
                    return Err(Error::InvalidGeometry(format!(
                        "warping must be positive on (0, R], f({}) = {}",
                        s.r[j], s.f[j]
                    )));
                }
                Ok(())
            }
        }
    }
}

/// A model ball or warped-product ball reduced to its radial data.
///
/// `dim` follows the family convention: real dimension for real space forms
/// and warped products, complex dimension for the Kähler model and
/// quaternionic dimension for the quaternion-Kähler model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGeometry {
    pub family: Family,
    pub dim: usize,
    pub kappa: CurvatureScale,
    pub radius: f64,
    pub alpha: RobinParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warping: Option<WarpingFunction>,
    /// Multiplies the weight by `exp(-β r²/2)`, lowering the drift by `β r`.
    /// Used to build manifolds whose Laplacian of distance sits strictly below
    /// a model's.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub drift_damping: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl RadialGeometry {
    pub fn space_form(dim: usize, kappa: f64, radius: f64, alpha: RobinParameter) -> Result<Self> {
        Self::build(Family::RealSpaceForm, dim, kappa, radius, alpha, None)
    }

    pub fn kahler(complex_dim: usize, kappa: f64, radius: f64, alpha: RobinParameter) -> Result<Self> {
        Self::build(Family::Kahler, complex_dim, kappa, radius, alpha, None)
    }

    pub fn quaternion_kahler(
        quaternionic_dim: usize,
        kappa: f64,
        radius: f64,
        alpha: RobinParameter,
    ) -> Result<Self> {
        Self::build(Family::QuaternionKahler, quaternionic_dim, kappa, radius, alpha, None)
    }

    /// Warped product `dr² + f(r)² g_{S^{dim-1}}`. The `kappa` field records
    /// the warping curvature for `sn_κ'` warpings and is otherwise zero.
    pub fn warped(dim: usize, warping: WarpingFunction, radius: f64, alpha: RobinParameter) -> Result<Self> {
        let kappa = match &warping {
            WarpingFunction::SnKappa { kappa } => *kappa,
            WarpingFunction::Sampled(_) => 0.0,
        };
        Self::build(Family::CustomWarped, dim, kappa, radius, alpha, Some(warping))
    }

    fn build(
        family: Family,
        dim: usize,
        kappa: f64,
        radius: f64,
        alpha: RobinParameter,
        warping: Option<WarpingFunction>,
    ) -> Result<Self> {
        let g = RadialGeometry {
            family,
            dim,
            kappa: CurvatureScale::new(kappa)?,
            radius,
            alpha,
            warping,
            drift_damping: 0.0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_alpha(&self, alpha: RobinParameter) -> Self {
        RadialGeometry { alpha, ..self.clone() }
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        let g = RadialGeometry { radius, ..self.clone() };
        g.validate()?;
        Ok(g)
    }

    pub fn with_drift_damping(&self, beta: f64) -> Result<Self> {
        let g = RadialGeometry { drift_damping: beta, ..self.clone() };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidGeometry(format!("radius must be positive, got {}", self.radius)));
        }
        if self.dim == 0 {
            return Err(Error::InvalidGeometry("dimension must be positive".into()));
        }
        if self.real_dim() < 2 {
            return Err(Error::InvalidGeometry(
                "real dimension must be at least 2 for a radial ball".into(),
            ));
        }
        if let RobinParameter::Finite(a) = self.alpha {
            if !a.is_finite() {
                return Err(Error::InvalidGeometry("Robin parameter must be finite".into()));
            }
        }
        if !(self.drift_damping >= 0.0) || !self.drift_damping.is_finite() {
            return Err(Error::InvalidGeometry("drift damping must be a finite β ≥ 0".into()));
        }
        let k = self.kappa.value();
        match self.family {
            Family::RealSpaceForm => {
                if k > 0.0 && self.radius >= std::f64::consts::PI / k.sqrt() {
                    return Err(Error::InvalidGeometry(format!(
                        "R = {} must be below π/√κ = {} on the sphere",
                        self.radius,
                        std::f64::consts::PI / k.sqrt()
                    )));
                }
            }
            Family::Kahler | Family::QuaternionKahler => {
                if k > 0.0 && self.radius >= std::f64::consts::PI / (2.0 * k.sqrt()) {
                    return Err(Error::InvalidGeometry(format!(
                        "R = {} must be below π/(2√κ) = {} in the compact model",
                        self.radius,
                        std::f64::consts::PI / (2.0 * k.sqrt())
                    )));
                }
            }
            Family::CustomWarped => {
                let w = self.warping.as_ref().ok_or_else(|| {
                    Error::InvalidGeometry("custom warped geometry needs a warping function".into())
                })?;
                w.validate(self.radius)?;
            }
        }
        if self.family != Family::CustomWarped && self.warping.is_some() {
            return Err(Error::InvalidGeometry("warping is only used by the custom-warped family".into()));
        }
        Ok(())
    }

    /// Real dimension of the manifold.
    pub fn real_dim(&self) -> usize {
        match self.family {
            Family::RealSpaceForm | Family::CustomWarped => self.dim,
            Family::Kahler => 2 * self.dim,
            Family::QuaternionKahler => 4 * self.dim,
        }
    }

    /// `ω_{n-1}`, the area of the unit sphere in the tangent space at the center.
    pub fn norm_constant(&self) -> f64 {
        unit_sphere_area(self.real_dim() - 1)
    }

    fn damping_factor(&self, r: f64) -> f64 {
        if self.drift_damping == 0.0 {
            1.0
        } else {
            (-0.5 * self.drift_damping * r * r).exp()
        }
    }

    /// Geodesic-sphere profile without the unit-sphere constant and damping,
    /// so that `weight = ω · profile · damping`.
    pub fn area_profile(&self, r: f64) -> f64 {
        let k = self.kappa.value();
        let m = self.dim as i32;
        match self.family {
            Family::RealSpaceForm => sn(k, r).powi(m - 1),
            Family::Kahler => sn(k, r).powi(2 * m - 2) * sn(4.0 * k, r),
            Family::QuaternionKahler => sn(k, r).powi(4 * m - 4) * sn(4.0 * k, r).powi(3),
            Family::CustomWarped => self.warping.as_ref().expect("validated").value(r).powi(m - 1),
        }
    }

    /// Weight `w(r)` of the radial measure `dμ = w(r) dr`.
    pub fn weight(&self, r: f64) -> f64 {
        self.norm_constant() * self.area_profile(r) * self.damping_factor(r)
    }

    /// Drift `c(r) = w'(r)/w(r)` for `r > 0`.
    pub fn drift(&self, r: f64) -> f64 {
        let k = self.kappa.value();
        let m = self.dim as f64;
        let base = match self.family {
            Family::RealSpaceForm => (m - 1.0) * sn_log_derivative(k, r),
            Family::Kahler => (2.0 * m - 2.0) * sn_log_derivative(k, r) + sn_log_derivative(4.0 * k, r),
            Family::QuaternionKahler => {
                (4.0 * m - 4.0) * sn_log_derivative(k, r) + 3.0 * sn_log_derivative(4.0 * k, r)
            }
            Family::CustomWarped => {
                let w = self.warping.as_ref().expect("validated");
                (m - 1.0) * w.first(r) / w.value(r)
            }
        };
        base - self.drift_damping * r
    }

    /// Substitution speed `s'(r)`: `sn_κ` for space forms, `η` and `ξ` for the
    /// Kähler and quaternion models, `f` for warped products. In every case it
    /// is the `(n-1)`-th root of the geodesic-sphere profile.
    pub fn speed(&self, r: f64) -> f64 {
        let k = self.kappa.value();
        let m = self.dim as f64;
        match self.family {
            Family::RealSpaceForm => sn(k, r),
            Family::CustomWarped => self.warping.as_ref().expect("validated").value(r),
            Family::Kahler => {
                if r == 0.0 {
                    return 0.0;
                }
                let log = (2.0 * m - 2.0) * sn(k, r).ln() + sn(4.0 * k, r).ln();
                (log / (2.0 * m - 1.0)).exp()
            }
            Family::QuaternionKahler => {
                if r == 0.0 {
                    return 0.0;
                }
                let log = (4.0 * m - 4.0) * sn(k, r).ln() + 3.0 * sn(4.0 * k, r).ln();
                (log / (4.0 * m - 1.0)).exp()
            }
        }
    }

    /// `√κ·tan(√κ R) ≤ α`, equivalently `R ≤ arctan(α/√κ)/√κ`. Vacuous for `κ ≤ 0`.
    /// A relative slack of `1e-12` admits radii set exactly on the boundary.
    pub fn arctan_gate(&self) -> bool {
        let k = self.kappa.value();
        if k <= 0.0 {
            return true;
        }
        let q = k.sqrt();
        let limit = match self.alpha {
            RobinParameter::Dirichlet => std::f64::consts::FRAC_PI_2 / q,
            RobinParameter::Finite(a) => (a / q).atan() / q,
        };
        self.radius <= limit * (1.0 + 1e-12)
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        let fam = match self.family {
            Family::RealSpaceForm => "real",
            Family::Kahler => "kahler",
            Family::QuaternionKahler => "quaternion",
            Family::CustomWarped => "warped",
        };
        format!(
            "{fam}(m={}, κ={}, R={}, α={}{})",
            self.dim,
            self.kappa.value(),
            self.radius,
            self.alpha,
            if self.drift_damping > 0.0 { format!(", β={}", self.drift_damping) } else { String::new() }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(x: f64) -> RobinParameter {
        RobinParameter::Finite(x)
    }

    #[test]
    fn radius_limits_per_family() {
        assert!(RadialGeometry::space_form(3, 1.0, 3.0, a(1.0)).is_ok());
        assert!(RadialGeometry::space_form(3, 1.0, 3.2, a(1.0)).is_err());
        assert!(RadialGeometry::kahler(2, 1.0, 1.5, a(1.0)).is_ok());
        assert!(RadialGeometry::kahler(2, 1.0, 1.6, a(1.0)).is_err());
        assert!(RadialGeometry::quaternion_kahler(1, 1.0, 1.6, a(1.0)).is_err());
        assert!(RadialGeometry::space_form(1, 0.0, 1.0, a(1.0)).is_err());
        assert!(RadialGeometry::space_form(2, 0.0, -1.0, a(1.0)).is_err());
    }

    #[test]
    fn weight_vanishes_only_at_center() {
        for g in [
            RadialGeometry::space_form(3, 1.0, 2.0, a(1.0)).unwrap(),
            RadialGeometry::kahler(2, 0.5, 1.5, a(1.0)).unwrap(),
            RadialGeometry::quaternion_kahler(2, -1.0, 1.0, a(1.0)).unwrap(),
            RadialGeometry::warped(2, WarpingFunction::sn_kappa(-0.5), 1.0, a(1.0)).unwrap(),
        ] {
            assert_eq!(g.weight(0.0), 0.0);
            for j in 1..=50 {
                assert!(g.weight(g.radius * j as f64 / 50.0) > 0.0);
            }
        }
    }

    #[test]
    fn kahler_degenerates_to_even_real_dimension() {
        for m in 1..=3 {
            let k = RadialGeometry::kahler(m, 0.0, 1.0, a(1.0)).unwrap();
            let q = RadialGeometry::quaternion_kahler(m, 0.0, 1.0, a(1.0)).unwrap();
            let r2 = RadialGeometry::space_form(2 * m, 0.0, 1.0, a(1.0)).unwrap();
            let r4 = RadialGeometry::space_form(4 * m, 0.0, 1.0, a(1.0)).unwrap();
            for j in 1..=100 {
                let r = j as f64 / 100.0;
                assert!((k.drift(r) - (2 * m - 1) as f64 / r).abs() < 1e-12);
                assert!((k.drift(r) - r2.drift(r)).abs() < 1e-12);
                assert!((q.drift(r) - (4 * m - 1) as f64 / r).abs() < 1e-12);
                assert!((q.drift(r) - r4.drift(r)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn drift_matches_log_derivative_of_weight() {
        let g = RadialGeometry::kahler(2, 0.7, 1.2, a(1.0)).unwrap().with_drift_damping(0.3).unwrap();
        for &r in &[0.1, 0.5, 1.1] {
            let h = 1e-5;
            let fd = (g.weight(r + h).ln() - g.weight(r - h).ln()) / (2.0 * h);
            assert!((fd - g.drift(r)).abs() < 1e-7);
        }
    }

    #[test]
    fn robin_parameter_parsing_and_serde() {
        assert_eq!("dirichlet".parse::<RobinParameter>().unwrap(), RobinParameter::Dirichlet);
        assert_eq!("inf".parse::<RobinParameter>().unwrap(), RobinParameter::Dirichlet);
        assert_eq!("0.5".parse::<RobinParameter>().unwrap(), a(0.5));
        assert!("abc".parse::<RobinParameter>().is_err());
        let g = RadialGeometry::space_form(2, 0.0, 1.0, RobinParameter::Dirichlet).unwrap();
        let js = serde_json::to_string(&g).unwrap();
        assert!(js.contains("\"dirichlet\""));
        let back: RadialGeometry = serde_json::from_str(&js).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn sampled_warping_validation() {
        let good = WarpingFunction::sampled_from(1.0, 101, |r| r + r * r * r, |r| 1.0 + 3.0 * r * r, |r| 6.0 * r);
        assert!(RadialGeometry::warped(3, good.clone(), 1.0, a(1.0)).is_ok());
        assert!(RadialGeometry::warped(3, good, 1.5, a(1.0)).is_err());
        let bad = WarpingFunction::sampled_from(1.0, 101, |r| 2.0 * r, |_| 2.0, |_| 0.0);
        assert!(RadialGeometry::warped(3, bad, 1.0, a(1.0)).is_err());
    }

    #[test]
    fn arctan_gate_boundary() {
        let r = 2f64.atan();
        let g = RadialGeometry::space_form(2, 1.0, r, a(2.0)).unwrap();
        assert!(g.arctan_gate());
        let g2 = RadialGeometry::space_form(2, 1.0, r * 1.01, a(2.0)).unwrap();
        assert!(!g2.arctan_gate());
        let flat = RadialGeometry::space_form(2, 0.0, 10.0, a(0.1)).unwrap();
        assert!(flat.arctan_gate());
    }
}
