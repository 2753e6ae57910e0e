//! The coordinate `s(r) = ∫_0^r s'(ρ) dρ` in which the radial heat equation
//! becomes `∂tφ = sn² φ'' + m sn' φ'` on space forms.

use super::{r_of_s_closed_form, s_closed_form, Family, RadialGeometry, WarpingFunction};
use crate::numerics::{bracket, integrate_adaptive};

const TABLE_INTERVALS: usize = 512;
const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
enum Form {
    /// Space forms and `sn_κ'` warpings: `s = 2 sin²(√κ r/2)/κ` and relatives.
    Closed { kappa: f64 },
    /// Cumulative adaptive quadrature of the speed at table nodes.
    Tabulated { r: Vec<f64>, s: Vec<f64> },
}

/// Monotone map `r ↦ s(r)` on `[0, R]` with its inverse and speed `s'(r)`.
#[derive(Debug, Clone)]
pub struct Substitution {
    geom: RadialGeometry,
    form: Form,
}

/// Builds the substitution for a validated geometry.
pub fn substitution_for(geom: &RadialGeometry) -> Substitution {
    let closed = match (geom.family, &geom.warping) {
        (Family::RealSpaceForm, _) => Some(geom.kappa.value()),
        (Family::CustomWarped, Some(WarpingFunction::SnKappa { kappa })) => Some(*kappa),
        _ => None,
    };
    let form = match closed {
        Some(kappa) => Form::Closed { kappa },
        None => {
            let h = geom.radius / TABLE_INTERVALS as f64;
            let r: Vec<f64> = (0..=TABLE_INTERVALS).map(|i| i as f64 * h).collect();
            let mut s = vec![0.0; r.len()];
            for i in 1..r.len() {
                s[i] = s[i - 1] + integrate_adaptive(|x| geom.speed(x), r[i - 1], r[i], QUAD_TOL);
            }
            Form::Tabulated { r, s }
        }
    };
    Substitution { geom: geom.clone(), form }
}

impl Substitution {
    pub fn radius(&self) -> f64 {
        self.geom.radius
    }

    pub fn geometry(&self) -> &RadialGeometry {
        &self.geom
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.form, Form::Closed { .. })
    }

    /// `s'(r)`.
    pub fn speed(&self, r: f64) -> f64 {
        self.geom.speed(r)
    }

    pub fn s_of_r(&self, r: f64) -> f64 {
        match &self.form {
            Form::Closed { kappa } => s_closed_form(*kappa, r),
            Form::Tabulated { r: rt, s } => {
                let i = bracket(rt, r);
                s[i] + integrate_adaptive(|x| self.geom.speed(x), rt[i], r, QUAD_TOL)
            }
        }
    }

    /// `s(R)`.
    pub fn s_max(&self) -> f64 {
        self.s_of_r(self.geom.radius)
    }

    pub fn r_of_s(&self, s: f64) -> f64 {
        match &self.form {
            Form::Closed { kappa } => r_of_s_closed_form(*kappa, s).min(self.geom.radius.max(0.0)),
            Form::Tabulated { r: rt, s: st } => {
                if s <= 0.0 {
                    return 0.0;
                }
                let i = bracket(st, s);
                let (mut lo, mut hi) = (rt[i], rt[i + 1]);
                if s >= st[st.len() - 1] {
                    return rt[rt.len() - 1];
                }
                // Newton from the linear guess, falling back to bisection
                // whenever a step leaves the bracket.
                let mut x = lo + (hi - lo) * (s - st[i]) / (st[i + 1] - st[i]);
                for _ in 0..100 {
                    let f = st[i] + integrate_adaptive(|y| self.geom.speed(y), rt[i], x, QUAD_TOL) - s;
                    if f > 0.0 {
                        hi = x;
                    } else {
                        lo = x;
                    }
                    let d = self.geom.speed(x);
                    let mut next = x - f / d;
                    if !(next > lo && next < hi) || !next.is_finite() {
                        next = 0.5 * (lo + hi);
                    }
                    if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
                        return next;
                    }
                    x = next;
                }
                x
            }
        }
    }
}
