//! Center-based Robin heat kernel `H̄(r, t)`: spectral synthesis, an
//! independent Crank–Nicolson solver, and sign diagnostics in the `s` variable.
//!
//! Kernels carry the manifold measure: `∫ H̄ dμ → 1` as `t → 0`, where
//! `dμ = w(r) dr` and `w` already includes the unit-sphere constant.

mod spectral;
mod substituted;
mod timestep;

pub use spectral::{kernel_log_slope, kernel_spectral, propagate, spectral_tail, t_min, TMIN_RATIO};
pub use substituted::{
    substituted_diagnostics, SubstitutedKernel, SubstitutedReport, SubstitutedTimeReport,
};
pub use timestep::{kernel_timestep, TimestepReport, DEFAULT_STEP_FRACTION};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::geometry::RadialGeometry;
use crate::numerics::{derivative, EndTreatment};
use crate::sturm::Grid;
use crate::{Error, Result, Verdict};

/// Strictly increasing positive output times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidTimeGrid("time grid is empty".into()));
        }
        if times.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidTimeGrid("times must be finite and positive".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTimeGrid("times must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    /// `count` geometrically spaced times from `first` to `last`.
    pub fn geometric(first: f64, last: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Self::new(vec![first]);
        }
        let ratio = (last / first).powf(1.0 / (count - 1) as f64);
        let mut times: Vec<f64> = (0..count).map(|i| first * ratio.powi(i as i32)).collect();
        times[count - 1] = last;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn first(&self) -> f64 {
        self.times[0]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Spectral,
    TimeStepped,
}

/// Kernel values `values[k][j] = H̄(r_j, t_k)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatKernelField {
    pub geom: RadialGeometry,
    pub provenance: Provenance,
    pub r: Vec<f64>,
    pub t: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Exact `∂_t H̄` for spectral fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_derivative: Option<Vec<Vec<f64>>>,
    /// Truncation tail bound per time (spectral fields).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<Vec<f64>>,
    /// `∫ H̄ dμ` per time.
    pub mass: Vec<f64>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: u32,
    kind: &'static str,
    #[serde(flatten)]
    field: &'a HeatKernelField,
}

impl HeatKernelField {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.geom.radius, self.r.len())
    }

    pub fn h(&self) -> f64 {
        self.r[1] - self.r[0]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `∂_r H̄` per time, fourth order with even reflection at the center.
    pub fn radial_derivative(&self) -> Vec<Vec<f64>> {
        let h = self.h();
        self.values.iter().map(|v| derivative(v, h, 1, EndTreatment::Even)).collect()
    }

    /// CSV with header `r,t,H`, one row per space-time node.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "t", "H"])?;
        for (k, t) in self.t.iter().enumerate() {
            for (j, r) in self.r.iter().enumerate() {
                w.write_record(&[format!("{r:.17e}"), format!("{t:.17e}"), format!("{:.17e}", self.values[k][j])])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// JSON envelope with geometry metadata and `schema: 1`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Envelope { schema: 1, kind: "heat-kernel-field", field: self })?)
    }
}


/// Positivity, radial monotonicity and mass behaviour of a field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldChecks {
    pub min_value: f64,
    pub positive: Verdict,
    /// Largest `∂_r H̄` over `r > 0`, relative to `max |∂_r H̄|` at that time.
    pub max_relative_dr: f64,
    pub decreasing: Verdict,
    pub max_mass: f64,
    pub mass_nonincreasing: Verdict,
}

pub fn field_checks(field: &HeatKernelField) -> FieldChecks {
    let min_value = field.min_value();
    let mut max_relative_dr = f64::NEG_INFINITY;
    for d in field.radial_derivative() {
        let scale = d.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
        for x in &d[1..] {
            max_relative_dr = max_relative_dr.max(x / scale);
        }
    }
    let max_mass = field.mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mass_ok = field.mass.windows(2).all(|w| w[1] <= w[0] + 1e-10) && max_mass <= 1.0 + 1e-6;
    FieldChecks {
        min_value,
        positive: if min_value > 0.0 { Verdict::Pass } else { Verdict::Fail },
        max_relative_dr,
        decreasing: crate::sturm::sign_verdict(max_relative_dr, 1e-6),
        max_mass,
        mass_nonincreasing: if mass_ok { Verdict::Pass } else { Verdict::Fail },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.2, 0.1]).is_err());
        let g = TimeGrid::geometric(0.01, 2.0, 9).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.times()[8], 2.0);
    }
}
