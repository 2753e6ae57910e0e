//! Hypothesis-gated verdicts for the kernel and eigenvalue comparisons,
//! sub/supersolution residuals, and transplanted test functions.

mod kernel;
mod presets;
mod residual;
mod transplant;

pub use kernel::{degeneration_check, eigen_compare, kahler_sharpness_probe, kernel_compare};
pub use presets::{preset_names, run_preset, transplant_sweep, warped_vs_flat, PresetOptions, PRESETS};
pub use residual::{sub_supersolution_residual, ResidualMode};
pub use transplant::{
    barta_bound, random_gamma_fields, transplant_check, BartaContext, TransplantContext, TransplantScenario,
};

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::geometry::{hypothesis_check, CurvatureMode, Family, RadialGeometry, WarpingFunction};
use crate::sturm::{default_modes, DEFAULT_NODES};
use crate::{Error, Result, Verdict};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `H_lhs ≥ H_rhs` (and `λ_lhs ≤ λ_rhs`).
    LhsGeq,
    /// `H_lhs ≤ H_rhs` (and `λ_lhs ≥ λ_rhs`).
    LhsLeq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    RicciLower,
    SectUpper,
    KahlerBounds,
    QuaternionBounds,
    Transplant,
}

impl Hypothesis {
    /// The kernel ordering the hypothesis implies.
    pub fn implied_direction(self) -> Option<Direction> {
        match self {
            Hypothesis::RicciLower | Hypothesis::KahlerBounds | Hypothesis::QuaternionBounds => {
                Some(Direction::LhsGeq)
            }
            Hypothesis::SectUpper => Some(Direction::LhsLeq),
            Hypothesis::Transplant => None,
        }
    }
}

/// A "manifold" ball (`lhs`) compared with a model ball (`rhs`) of the same
/// radius and Robin parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonScenario {
    pub id: String,
    pub lhs: RadialGeometry,
    pub rhs: RadialGeometry,
    pub direction: Direction,
    pub hypothesis: Hypothesis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisOutcome {
    pub hypothesis: Hypothesis,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

/// Grid resolution used by the comparisons; the refinement run uses `2n - 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub nodes: usize,
    pub modes: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { nodes: DEFAULT_NODES, modes: default_modes(DEFAULT_NODES) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema: u32,
    pub scenario: String,
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<HypothesisOutcome>,
    pub verdict: Verdict,
    /// Largest violation of the asserted inequality; negative when it holds strictly.
    pub max_signed_violation: f64,
    pub tolerance_budget: f64,
    pub grids: Vec<usize>,
    pub runtime_ms: u64,
    pub details: BTreeMap<String, serde_json::Value>,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    pub(crate) fn new(scenario: &str, check: &str) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            scenario: scenario.to_string(),
            check: check.to_string(),
            hypothesis: None,
            verdict: Verdict::NotApplicable,
            max_signed_violation: 0.0,
            tolerance_budget: 0.0,
            grids: Vec::new(),
            runtime_ms: 0,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn detail(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.details.insert(key.to_string(), value.into());
    }

    pub(crate) fn finish(mut self, started: Instant) -> Self {
        self.runtime_ms = started.elapsed().as_millis() as u64;
        self
    }

    pub fn hypothesis_margin(&self) -> Option<f64> {
        self.hypothesis.as_ref().map(|h| h.margin)
    }

    /// One CSV row: scenario, check, verdict, violation, budget, margin, grids, runtime.
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            self.check.clone(),
            self.verdict.to_string(),
            format!("{:e}", self.max_signed_violation),
            format!("{:e}", self.tolerance_budget),
            self.hypothesis_margin().map(|m| format!("{m:e}")).unwrap_or_default(),
            self.grids.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" "),
            self.runtime_ms.to_string(),
        ]
    }

    pub const CSV_HEADER: [&'static str; 8] = [
        "scenario",
        "check",
        "verdict",
        "max_signed_violation",
        "tolerance_budget",
        "hypothesis_margin",
        "grids",
        "runtime_ms",
    ];
}

/// Writes reports as CSV with a header row.
pub fn write_reports_csv<W: std::io::Write>(reports: &[ComparisonReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ComparisonReport::CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

fn warping_of(g: &RadialGeometry) -> Option<WarpingFunction> {
    match g.family {
        Family::CustomWarped => g.warping.clone(),
        Family::RealSpaceForm if g.drift_damping == 0.0 => Some(WarpingFunction::sn_kappa(g.kappa.value())),
        _ => None,
    }
}

/// `c_lhs(r) ≤ c_rhs(r)` on `(0, R]`; returns the smallest slack.
fn drift_margin(lhs: &RadialGeometry, rhs: &RadialGeometry) -> f64 {
    let samples = 2000;
    (1..=samples)
        .map(|i| {
            let r = lhs.radius * i as f64 / samples as f64;
            let (cl, cr) = (lhs.drift(r), rhs.drift(r));
            (cr - cl) + 1e-12 * cr.abs().max(1.0)
        })
        .fold(f64::INFINITY, f64::min)
}

impl ComparisonScenario {
    /// Structural checks; a malformed scenario is an error, not a verdict.
    pub fn validate(&self) -> Result<()> {
        self.lhs.validate()?;
        self.rhs.validate()?;
        if (self.lhs.radius - self.rhs.radius).abs() > 1e-12 * self.rhs.radius {
            return Err(Error::InvalidScenario("lhs and rhs radii differ".into()));
        }
        if self.lhs.alpha != self.rhs.alpha {
            return Err(Error::InvalidScenario("lhs and rhs Robin parameters differ".into()));
        }
        if !self.lhs.alpha.is_positive() {
            return Err(Error::InvalidScenario(format!(
                "comparisons need α > 0, got {}",
                self.lhs.alpha
            )));
        }
        if self.lhs.real_dim() != self.rhs.real_dim() {
            return Err(Error::InvalidScenario(format!(
                "real dimensions differ: {} vs {}",
                self.lhs.real_dim(),
                self.rhs.real_dim()
            )));
        }
        match self.hypothesis.implied_direction() {
            None => {
                return Err(Error::InvalidScenario(
                    "the transplant hypothesis is checked with transplant_check".into(),
                ))
            }
            Some(d) if d != self.direction => {
                return Err(Error::InvalidScenario(format!(
                    "{:?} implies {:?}, scenario asks for {:?}",
                    self.hypothesis, d, self.direction
                )))
            }
            _ => {}
        }
        match self.hypothesis {
            Hypothesis::RicciLower | Hypothesis::SectUpper => {
                if self.rhs.family != Family::RealSpaceForm {
                    return Err(Error::InvalidScenario("curvature hypotheses compare with a real space form".into()));
                }
                if warping_of(&self.lhs).is_none() {
                    return Err(Error::InvalidScenario(
                        "curvature hypotheses need a warped-product or space-form lhs".into(),
                    ));
                }
            }
            Hypothesis::KahlerBounds if self.rhs.family != Family::Kahler => {
                return Err(Error::InvalidScenario("Kähler bounds compare with the Kähler model".into()));
            }
            Hypothesis::QuaternionBounds if self.rhs.family != Family::QuaternionKahler => {
                return Err(Error::InvalidScenario(
                    "quaternion bounds compare with the quaternion-Kähler model".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Validates the scenario and evaluates its hypothesis.
    pub fn hypothesis_gate(&self) -> Result<HypothesisOutcome> {
        self.validate()?;
        let out = match self.hypothesis {
            Hypothesis::RicciLower | Hypothesis::SectUpper => {
                let mode = if self.hypothesis == Hypothesis::RicciLower {
                    CurvatureMode::RicciLower
                } else {
                    CurvatureMode::SectUpper
                };
                let w = warping_of(&self.lhs).expect("validated");
                let c = hypothesis_check(&w, self.lhs.real_dim(), self.lhs.radius, self.rhs.kappa, mode);
                HypothesisOutcome {
                    hypothesis: self.hypothesis,
                    passed: c.passed,
                    margin: c.margin,
                    detail: format!("worst at r = {:.6}; {}", c.worst_r, c.formulas),
                }
            }
            Hypothesis::KahlerBounds | Hypothesis::QuaternionBounds => {
                let margin = drift_margin(&self.lhs, &self.rhs);
                HypothesisOutcome {
                    hypothesis: self.hypothesis,
                    passed: margin >= 0.0,
                    margin,
                    detail: "radial drift of lhs bounded by the model drift, c_lhs(r) <= c_model(r)".into(),
                }
            }
            Hypothesis::Transplant => unreachable!("rejected by validate"),
        };
        Ok(out)
    }
}
