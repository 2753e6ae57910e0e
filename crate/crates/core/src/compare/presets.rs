//! Named scenario batteries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    degeneration_check, eigen_compare, kahler_sharpness_probe, kernel_compare, random_gamma_fields,
    sub_supersolution_residual, BartaContext, CompareOptions, ComparisonReport, ComparisonScenario, Direction,
    Hypothesis, ResidualMode, TransplantContext, TransplantScenario,
};
use crate::geometry::{RadialGeometry, RobinParameter, WarpingFunction};
use crate::heat::{kernel_spectral, TimeGrid};
use crate::sturm::solve;
use crate::{Error, Result};

pub const PRESETS: [&str; 4] = ["sphere-vs-flat", "hyperbolic-vs-flat", "kahler-degeneration", "transplant-gamma-sweep"];

pub fn preset_names() -> &'static [&'static str] {
    &PRESETS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetOptions {
    pub compare: CompareOptions,
    pub times: Vec<f64>,
    pub seed: u64,
    pub gamma_draws: usize,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self { compare: CompareOptions::default(), times: vec![0.05, 0.1, 0.2, 0.5, 1.0], seed: 0, gamma_draws: 100 }
    }
}

/// Warped ball with `f = sn_κ` against the flat model of the same dimension.
pub fn warped_vs_flat(id: &str, dim: usize, kappa: f64, radius: f64, alpha: f64) -> Result<ComparisonScenario> {
    let alpha = RobinParameter::Finite(alpha);
    let (hypothesis, direction) = if kappa >= 0.0 {
        (Hypothesis::RicciLower, Direction::LhsGeq)
    } else {
        (Hypothesis::SectUpper, Direction::LhsLeq)
    };
    Ok(ComparisonScenario {
        id: id.to_string(),
        lhs: RadialGeometry::warped(dim, WarpingFunction::sn_kappa(kappa), radius, alpha)?,
        rhs: RadialGeometry::space_form(dim, 0.0, radius, alpha)?,
        direction,
        hypothesis,
    })
}

fn curvature_battery(sc: &ComparisonScenario, opts: &PresetOptions) -> Result<Vec<ComparisonReport>> {
    let tgrid = TimeGrid::new(opts.times.clone())?;
    let mut out = vec![kernel_compare(sc, &tgrid, &opts.compare)?, eigen_compare(sc, &opts.compare)?];
    // The model kernel read on the lhs ball: a subsolution under a Ricci lower
    // bound, a supersolution under a sectional upper bound.
    let model = kernel_spectral(&solve(&sc.rhs, opts.compare.nodes, opts.compare.modes)?, &tgrid)?;
    let mode = match sc.direction {
        Direction::LhsGeq => ResidualMode::Sub,
        Direction::LhsLeq => ResidualMode::Super,
    };
    let mut res = sub_supersolution_residual(&model, &sc.lhs, mode, None)?;
    res.scenario = format!("{}-transplanted-model", sc.id);
    out.push(res);
    Ok(out)
}

/// Flat and sphere models inside the gate, each with `γ ≡ 1`, `γ ≡ 0.7` and
/// `draws` seeded random fields.
pub fn transplant_sweep(opts: &PresetOptions) -> Result<Vec<ComparisonReport>> {
    let tgrid = TimeGrid::new(opts.times.clone())?;
    let models = [
        ("flat", RadialGeometry::space_form(3, 0.0, 1.0, RobinParameter::Finite(1.0))?),
        ("sphere", RadialGeometry::space_form(3, 1.0, 1.0, RobinParameter::Finite(2.0))?),
    ];
    let fields = random_gamma_fields(opts.seed, opts.gamma_draws, 17, 0.3, 1.0);
    let mut out = Vec::new();
    for (name, model) in models {
        let heat = TransplantContext::new(&model, &tgrid, &opts.compare)?;
        let eig = BartaContext::new(&model, &opts.compare)?;
        let mut scenarios = vec![
            TransplantScenario::constant(&format!("{name}-gamma-1"), model.clone(), 1.0, 1.0),
            TransplantScenario::constant(&format!("{name}-gamma-0.7"), model.clone(), 0.7, 1.0),
        ];
        scenarios.extend(fields.iter().enumerate().map(|(i, g)| TransplantScenario {
            id: format!("{name}-random-{i}"),
            model: model.clone(),
            gamma: g.clone(),
            boundary_angle: 1.0,
        }));
        let reports: Vec<Result<[ComparisonReport; 2]>> =
            scenarios.par_iter().map(|ts| Ok([heat.evaluate(ts)?, eig.evaluate(ts)?])).collect();
        for r in reports {
            out.extend(r?);
        }
    }
    Ok(out)
}

pub fn run_preset(name: &str, opts: &PresetOptions) -> Result<Vec<ComparisonReport>> {
    match name {
        "sphere-vs-flat" => curvature_battery(&warped_vs_flat(name, 2, 1.0, 1.0, 1.0)?, opts),
        "hyperbolic-vs-flat" => curvature_battery(&warped_vs_flat(name, 2, -1.0, 1.0, 1.0)?, opts),
        "kahler-degeneration" => {
            let alpha = RobinParameter::Finite(1.0);
            let tgrid = TimeGrid::new(opts.times.clone())?;
            let mut out = degeneration_check(2, 1.0, alpha, &opts.compare)?;
            out.push(kahler_sharpness_probe(2, 1.0, 0.5, alpha, &tgrid, &opts.compare)?);
            out.push(kahler_sharpness_probe(2, -1.0, 1.0, alpha, &tgrid, &opts.compare)?);
            Ok(out)
        }
        "transplant-gamma-sweep" => transplant_sweep(opts),
        other => Err(Error::InvalidScenario(format!(
            "unknown preset '{other}'; expected one of {}",
            PRESETS.join(", ")
        ))),
    }
}
