//! Command implementations. Each returns the files it wrote and whether any
//! inequality verdict failed.

use std::path::PathBuf;

use robin_core::compare::{
    eigen_compare, kernel_compare, run_preset, write_reports_csv, CompareOptions, ComparisonReport, ComparisonScenario,
    Hypothesis, PresetOptions,
};
use robin_core::geometry::{RadialGeometry, RobinParameter, WarpingFunction};
use robin_core::heat::{field_checks, kernel_spectral, kernel_timestep, TimeGrid, DEFAULT_STEP_FRACTION};
use robin_core::sturm::{solve, Grid};
use robin_core::suite::{run_suite, SuiteOptions};
use robin_core::Verdict;
use serde::Serialize;
use serde_json::json;

use crate::config::{Command, FamilyArg, Format, HypothesisArg, Resolved, Solver};
use crate::output::write_atomic;
use crate::CliError;

pub const SCHEMA: u32 = 1;

pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failed: bool,
    /// A user-specified scenario whose hypothesis does not hold.
    pub rejected: Option<String>,
}

fn geometry(cfg: &Resolved) -> Result<RadialGeometry, CliError> {
    let g = match cfg.family {
        FamilyArg::Real => RadialGeometry::space_form(cfg.dim, cfg.kappa, cfg.radius, cfg.alpha)?,
        FamilyArg::Kahler => RadialGeometry::kahler(cfg.dim, cfg.kappa, cfg.radius, cfg.alpha)?,
        FamilyArg::Quaternion => RadialGeometry::quaternion_kahler(cfg.dim, cfg.kappa, cfg.radius, cfg.alpha)?,
        FamilyArg::Warped => {
            let k = cfg.warp_kappa.expect("validated");
            RadialGeometry::warped(cfg.dim, WarpingFunction::sn_kappa(k), cfg.radius, cfg.alpha)?
        }
    };
    Ok(g)
}

fn negative_alpha_warning(cfg: &Resolved) -> Option<String> {
    match cfg.alpha {
        RobinParameter::Finite(a) if a < 0.0 => {
            Some(format!("α = {a} < 0: λ₁ is negative and no comparison result applies"))
        }
        _ => None,
    }
}

fn envelope(kind: &str, cfg: &Resolved, body: serde_json::Value) -> serde_json::Value {
    let mut v = json!({ "schema": SCHEMA, "kind": kind, "config": cfg });
    if let (Some(obj), serde_json::Value::Object(extra)) = (v.as_object_mut(), body) {
        obj.extend(extra);
    }
    v
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec_pretty(v).map_err(robin_core::Error::from)?;
    s.push(b'\n');
    Ok(s)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(robin_core::Error::from)?;
    for r in rows {
        w.write_record(r).map_err(robin_core::Error::from)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn write(cfg: &Resolved, stem: &str, json: serde_json::Value, csv: impl FnOnce() -> Result<Vec<u8>, CliError>) -> Result<PathBuf, CliError> {
    match cfg.format {
        Format::Json => write_atomic(&cfg.out, &format!("{stem}.json"), &json_bytes(&json)?),
        Format::Csv => write_atomic(&cfg.out, &format!("{stem}.csv"), &csv()?),
    }
}

fn eigen(cfg: &Resolved) -> Result<Outcome, CliError> {
    let geom = geometry(cfg)?;
    let spectrum = solve(&geom, cfg.grid, cfg.modes)?;
    let warning = negative_alpha_warning(cfg);
    println!("λ₁ = {:.9} ({}, N = {}, {} modes)", spectrum.lambda1(), geom.label(), cfg.grid, spectrum.len());
    let body = json!({
        "geometry": geom,
        "lambda1": spectrum.lambda1(),
        "lambdas": spectrum.lambdas,
        "orthonormality_defect": spectrum.orthonormality_defect(),
        "warnings": warning.iter().collect::<Vec<_>>(),
    });
    let rows = spectrum.lambdas.iter().enumerate().map(|(i, l)| vec![(i + 1).to_string(), format!("{l:e}")]);
    let path = write(cfg, "eigen", envelope("eigen", cfg, body), || csv_bytes(&["index", "lambda"], rows))?;
    Ok(Outcome { files: vec![path], failed: false, rejected: None })
}

fn kernel(cfg: &Resolved) -> Result<Outcome, CliError> {
    let geom = geometry(cfg)?;
    let tgrid = TimeGrid::new(cfg.times.clone())?;
    let (field, extra) = match cfg.solver {
        Solver::Spectral => (kernel_spectral(&solve(&geom, cfg.grid, cfg.modes)?, &tgrid)?, serde_json::Value::Null),
        Solver::Timestep => {
            let grid = Grid::new(geom.radius, cfg.grid)?;
            let sigma = cfg.mollifier_width.unwrap_or(4.0 * grid.h());
            let (f, rep) = kernel_timestep(&geom, grid, &tgrid, sigma, DEFAULT_STEP_FRACTION)?;
            (f, serde_json::to_value(rep).map_err(robin_core::Error::from)?)
        }
    };
    let checks = field_checks(&field);
    let nonnegative_alpha = cfg.alpha.finite().is_none_or(|a| a >= 0.0);
    let failed = checks.positive == Verdict::Fail
        || (nonnegative_alpha && (checks.decreasing == Verdict::Fail || checks.mass_nonincreasing == Verdict::Fail));
    println!(
        "kernel: {} times, min value {:.3e}, positive {}, decreasing {}, mass nonincreasing {}",
        field.t.len(),
        checks.min_value,
        checks.positive,
        checks.decreasing,
        checks.mass_nonincreasing
    );
    let body = json!({
        "field": field,
        "checks": checks,
        "timestep": extra,
        "warnings": negative_alpha_warning(cfg).iter().collect::<Vec<_>>(),
    });
    let path = write(cfg, "kernel", envelope("heat-kernel", cfg, body), || {
        let mut buf = Vec::new();
        field.write_csv(&mut buf)?;
        Ok(buf)
    })?;
    Ok(Outcome { files: vec![path], failed, rejected: None })
}

fn custom_scenario(cfg: &Resolved) -> Result<ComparisonScenario, CliError> {
    let lhs_kappa = cfg.lhs_kappa.expect("validated");
    let hypothesis = match cfg.hypothesis {
        Some(HypothesisArg::RicciLower) => Hypothesis::RicciLower,
        Some(HypothesisArg::SectUpper) => Hypothesis::SectUpper,
        None if lhs_kappa >= cfg.kappa => Hypothesis::RicciLower,
        None => Hypothesis::SectUpper,
    };
    Ok(ComparisonScenario {
        id: format!("warped-k{lhs_kappa}-vs-real-k{}", cfg.kappa),
        lhs: RadialGeometry::warped(cfg.dim, WarpingFunction::sn_kappa(lhs_kappa), cfg.radius, cfg.alpha)?,
        rhs: RadialGeometry::space_form(cfg.dim, cfg.kappa, cfg.radius, cfg.alpha)?,
        direction: hypothesis.implied_direction().expect("curvature hypotheses have a direction"),
        hypothesis,
    })
}

fn compare(cfg: &Resolved) -> Result<Outcome, CliError> {
    let copts = CompareOptions { nodes: cfg.grid, modes: cfg.modes };
    let mut rejected = None;
    let (stem, reports): (String, Vec<ComparisonReport>) = match &cfg.preset {
        Some(name) => {
            let opts = PresetOptions { compare: copts, times: cfg.times.clone(), seed: cfg.seed, gamma_draws: cfg.gamma_draws };
            (format!("compare-{name}"), run_preset(name, &opts)?)
        }
        None => {
            let sc = custom_scenario(cfg)?;
            let tgrid = TimeGrid::new(cfg.times.clone())?;
            let reports = vec![kernel_compare(&sc, &tgrid, &copts)?, eigen_compare(&sc, &copts)?];
            if let Some(h) = reports[0].hypothesis.as_ref().filter(|h| !h.passed) {
                rejected = Some(format!("{:?} does not hold (margin {:.3e}; {})", h.hypothesis, h.margin, h.detail));
            }
            (format!("compare-{}", sc.id), reports)
        }
    };
    let failed = reports.iter().any(|r| r.verdict == Verdict::Fail);
    let passed = reports.iter().filter(|r| r.verdict == Verdict::Pass).count();
    for r in reports.iter().filter(|r| r.verdict != Verdict::Pass).take(20) {
        println!("{} {}: {} (violation {:.3e}, budget {:.3e})", r.scenario, r.check, r.verdict, r.max_signed_violation, r.tolerance_budget);
    }
    println!("{} reports, {passed} pass, {} fail", reports.len(), reports.iter().filter(|r| r.verdict == Verdict::Fail).count());
    let verdict = if failed { Verdict::Fail } else { Verdict::Pass };
    let body = json!({ "verdict": verdict, "reports": reports });
    let path = write(cfg, &stem, envelope("comparison", cfg, body), || {
        let mut buf = Vec::new();
        write_reports_csv(&reports, &mut buf)?;
        Ok(buf)
    })?;
    Ok(Outcome { files: vec![path], failed, rejected })
}

fn suite(cfg: &Resolved) -> Result<Outcome, CliError> {
    let opts = SuiteOptions { nodes: cfg.grid, modes: cfg.modes, seed: cfg.seed, gamma_draws: cfg.gamma_draws };
    let outcomes = run_suite(&opts);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().any(|o| !o.passed);
    let body = json!({ "criteria": outcomes, "passed": !failed });
    let rows = outcomes.iter().map(|o| {
        vec![
            o.id.to_string(),
            o.title.clone(),
            o.passed.to_string(),
            format!("{:e}", o.measured),
            format!("{:e}", o.threshold),
            o.detail.clone(),
        ]
    });
    let path = write(cfg, "suite", envelope("suite", cfg, body), || {
        csv_bytes(&["id", "title", "passed", "measured", "threshold", "detail"], rows)
    })?;
    Ok(Outcome { files: vec![path], failed, rejected: None })
}

pub fn run(cfg: &Resolved) -> Result<Outcome, CliError> {
    if let Some(w) = negative_alpha_warning(cfg) {
        eprintln!("warning: {w}");
    }
    match cfg.command {
        Command::Eigen => eigen(cfg),
        Command::Kernel => kernel(cfg),
        Command::Compare => compare(cfg),
        Command::Suite => suite(cfg),
    }
}
