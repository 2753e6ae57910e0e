//! The acceptance battery: eleven numbered criteria, each reduced to one
//! measured quantity compared against a threshold.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compare::{
    degeneration_check, eigen_compare, kernel_compare, transplant_sweep, warped_vs_flat, CompareOptions,
    ComparisonScenario, Direction, Hypothesis, PresetOptions,
};
use crate::geometry::{substitution_for, RadialGeometry, RobinParameter, WarpingFunction};
use crate::heat::{kernel_spectral, kernel_timestep, substituted_diagnostics, TimeGrid, DEFAULT_STEP_FRACTION};
use crate::sturm::{first_mode_diagnostics, g_limit_diagnostics, lambda_lower_bound_check, solve, Grid};
use crate::{Result, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub nodes: usize,
    pub modes: usize,
    pub seed: u64,
    pub gamma_draws: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        let c = CompareOptions::default();
        Self { nodes: c.nodes, modes: c.modes, seed: 0, gamma_draws: 100 }
    }
}

impl SuiteOptions {
    fn compare(&self) -> CompareOptions {
        CompareOptions { nodes: self.nodes, modes: self.modes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    /// The quantity compared against `threshold`; its meaning is given in `detail`.
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CriterionOutcome {
    fn new(id: u8, title: &str, passed: bool, measured: f64, threshold: f64, detail: String) -> Self {
        Self { id, title: title.to_string(), passed, measured, threshold, detail }
    }

    fn errored(id: u8, title: &str, err: crate::Error) -> Self {
        Self::new(id, title, false, f64::NAN, f64::NAN, format!("error: {err}"))
    }

    /// `[PASS] 3 title: measured … (threshold …) detail`
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: measured {:.3e} (threshold {:.3e}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.measured,
            self.threshold,
            self.detail
        )
    }
}

/// First positive zero of `J₀` from its power series, by bisection on `[2, 3]`.
pub fn bessel_j0_first_zero() -> f64 {
    let j0 = |x: f64| {
        let q = -0.25 * x * x;
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 1..60 {
            term *= q / (k as f64 * k as f64);
            sum += term;
        }
        sum
    };
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        if j0(a) * j0(c) <= 0.0 {
            b = c;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn finite(a: f64) -> RobinParameter {
    RobinParameter::Finite(a)
}

fn closed_form_eigenvalues(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let ball = RadialGeometry::space_form(3, 0.0, 1.0, finite(1.0))?;
    let l = solve(&ball, o.nodes, 1)?.lambda1();
    let disk = RadialGeometry::space_form(2, 0.0, 1.0, RobinParameter::Dirichlet)?;
    let d = solve(&disk, o.nodes, 1)?.lambda1();
    let j = bessel_j0_first_zero();
    let (e1, e2) = ((l - PI * PI / 4.0).abs(), (d - j * j).abs());
    Ok(CriterionOutcome::new(
        1,
        "closed-form eigenvalues",
        e1 < 1e-4 && e2 < 1e-3,
        e1.max(e2),
        1e-4,
        format!("|λ - π²/4| = {e1:.2e} (< 1e-4), |λ_D - j₀₁²| = {e2:.2e} (< 1e-3)"),
    ))
}

fn neumann_identity(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let g = RadialGeometry::space_form(3, 0.0, 1.0, finite(0.0))?;
    let spectrum = solve(&g, o.nodes, o.modes)?;
    let lambda = spectrum.lambda1().abs();
    let tg = TimeGrid::geometric(0.01, 2.0, 24)?;
    let field = kernel_spectral(&spectrum, &tg)?;
    let spectral_drift = field.mass.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
    let grid = Grid::new(1.0, o.nodes)?;
    let (cn, rep) = kernel_timestep(&g, grid, &tg, 4.0 * grid.h(), DEFAULT_STEP_FRACTION)?;
    let cn_drift = cn.mass.iter().map(|m| (m - cn.mass[0]).abs()).fold(0.0, f64::max);
    let mass = spectral_drift.max(cn_drift);
    Ok(CriterionOutcome::new(
        2,
        "Neumann identity",
        lambda < 1e-8 && mass < 1e-6,
        mass,
        1e-6,
        format!(
            "|λ₁| = {lambda:.2e} (< 1e-8); mass drift spectral {spectral_drift:.2e}, time-stepped {cn_drift:.2e} \
             (step residual {:.2e}) over t ∈ [0.01, 2]",
            rep.max_mass_residual
        ),
    ))
}

fn solver_cross_validation(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let tg = TimeGrid::new(vec![0.05, 0.1, 0.2, 0.5, 1.0])?;
    let cases: Vec<(f64, f64)> =
        [0.0, 1.0, -1.0].iter().flat_map(|&k| [0.5, 1.0, 2.0].map(|a| (k, a))).collect();
    let gaps: Vec<Result<(f64, f64, f64)>> = cases
        .par_iter()
        .map(|&(k, a)| {
            let g = RadialGeometry::space_form(3, k, 1.0, finite(a))?;
            let sp = kernel_spectral(&solve(&g, o.nodes, o.modes)?, &tg)?;
            let grid = Grid::new(1.0, o.nodes)?;
            let (cn, _) = kernel_timestep(&g, grid, &tg, 4.0 * grid.h(), DEFAULT_STEP_FRACTION)?;
            let gap = sp
                .values
                .iter()
                .zip(&cn.values)
                .flat_map(|(s, c)| s.iter().zip(c).map(|(x, y)| (x - y).abs() / x.abs()))
                .fold(0.0, f64::max);
            Ok((k, a, gap))
        })
        .collect();
    let mut worst = (0.0, 0.0, 0.0);
    for g in gaps {
        let g = g?;
        if g.2 >= worst.2 {
            worst = g;
        }
    }
    Ok(CriterionOutcome::new(
        3,
        "spectral vs time-stepped kernels",
        worst.2 < 1e-3,
        worst.2,
        1e-3,
        format!(
            "max pointwise relative gap over κ ∈ {{0, 1, -1}}, α ∈ {{0.5, 1, 2}}, t ∈ [0.05, 1]; worst at κ = {}, α = {}",
            worst.0, worst.1
        ),
    ))
}

fn kernel_battery(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let tg = TimeGrid::new(vec![0.05, 0.1, 0.2, 0.5, 1.0])?;
    let scenarios = [
        warped_vs_flat("sphere-vs-flat", 2, 1.0, 1.0, 1.0)?,
        warped_vs_flat("hyperbolic-vs-flat", 2, -1.0, 1.0, 1.0)?,
    ];
    let reports: Vec<_> = scenarios.par_iter().map(|s| kernel_compare(s, &tg, &o.compare())).collect();
    let mut passed = true;
    let mut worst = f64::NEG_INFINITY;
    let mut parts = Vec::new();
    for r in reports {
        let r = r?;
        passed &= r.verdict == Verdict::Pass;
        worst = worst.max(r.max_signed_violation - r.tolerance_budget);
        parts.push(format!(
            "{}: {} (violation {:.2e}, budget {:.2e})",
            r.scenario, r.verdict, r.max_signed_violation, r.tolerance_budget
        ));
    }
    Ok(CriterionOutcome::new(
        4,
        "kernel comparison battery",
        passed && worst <= 0.0,
        worst,
        0.0,
        format!("violation minus budget at N and 2N-1; {}", parts.join("; ")),
    ))
}

fn eigen_sweep(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let kappas = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut scenarios = Vec::new();
    for dim in [2usize, 3] {
        for &ka in &kappas {
            for &kb in &kappas {
                if ka == kb {
                    continue;
                }
                let (hypothesis, direction) = if ka > kb {
                    (Hypothesis::RicciLower, Direction::LhsGeq)
                } else {
                    (Hypothesis::SectUpper, Direction::LhsLeq)
                };
                scenarios.push(ComparisonScenario {
                    id: format!("m{dim}-k{ka}-vs-k{kb}"),
                    lhs: RadialGeometry::warped(dim, WarpingFunction::sn_kappa(ka), 1.0, finite(1.0))?,
                    rhs: RadialGeometry::space_form(dim, kb, 1.0, finite(1.0))?,
                    direction,
                    hypothesis,
                });
            }
        }
    }
    let reports: Vec<_> = scenarios.par_iter().map(|s| eigen_compare(s, &o.compare())).collect();
    let mut passed = true;
    let mut slope_err = 0.0f64;
    let mut min_margin = f64::INFINITY;
    let mut failed = Vec::new();
    for r in reports {
        let r = r?;
        if r.verdict != Verdict::Pass {
            passed = false;
            failed.push(r.scenario.clone());
        }
        slope_err = slope_err.max(r.details["log_slope_relative_error"].as_f64().unwrap_or(f64::INFINITY));
        min_margin = min_margin.min(-r.max_signed_violation);
    }
    Ok(CriterionOutcome::new(
        5,
        "eigenvalue orderings over κ sweep",
        passed && slope_err < 1e-3,
        slope_err,
        1e-3,
        format!(
            "{} ordered pairs, smallest ordering margin {min_margin:.3e}; measured is the worst log-slope relative error{}",
            scenarios.len(),
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    ))
}

fn robin_monotonicity(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let tg = TimeGrid::geometric(0.05, 2.0, 12)?;
    // Ordered from smallest to largest kernel.
    let alphas = [RobinParameter::Dirichlet, finite(2.0), finite(1.0), finite(0.5), finite(0.0)];
    let fields: Vec<Result<_>> = alphas
        .par_iter()
        .map(|&a| {
            let g = RadialGeometry::space_form(3, 0.0, 1.0, a)?;
            kernel_spectral(&solve(&g, o.nodes, o.modes)?, &tg)
        })
        .collect();
    let fields = fields.into_iter().collect::<Result<Vec<_>>>()?;
    // Smallest relative gap H_next - H_prev over all space-time nodes.
    let mut min_gap = f64::INFINITY;
    for pair in fields.windows(2) {
        for (a, b) in pair[0].values.iter().zip(&pair[1].values) {
            for (x, y) in a.iter().zip(b) {
                min_gap = min_gap.min((y - x) / y.abs());
            }
        }
    }
    Ok(CriterionOutcome::new(
        6,
        "Robin-parameter ordering",
        min_gap > 0.0,
        min_gap,
        0.0,
        "min relative gap in Dirichlet < α=2 < α=1 < α=0.5 < Neumann, flat m=3, t ∈ [0.05, 2]".into(),
    ))
}

fn m_kappa_bound(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let g = RadialGeometry::space_form(2, 1.0, 2f64.atan(), finite(2.0))?;
    let spectrum = solve(&g, o.nodes, 1)?;
    let c = lambda_lower_bound_check(&g, &spectrum)?;
    Ok(CriterionOutcome::new(
        7,
        "λ₁ ≥ mκ inside the gate",
        c.gate && c.verdict == Verdict::Pass,
        c.margin,
        -1e-8 * c.bound,
        format!(
            "λ₁ = {:.10}, mκ = {}; R = arctan 2 lies on the gate boundary where u = cos r and equality holds",
            c.lambda1, c.bound
        ),
    ))
}

fn sign_suite(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let tg = TimeGrid::new(vec![0.05, 0.2, 1.0])?;
    // (κ, α): the sphere uses α = 2 so that R = 1 lies inside the gate.
    let cases = [(0.0, 1.0), (-1.0, 1.0), (1.0, 2.0)];
    let reports: Vec<Result<_>> = cases
        .par_iter()
        .map(|&(k, a)| {
            let g = RadialGeometry::space_form(3, k, 1.0, finite(a))?;
            let spectrum = solve(&g, o.nodes, o.modes)?;
            let field = kernel_spectral(&spectrum, &tg)?;
            Ok(((k, a), substituted_diagnostics(&field, &substitution_for(&g), Some(&spectrum))?.1))
        })
        .collect();
    let mut passed = true;
    let (mut center_gap, mut k3) = (0.0f64, 0.0f64);
    let mut parts = Vec::new();
    for r in reports {
        let ((k, a), rep) = r?;
        passed &= rep.gate_met && rep.verdict == Verdict::Pass;
        for t in &rep.times {
            passed &= t.first_derivative.is_pass() && t.second_derivative.is_pass();
            center_gap = center_gap.max(t.center_gap.unwrap_or(f64::INFINITY));
            k3 = k3.max(t.k3_residual.unwrap_or(f64::INFINITY));
        }
        parts.push(format!("κ={k}, α={a}: {}", rep.verdict));
    }
    Ok(CriterionOutcome::new(
        8,
        "sign suite in the s variable",
        passed && center_gap < 1e-2,
        center_gap,
        1e-2,
        format!(
            "φ' < 0, φ'' > 0 at t ∈ {{0.05, 0.2, 1}}; measured is the worst φ''(0,t) formula gap; \
             boundary identity residual {k3:.2e}; {}",
            parts.join(", ")
        ),
    ))
}

fn center_limits(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let mut passed = true;
    let (mut g01, mut g2) = (0.0f64, 0.0f64);
    for k in [0.0, 1.0] {
        let g = RadialGeometry::space_form(3, k, 1.0, finite(1.0))?;
        let spectrum = solve(&g, o.nodes, 2)?;
        let (diag, _) = first_mode_diagnostics(&spectrum)?;
        let lim = g_limit_diagnostics(&diag, spectrum.lambda1(), &g)?;
        passed &= lim.verdict == Verdict::Pass;
        g01 = g01.max(lim.g0.abs()).max(lim.g1.abs());
        g2 = g2.max(lim.g2_error);
    }
    Ok(CriterionOutcome::new(
        9,
        "center limits of g",
        passed && g01 < 1e-5 && g2 < 1e-2,
        g2,
        1e-2,
        format!("max |g(0)|, |g'(0)| = {g01:.2e} (< 1e-5); measured is the worst relative g''(0) error, flat and κ=1"),
    ))
}

fn degeneration(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let mut worst = 0.0f64;
    let mut passed = true;
    for m in [1usize, 2, 3] {
        for r in degeneration_check(m, 1.0, finite(1.0), &o.compare())? {
            passed &= r.verdict == Verdict::Pass;
            worst = worst.max(r.max_signed_violation);
        }
    }
    Ok(CriterionOutcome::new(
        10,
        "κ = 0 degeneration of the Kähler and quaternion models",
        passed && worst <= 1e-6,
        worst,
        1e-6,
        "max |λ₁(model) - λ₁(real, dim 2m or 4m)| for m = 1, 2, 3".into(),
    ))
}

fn transplants(o: &SuiteOptions) -> Result<CriterionOutcome> {
    let popts = PresetOptions {
        compare: o.compare(),
        seed: o.seed,
        gamma_draws: o.gamma_draws,
        ..PresetOptions::default()
    };
    let reports = transplant_sweep(&popts)?;
    let failed: Vec<_> = reports.iter().filter(|r| r.verdict != Verdict::Pass).map(|r| r.scenario.clone()).collect();
    let worst = reports.iter().map(|r| r.max_signed_violation).fold(f64::NEG_INFINITY, f64::max);
    let budget = reports.iter().map(|r| r.tolerance_budget).fold(f64::INFINITY, f64::min);
    let totally_geodesic: Vec<_> = reports.iter().filter(|r| r.scenario.ends_with("gamma-1")).collect();
    let zero_margin = totally_geodesic.iter().all(|r| r.max_signed_violation.abs() <= r.tolerance_budget);
    let equality = totally_geodesic
        .iter()
        .filter(|r| r.check == "barta")
        .all(|r| r.details.get("equality").and_then(|v| v.as_str()) == Some("pass"));
    Ok(CriterionOutcome::new(
        11,
        "transplant suite",
        failed.is_empty() && zero_margin && equality && totally_geodesic.len() == 4,
        worst,
        budget,
        format!(
            "{} reports over flat and κ=1 models, {} seeded γ fields each (seed {}); γ≡1 zero margin: {zero_margin}, \
             eigenvalue equality: {equality}{}",
            reports.len(),
            o.gamma_draws,
            o.seed,
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    ))
}

type Criterion = fn(&SuiteOptions) -> Result<CriterionOutcome>;

const CRITERIA: [(u8, &str, Criterion); 11] = [
    (1, "closed-form eigenvalues", closed_form_eigenvalues),
    (2, "Neumann identity", neumann_identity),
    (3, "spectral vs time-stepped kernels", solver_cross_validation),
    (4, "kernel comparison battery", kernel_battery),
    (5, "eigenvalue orderings over κ sweep", eigen_sweep),
    (6, "Robin-parameter ordering", robin_monotonicity),
    (7, "λ₁ ≥ mκ inside the gate", m_kappa_bound),
    (8, "sign suite in the s variable", sign_suite),
    (9, "center limits of g", center_limits),
    (10, "κ = 0 degeneration of the Kähler and quaternion models", degeneration),
    (11, "transplant suite", transplants),
];

/// Runs one criterion by number.
pub fn run_criterion(id: u8, opts: &SuiteOptions) -> Option<CriterionOutcome> {
    CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|&(id, title, f)| f(opts).unwrap_or_else(|e| CriterionOutcome::errored(id, title, e)))
}

/// Runs every criterion in parallel; results are ordered by id.
pub fn run_suite(opts: &SuiteOptions) -> Vec<CriterionOutcome> {
    CRITERIA
        .par_iter()
        .map(|&(id, title, f)| f(opts).unwrap_or_else(|e| CriterionOutcome::errored(id, title, e)))
        .collect()
}
