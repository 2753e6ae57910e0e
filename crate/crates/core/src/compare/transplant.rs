//! Space-form heat kernels and first eigenfunctions re-read as functions of
//! ambient distance on a submanifold, through the `s` variable.
//!
//! The submanifold enters only through `γ(r) = |∇^M d(o, ·)|` on `(0, 1]` and
//! the boundary angle `⟨∇^M d, ν⟩ ∈ [-1, 1]`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CompareOptions, ComparisonReport};
use crate::geometry::{sn, sn_prime, substitution_for, Family, RadialGeometry};
use crate::heat::{kernel_spectral, substituted_diagnostics, SubstitutedKernel, SubstitutedReport, TimeGrid};
use crate::numerics::{interp_linear, interp_uniform};
use crate::sturm::{
    assemble, first_mode_diagnostics, lambda_lower_bound_check, rayleigh, solve, w_convexity_check, EigfuncDiagnostics,
    WConvexity,
};
use crate::{Error, Result, Verdict};

/// Relative tolerance of the transplanted residuals.
const TRANSPLANT_TOLERANCE: f64 = 1e-4;
/// Relative tolerance of the equality case `λ_M = λ̄₁`.
const EQUALITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransplantScenario {
    pub id: String,
    /// Space-form model ball.
    pub model: RadialGeometry,
    /// Samples of `γ` at equally spaced radii on `[0, R]`, interpolated
    /// linearly; a single sample means a constant field.
    pub gamma: Vec<f64>,
    pub boundary_angle: f64,
}

impl TransplantScenario {
    pub fn constant(id: &str, model: RadialGeometry, gamma: f64, boundary_angle: f64) -> Self {
        Self { id: id.to_string(), model, gamma: vec![gamma], boundary_angle }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.model.family != Family::RealSpaceForm || self.model.drift_damping != 0.0 {
            return Err(Error::InvalidScenario("transplants start from a space-form model".into()));
        }
        if !self.model.alpha.is_positive() || self.model.alpha.is_dirichlet() {
            return Err(Error::InvalidScenario(format!("transplants need finite α > 0, got {}", self.model.alpha)));
        }
        if !self.model.arctan_gate() {
            return Err(Error::InvalidScenario(format!(
                "R = {} exceeds arctan(α/√κ)/√κ for κ = {}",
                self.model.radius,
                self.model.kappa.value()
            )));
        }
        if self.gamma.is_empty() {
            return Err(Error::InvalidScenario("γ field has no samples".into()));
        }
        if let Some(g) = self.gamma.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
            return Err(Error::InvalidScenario(format!("γ must lie in (0, 1], got {g}")));
        }
        if !(-1.0..=1.0).contains(&self.boundary_angle) {
            return Err(Error::InvalidScenario(format!(
                "boundary angle must lie in [-1, 1], got {}",
                self.boundary_angle
            )));
        }
        Ok(())
    }

    /// `γ(r)` by linear interpolation of the samples.
    pub fn gamma_at(&self, r: f64) -> f64 {
        if self.gamma.len() == 1 {
            return self.gamma[0];
        }
        let knots: Vec<f64> = (0..self.gamma.len())
            .map(|i| self.model.radius * i as f64 / (self.gamma.len() - 1) as f64)
            .collect();
        interp_linear(&knots, &self.gamma, r)
    }
}

/// `count` fields of `knots` samples drawn uniformly from `[lo, hi]`.
pub fn random_gamma_fields(seed: u64, count: usize, knots: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..knots).map(|_| rng.random_range(lo..=hi)).collect()).collect()
}

fn check_model(ctx: &RadialGeometry, ts: &TransplantScenario) -> Result<()> {
    ts.validate()?;
    if *ctx != ts.model {
        return Err(Error::InvalidScenario("scenario model differs from the prepared context".into()));
    }
    Ok(())
}

/// The model kernel in the `s` variable, computed once and reused across γ fields.
#[derive(Debug, Clone)]
pub struct TransplantContext {
    pub model: RadialGeometry,
    pub kernel: SubstitutedKernel,
    pub signs: SubstitutedReport,
    /// `∂_t φ` on the `s`-grid.
    pub dt_phi: Vec<Vec<f64>>,
    /// `r(s_j)`, `sn_κ(r(s_j))` and `sn_κ'(r(s_j))`.
    pub r: Vec<f64>,
    pub sn: Vec<f64>,
    pub sn_prime: Vec<f64>,
    pub nodes: usize,
}

impl TransplantContext {
    pub fn new(model: &RadialGeometry, tgrid: &TimeGrid, opts: &CompareOptions) -> Result<Self> {
        TransplantScenario::constant("context", model.clone(), 1.0, 1.0).validate()?;
        let spectrum = solve(model, opts.nodes, opts.modes)?;
        let field = kernel_spectral(&spectrum, tgrid)?;
        let sub = substitution_for(model);
        let (kernel, signs) = substituted_diagnostics(&field, &sub, Some(&spectrum))?;
        let k = model.kappa.value();
        let h = field.h();
        let r: Vec<f64> = kernel.s.iter().map(|&s| sub.r_of_s(s).min(model.radius)).collect();
        let dt = field.time_derivative.as_ref().expect("spectral fields carry ∂_t");
        let dt_phi = dt.iter().map(|d| r.iter().map(|&x| interp_uniform(d, h, x, 6, true)).collect()).collect();
        Ok(Self {
            model: model.clone(),
            sn: r.iter().map(|&x| sn(k, x)).collect(),
            sn_prime: r.iter().map(|&x| sn_prime(k, x)).collect(),
            r,
            kernel,
            signs,
            dt_phi,
            nodes: opts.nodes,
        })
    }

    /// `∂_t φ - γ² sn² φ'' - m sn' φ' ≥ -tol` inside and
    /// `φ'(s(R)) sn(R) angle + α φ(s(R)) ≥ -tol` on the boundary.
    pub fn evaluate(&self, ts: &TransplantScenario) -> Result<ComparisonReport> {
        let started = Instant::now();
        check_model(&self.model, ts)?;
        let mut rep = ComparisonReport::new(&ts.id, "transplant");
        rep.grids = vec![self.nodes];
        let prerequisite = self.signs.times.iter().all(|t| t.first_derivative.is_pass() && t.second_derivative.is_pass());
        if !prerequisite {
            rep.notes.push("φ' < 0 and φ'' > 0 not verified on the model; no verdict issued".into());
            return Ok(rep.finish(started));
        }
        let m = self.model.dim as f64;
        let alpha = self.model.alpha.finite().expect("validated");
        let n = self.r.len();
        let gamma: Vec<f64> = self.r.iter().map(|&r| ts.gamma_at(r)).collect();
        let mut worst_interior = (f64::INFINITY, 0.0, 0.0);
        let mut worst_boundary = (f64::INFINITY, 0.0);
        let mut min_expected = f64::INFINITY;
        for (k, &t) in self.kernel.t.iter().enumerate() {
            let (phi, d1, d2, dt) = (&self.kernel.phi[k], &self.kernel.d1[k], &self.kernel.d2[k], &self.dt_phi[k]);
            let scale = dt.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
            for j in 0..n - 1 {
                let g2 = gamma[j] * gamma[j];
                let res = dt[j] - g2 * self.sn[j].powi(2) * d2[j] - m * self.sn_prime[j] * d1[j];
                let rel = res / scale;
                if rel < worst_interior.0 {
                    worst_interior = (rel, self.r[j], t);
                }
                min_expected = min_expected.min((1.0 - g2) * self.sn[j].powi(2) * d2[j].max(0.0) / scale);
            }
            let b = d1[n - 1] * self.sn[n - 1] * ts.boundary_angle + alpha * phi[n - 1];
            let rel = b / (alpha * phi[n - 1]);
            if rel < worst_boundary.0 {
                worst_boundary = (rel, t);
            }
        }
        let violation = -(worst_interior.0.min(worst_boundary.0));
        rep.verdict = if violation <= TRANSPLANT_TOLERANCE { Verdict::Pass } else { Verdict::Fail };
        rep.max_signed_violation = violation;
        rep.tolerance_budget = TRANSPLANT_TOLERANCE;
        rep.detail("min_interior_residual", worst_interior.0);
        rep.detail("worst_interior_r", worst_interior.1);
        rep.detail("worst_interior_t", worst_interior.2);
        rep.detail("min_boundary_residual", worst_boundary.0);
        rep.detail("worst_boundary_t", worst_boundary.1);
        rep.detail("min_gamma_deficit_term", min_expected);
        rep.detail("boundary_angle", ts.boundary_angle);
        rep.detail("times", json!(self.kernel.t));
        Ok(rep.finish(started))
    }
}

/// Checks the transplanted heat-kernel supersolution inequalities for one γ field.
pub fn transplant_check(ts: &TransplantScenario, tgrid: &TimeGrid, opts: &CompareOptions) -> Result<ComparisonReport> {
    ts.validate()?;
    TransplantContext::new(&ts.model, tgrid, opts)?.evaluate(ts)
}

/// The model's first eigenfunction in the `s` variable, computed once and
/// reused across γ fields.
#[derive(Debug, Clone)]
pub struct BartaContext {
    pub model: RadialGeometry,
    pub diag: EigfuncDiagnostics,
    pub convexity: WConvexity,
    /// `λ̄₁` on the model from the Rayleigh quotient of its eigenvector.
    pub rayleigh: f64,
    /// `(mκ, λ̄₁ - mκ)` on spherical models.
    pub m_kappa_bound: Option<(f64, f64)>,
    pub nodes: usize,
}

impl BartaContext {
    pub fn new(model: &RadialGeometry, opts: &CompareOptions) -> Result<Self> {
        TransplantScenario::constant("context", model.clone(), 1.0, 1.0).validate()?;
        let spectrum = solve(model, opts.nodes, 2)?;
        let (diag, _) = first_mode_diagnostics(&spectrum)?;
        let convexity = w_convexity_check(&diag)?;
        let op = assemble(model, spectrum.grid)?;
        let rayleigh = rayleigh(&spectrum.modes[0], &op)?;
        let m_kappa_bound = if model.kappa.value() > 0.0 {
            let c = lambda_lower_bound_check(model, &spectrum)?;
            Some((c.bound, c.margin))
        } else {
            None
        };
        Ok(Self { model: model.clone(), diag, convexity, rayleigh, m_kappa_bound, nodes: opts.nodes })
    }

    /// `-γ² sn² w'' - m sn' w' - λ̄₁ w ≥ -tol` inside and
    /// `angle·sn w' + α w ≥ -tol` at every radius a boundary point may sit.
    pub fn evaluate(&self, ts: &TransplantScenario) -> Result<ComparisonReport> {
        let started = Instant::now();
        check_model(&self.model, ts)?;
        let mut rep = ComparisonReport::new(&ts.id, "barta");
        rep.grids = vec![self.nodes];
        // Non-strict convexity is all the transplant needs.
        if !self.convexity.verdict.is_acceptable() {
            rep.notes.push("w' < 0, w'' ≥ 0 not verified on the model; no verdict issued".into());
            return Ok(rep.finish(started));
        }
        let d = &self.diag;
        let k = self.model.kappa.value();
        let m = self.model.dim as f64;
        let alpha = self.model.alpha.finite().expect("validated");
        let lambda = d.lambda;
        let n = d.r.len();
        let mut worst_interior = (f64::INFINITY, 0.0);
        let mut worst_boundary = (f64::INFINITY, 0.0);
        let (mut q_lo, mut q_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in 0..n {
            let r = d.r[j];
            let g = ts.gamma_at(r);
            let snr = sn(k, r);
            // At the center sn² w'' and sn' w' reduce to 0 and w'(0) = u''(0).
            let lap = g * g * snr * snr * d.w_ss[j] + m * sn_prime(k, r) * d.w_s[j];
            let res = (-lap - lambda * d.u[j]) / lambda;
            if res < worst_interior.0 {
                worst_interior = (res, r);
            }
            let q = -lap / d.u[j];
            q_lo = q_lo.min(q);
            q_hi = q_hi.max(q);
            if j > 0 {
                let b = (ts.boundary_angle * d.du[j] + alpha * d.u[j]) / (alpha * d.u[j]);
                if b < worst_boundary.0 {
                    worst_boundary = (b, r);
                }
            }
        }
        let violation = -(worst_interior.0.min(worst_boundary.0));
        let mut verdict = if violation <= TRANSPLANT_TOLERANCE { Verdict::Pass } else { Verdict::Fail };
        let totally_geodesic = ts.gamma.iter().all(|g| *g == 1.0) && ts.boundary_angle == 1.0;
        if totally_geodesic {
            let gap = (self.rayleigh - lambda).abs() / lambda;
            rep.detail("equality_gap", gap);
            let equality = if gap <= EQUALITY_TOLERANCE { Verdict::Pass } else { Verdict::Fail };
            rep.detail("equality", equality.to_string());
            verdict = verdict.and(equality);
        }
        rep.verdict = verdict;
        rep.max_signed_violation = violation;
        rep.tolerance_budget = TRANSPLANT_TOLERANCE;
        rep.detail("certified_lower_bound", lambda);
        rep.detail("min_interior_residual", worst_interior.0);
        rep.detail("worst_interior_r", worst_interior.1);
        rep.detail("min_boundary_residual", worst_boundary.0);
        rep.detail("worst_boundary_r", worst_boundary.1);
        rep.detail("barta_quotient_min", q_lo);
        rep.detail("barta_quotient_max", q_hi);
        if let Some((bound, margin)) = self.m_kappa_bound {
            rep.detail("lambda_vs_m_kappa_bound", bound);
            rep.detail("lambda_vs_m_kappa_margin", margin);
        }
        Ok(rep.finish(started))
    }
}

/// Barta-type lower bound `λ_{1,α}(M) ≥ λ̄₁` certified for one γ field.
pub fn barta_bound(ts: &TransplantScenario, opts: &CompareOptions) -> Result<ComparisonReport> {
    ts.validate()?;
    match BartaContext::new(&ts.model, opts) {
        Ok(ctx) => ctx.evaluate(ts),
        Err(Error::Precondition(msg)) => {
            let mut rep = ComparisonReport::new(&ts.id, "barta");
            rep.notes.push(format!("convexity prerequisite unavailable: {msg}"));
            Ok(rep)
        }
        Err(e) => Err(e),
    }
}
