//! Robin eigenvalues and center-based Robin heat kernels of radial Laplace
//! operators on model geodesic balls and rotationally symmetric manifolds.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: `sn_κ`, radial weights and drifts for space forms, Kähler and
//!   quaternion-Kähler models and warped products, the `s(r)` substitutions and
//!   warped-product curvature checks.
//! - [`sturm`]: conservative discretization of `-(1/w)(w u')'` with a Robin,
//!   Neumann or Dirichlet end at `r = R`, the tridiagonal eigensolver and the
//!   first-eigenfunction diagnostics.
//! - [`heat`]: spectral synthesis of the center-based kernel, an independent
//!   Crank–Nicolson solver, and sign diagnostics in the `s` variable.
//! - [`compare`]: hypothesis-gated verdicts for kernel and eigenvalue
//!   comparisons, sub/supersolution residuals and transplant checks.
//! - [`suite`]: the canonical battery of scenarios run by `robin suite`.

pub mod compare;
pub mod error;
pub mod geometry;
pub mod heat;
pub mod numerics;
pub mod sturm;
pub mod suite;

pub use error::{Error, Result};

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
    /// Violations exist but stay below the noise floor of the discretization.
    Inconclusive,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::Pass)
    }

    /// `true` unless the verdict is a hard failure.
    pub fn is_acceptable(self) -> bool {
        !matches!(self, Verdict::Fail)
    }

    /// Combines two verdicts, keeping the worst one.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (NotApplicable, x) | (x, NotApplicable) => x,
            (Pass, Pass) => Pass,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not-applicable",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}
