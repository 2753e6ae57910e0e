//! Run configuration: command-line flags layered over an optional TOML file,
//! resolved to a complete, validated record that is echoed in every report.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use robin_core::geometry::RobinParameter;
use robin_core::sturm::{default_modes, DEFAULT_NODES};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eigen,
    Kernel,
    Compare,
    Suite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    /// Real space form of constant curvature κ.
    Real,
    /// Kähler model, holomorphic sectional curvature 4κ, complex dimension `dim`.
    Kahler,
    /// Quaternion-Kähler model, quaternionic dimension `dim`.
    Quaternion,
    /// Warped product with `f = sn` at curvature `warp-kappa`.
    Warped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Spectral,
    Timestep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisArg {
    RicciLower,
    SectUpper,
}

/// Every field is optional so that flags and file entries can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    /// Command to run when none is given on the command line (config files only).
    #[arg(skip)]
    pub command: Option<Command>,
    #[arg(long, global = true, value_enum)]
    pub family: Option<FamilyArg>,
    /// Dimension: real for `real`/`warped`, complex for `kahler`, quaternionic for `quaternion`.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Curvature κ of the model (the rhs ball in `compare`).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Curvature of the warping function for `--family warped`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub warp_kappa: Option<f64>,
    /// Geodesic radius R of the ball.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Robin parameter: a number, or `dirichlet`/`inf`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<RobinParameter>,
    /// Accept α < 0 for `eigen` and `kernel` (outside every comparison result).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub allow_negative_alpha: Option<bool>,
    /// Curvature of the warped lhs ball in a custom `compare` run.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lhs_kappa: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub hypothesis: Option<HypothesisArg>,
    /// Number of grid nodes N.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Number of retained modes k.
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    /// Comma-separated output times.
    #[arg(long, global = true, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, global = true, value_enum)]
    pub solver: Option<Solver>,
    /// Initial Gaussian width σ for `--solver timestep`; defaults to 4h.
    #[arg(long, global = true)]
    pub mollifier_width: Option<f64>,
    /// Named comparison battery: sphere-vs-flat, hyperbolic-vs-flat,
    /// kahler-degeneration, transplant-gamma-sweep.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Seed for the random γ fields.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of random γ fields per model in the transplant sweep.
    #[arg(long, global = true)]
    pub gamma_draws: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "ROBIN_OUT_DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

macro_rules! layer {
    ($self:ident, $other:ident, $($f:ident),*) => {
        $( if $other.$f.is_some() { $self.$f = $other.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: &RunConfig) -> Self {
        layer!(
            self, other, command, family, dim, kappa, warp_kappa, radius, alpha, allow_negative_alpha, lhs_kappa,
            hypothesis, grid, modes, times, solver, mollifier_width, preset, seed, gamma_draws, out, format
        );
        self
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let command = self.command.ok_or_else(|| CliError::Config("no command given".into()))?;
        let grid = self.grid.unwrap_or(DEFAULT_NODES);
        let r = Resolved {
            command,
            family: self.family.unwrap_or(FamilyArg::Real),
            dim: self.dim.unwrap_or(3),
            kappa: self.kappa.unwrap_or(0.0),
            warp_kappa: self.warp_kappa,
            radius: self.radius.unwrap_or(1.0),
            alpha: self.alpha.unwrap_or(RobinParameter::Finite(1.0)),
            allow_negative_alpha: self.allow_negative_alpha.unwrap_or(false),
            lhs_kappa: self.lhs_kappa,
            hypothesis: self.hypothesis,
            grid,
            modes: self.modes.unwrap_or_else(|| default_modes(grid)),
            times: self.times.clone().unwrap_or_else(|| vec![0.05, 0.1, 0.2, 0.5, 1.0]),
            solver: self.solver.unwrap_or(Solver::Spectral),
            mollifier_width: self.mollifier_width,
            preset: self.preset.clone(),
            seed: self.seed.unwrap_or(0),
            gamma_draws: self.gamma_draws.unwrap_or(100),
            out: self.out.clone().unwrap_or_else(|| PathBuf::from(".")),
            format: self.format.unwrap_or(Format::Json),
        };
        r.validate()?;
        Ok(r)
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Resolved {
    pub command: Command,
    pub family: FamilyArg,
    pub dim: usize,
    pub kappa: f64,
    pub warp_kappa: Option<f64>,
    pub radius: f64,
    pub alpha: RobinParameter,
    pub allow_negative_alpha: bool,
    pub lhs_kappa: Option<f64>,
    pub hypothesis: Option<HypothesisArg>,
    pub grid: usize,
    pub modes: usize,
    pub times: Vec<f64>,
    pub solver: Solver,
    pub mollifier_width: Option<f64>,
    pub preset: Option<String>,
    pub seed: u64,
    pub gamma_draws: usize,
    #[serde(skip)]
    pub out: PathBuf,
    pub format: Format,
}

impl Resolved {
    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.grid < robin_core::sturm::MIN_NODES {
            return bad(format!("grid must have at least {} nodes, got {}", robin_core::sturm::MIN_NODES, self.grid));
        }
        if self.modes == 0 {
            return bad("modes must be positive".into());
        }
        if self.times.is_empty() {
            return bad("times must not be empty".into());
        }
        if self.family == FamilyArg::Warped && self.warp_kappa.is_none() {
            return bad("--family warped needs --warp-kappa".into());
        }
        if let RobinParameter::Finite(a) = self.alpha {
            let negative_ok = matches!(self.command, Command::Eigen | Command::Kernel) && self.allow_negative_alpha;
            if a < 0.0 && !negative_ok {
                return bad(format!(
                    "α = {a} is negative; comparison results need α ≥ 0 (eigen and kernel accept \
                     --allow-negative-alpha)"
                ));
            }
        }
        if self.command == Command::Compare && self.preset.is_none() && self.lhs_kappa.is_none() {
            return bad("compare needs --preset or --lhs-kappa".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let file = parse("command = \"eigen\"\ndim = 2\nradius = 2.0\n");
        let flags = RunConfig { radius: Some(1.0), ..Default::default() };
        let r = file.overlay(&flags).resolve().unwrap();
        assert_eq!((r.dim, r.radius), (2, 1.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("radiuss = 1.0\n").is_err());
    }

    #[test]
    fn dirichlet_alpha_from_file() {
        let r = parse("command = \"eigen\"\nalpha = \"dirichlet\"\n").resolve().unwrap();
        assert_eq!(r.alpha, RobinParameter::Dirichlet);
    }

    #[test]
    fn negative_alpha_needs_opt_in() {
        let base = parse("command = \"eigen\"\nalpha = -1.0\n");
        assert!(base.resolve().is_err());
        let opted = base.overlay(&RunConfig { allow_negative_alpha: Some(true), ..Default::default() });
        assert!(opted.resolve().is_ok());
        let compare = opted.overlay(&RunConfig { command: Some(Command::Compare), preset: Some("sphere-vs-flat".into()), ..Default::default() });
        assert!(compare.resolve().is_err());
    }

    #[test]
    fn compare_needs_a_scenario() {
        assert!(parse("command = \"compare\"\n").resolve().is_err());
        assert!(parse("command = \"compare\"\nlhs-kappa = 0.5\n").resolve().is_ok());
    }

    #[test]
    fn grid_too_small() {
        assert!(parse("command = \"eigen\"\ngrid = 3\n").resolve().is_err());
    }
}
