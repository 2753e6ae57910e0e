//! Heat-equation residuals of a sampled field on a given ball.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::ComparisonReport;
use crate::geometry::{RadialGeometry, RobinParameter};
use crate::heat::HeatKernelField;
use crate::numerics::fornberg_weights;
use crate::sturm::{assemble, Grid};
use crate::{Error, Result, Verdict};

/// Relative tolerance when `∂_t F` is supplied exactly.
const EXACT_DT_TOLERANCE: f64 = 1e-4;
/// Relative tolerance when `∂_t F` comes from differencing the time slices.
const DIFFERENCED_DT_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualMode {
    /// Both residuals `≥ -tol`.
    Super,
    /// Both residuals `≤ +tol`.
    Sub,
}

/// `∂_t F` by three-point differences in `t`; the first and last slices use
/// one-sided stencils.
fn time_differences(t: &[f64], values: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let nt = t.len();
    if nt < 2 {
        return Err(Error::InvalidTimeGrid("differencing in time needs at least two slices".into()));
    }
    let n = values[0].len();
    let mut out = Vec::with_capacity(nt);
    for k in 0..nt {
        let idx: Vec<usize> = if nt == 2 {
            vec![0, 1]
        } else if k == 0 {
            vec![0, 1, 2]
        } else if k == nt - 1 {
            vec![nt - 3, nt - 2, nt - 1]
        } else {
            vec![k - 1, k, k + 1]
        };
        let nodes: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
        let w = &fornberg_weights(t[k], &nodes, 1)[1];
        out.push((0..n).map(|j| idx.iter().zip(w).map(|(&i, c)| c * values[i][j]).sum()).collect());
    }
    Ok(out)
}

/// `F'(R)` from a fourth-order one-sided stencil.
fn boundary_slope(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    let nodes: Vec<f64> = (0..5).map(|i| -(i as f64) * h).collect();
    let w = &fornberg_weights(0.0, &nodes, 1)[1];
    (0..5).map(|i| w[i] * f[n - 1 - i]).sum()
}

/// Interior residual `∂_t F - (1/w)(wF')'` and boundary residual `F'(R) + αF(R)`
/// of `field` on `geom`, each relative to the size of its terms per time slice.
/// `tolerance` overrides the default relative tolerance.
pub fn sub_supersolution_residual(
    field: &HeatKernelField,
    geom: &RadialGeometry,
    mode: ResidualMode,
    tolerance: Option<f64>,
) -> Result<ComparisonReport> {
    let started = Instant::now();
    if (field.geom.radius - geom.radius).abs() > 1e-12 * geom.radius {
        return Err(Error::Precondition("field and geometry radii differ".into()));
    }
    if !(field.min_value() > 0.0) {
        return Err(Error::Precondition("sub/supersolution residuals need a positive field".into()));
    }
    let grid = Grid::new(geom.radius, field.r.len())?;
    let op = assemble(geom, grid)?;
    let n = grid.n;
    let h = grid.h();
    let mut rep = ComparisonReport::new(&format!("residual-{}", geom.label()), "sub-supersolution-residual");

    let (dt, exact) = match &field.time_derivative {
        Some(d) => (d.clone(), true),
        None => {
            rep.notes.push("∂_t F differenced in time; the first slice uses a one-sided stencil".into());
            (time_differences(&field.t, &field.values)?, false)
        }
    };
    let tol = tolerance.unwrap_or(if exact { EXACT_DT_TOLERANCE } else { DIFFERENCED_DT_TOLERANCE });
    let sgn = match mode {
        ResidualMode::Super => -1.0,
        ResidualMode::Sub => 1.0,
    };

    // Violation is `sgn·residual`: positive means the asserted sign fails.
    let mut worst_interior = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut worst_boundary = (f64::NEG_INFINITY, 0.0);
    for (k, f) in field.values.iter().enumerate() {
        let af = op.apply(f);
        let scale = af
            .iter()
            .chain(dt[k].iter())
            .fold(0.0f64, |a, x| a.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        for j in 0..n - 1 {
            let res = (dt[k][j] + af[j]) / scale;
            if sgn * res > worst_interior.0 {
                worst_interior = (sgn * res, field.r[j], field.t[k]);
            }
        }
        let b = match geom.alpha {
            RobinParameter::Finite(a) => {
                let slope = boundary_slope(f, h);
                (slope + a * f[n - 1]) / slope.abs().max(a * f[n - 1]).max(f64::MIN_POSITIVE)
            }
            // On a Dirichlet ball the boundary inequality reads `F(R) ≥ 0`.
            RobinParameter::Dirichlet => f[n - 1] / f.iter().cloned().fold(0.0, f64::max),
        };
        if sgn * b > worst_boundary.0 {
            worst_boundary = (sgn * b, field.t[k]);
        }
    }
    let violation = worst_interior.0.max(worst_boundary.0);
    rep.verdict = if violation <= tol { Verdict::Pass } else { Verdict::Fail };
    rep.max_signed_violation = violation;
    rep.tolerance_budget = tol;
    rep.grids = vec![n];
    rep.detail("mode", format!("{mode:?}").to_lowercase());
    rep.detail("interior_violation", worst_interior.0);
    rep.detail("worst_interior_r", worst_interior.1);
    rep.detail("worst_interior_t", worst_interior.2);
    rep.detail("boundary_violation", worst_boundary.0);
    rep.detail("worst_boundary_t", worst_boundary.1);
    rep.detail("exact_time_derivative", exact);
    Ok(rep.finish(started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{RobinParameter::Finite, WarpingFunction};
    use crate::heat::{kernel_spectral, TimeGrid};
    use crate::sturm::solve;

    fn flat_kernel() -> (RadialGeometry, HeatKernelField) {
        let g = RadialGeometry::space_form(3, 0.0, 1.0, Finite(1.0)).unwrap();
        let f = kernel_spectral(&solve(&g, 1025, 250).unwrap(), &TimeGrid::new(vec![0.05, 0.2, 1.0]).unwrap()).unwrap();
        (g, f)
    }

    #[test]
    fn own_kernel_has_vanishing_residuals() {
        let (g, f) = flat_kernel();
        for mode in [ResidualMode::Super, ResidualMode::Sub] {
            let rep = sub_supersolution_residual(&f, &g, mode, None).unwrap();
            assert_eq!(rep.verdict, Verdict::Pass, "{rep:#?}");
            assert!(rep.details["interior_violation"].as_f64().unwrap().abs() < 1e-8, "{rep:#?}");
        }
    }

    #[test]
    fn boundary_residual_shrinks_with_refinement() {
        let g = RadialGeometry::space_form(3, 0.0, 1.0, Finite(1.0)).unwrap();
        let tg = TimeGrid::new(vec![0.05, 0.2, 1.0]).unwrap();
        let mut prev = f64::INFINITY;
        for n in [513, 1025, 2049] {
            let f = kernel_spectral(&solve(&g, n, 250).unwrap(), &tg).unwrap();
            let rep = sub_supersolution_residual(&f, &g, ResidualMode::Sub, None).unwrap();
            let b = rep.details["boundary_violation"].as_f64().unwrap().abs();
            assert!(b < 0.6 * prev, "{n}: {b} vs {prev}");
            prev = b;
        }
    }

    #[test]
    fn growing_factor_is_a_strict_supersolution() {
        let (g, mut f) = flat_kernel();
        let d = f.time_derivative.take().unwrap();
        let mut grown = f.clone();
        grown.time_derivative = Some(
            f.t.iter()
                .enumerate()
                .map(|(k, &t)| d[k].iter().zip(&f.values[k]).map(|(dt, v)| t.exp() * (dt + v)).collect())
                .collect(),
        );
        for (k, &t) in f.t.iter().enumerate() {
            grown.values[k] = f.values[k].iter().map(|v| t.exp() * v).collect();
        }
        let sup = sub_supersolution_residual(&grown, &g, ResidualMode::Super, None).unwrap();
        assert_eq!(sup.verdict, Verdict::Pass, "{sup:#?}");
        let sub = sub_supersolution_residual(&grown, &g, ResidualMode::Sub, None).unwrap();
        assert_eq!(sub.verdict, Verdict::Fail);
    }

    #[test]
    fn transplanted_flat_kernel_is_subsolution_on_sphere() {
        let (_, f) = flat_kernel();
        let sphere = RadialGeometry::warped(3, WarpingFunction::sn_kappa(1.0), 1.0, Finite(1.0)).unwrap();
        let rep = sub_supersolution_residual(&f, &sphere, ResidualMode::Sub, None).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:#?}");
        let sup = sub_supersolution_residual(&f, &sphere, ResidualMode::Super, None).unwrap();
        assert_eq!(sup.verdict, Verdict::Fail);
    }

    #[test]
    fn differenced_time_derivative_is_flagged() {
        let g = RadialGeometry::space_form(3, 0.0, 1.0, Finite(1.0)).unwrap();
        let tg = TimeGrid::geometric(0.05, 1.0, 60).unwrap();
        let mut f = kernel_spectral(&solve(&g, 1025, 250).unwrap(), &tg).unwrap();
        f.time_derivative = None;
        let rep = sub_supersolution_residual(&f, &g, ResidualMode::Super, None).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:#?}");
        assert!(!rep.notes.is_empty());
    }
}
