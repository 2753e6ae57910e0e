//! `H̄(r, t) = Σ e^{-λ_i t} φ_i(0) φ_i(r)` over the retained modes.

use super::{HeatKernelField, Provenance, TimeGrid};
use crate::sturm::SpectralData;
use crate::{Error, Result};

/// Kernel synthesis is trusted once the tail bound drops below this fraction of `H̄(0, t)`.
pub const TMIN_RATIO: f64 = 1e-6;

fn abs_sum_max(spectrum: &SpectralData) -> f64 {
    let c = spectrum.center_values();
    let n = spectrum.grid.n;
    (0..n)
        .map(|j| spectrum.modes.iter().zip(&c).map(|(m, ci)| (ci * m[j]).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn center_value(spectrum: &SpectralData, t: f64) -> f64 {
    spectrum.lambdas.iter().zip(&spectrum.modes).map(|(l, m)| (-l * t).exp() * m[0] * m[0]).sum()
}

/// `e^{-λ_k t} · max_r Σ_i |φ_i(0) φ_i(r)|` with `λ_k` the last retained eigenvalue.
pub fn spectral_tail(spectrum: &SpectralData, t: f64) -> f64 {
    (-spectrum.lambdas[spectrum.len() - 1] * t).exp() * abs_sum_max(spectrum)
}

/// Smallest `t` with tail bound below `TMIN_RATIO · H̄(0, t)`.
pub fn t_min(spectrum: &SpectralData) -> f64 {
    let s = abs_sum_max(spectrum);
    let lk = spectrum.lambdas[spectrum.len() - 1];
    let ok = |t: f64| (-lk * t).exp() * s < TMIN_RATIO * center_value(spectrum, t);
    let mut hi = 1e-3;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = 1e-14;
    if ok(lo) {
        return lo;
    }
    for _ in 0..100 {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo < 1.0 + 1e-10 {
            break;
        }
    }
    hi
}

/// Spectral kernel on the full grid of `spectrum`; rejects times below [`t_min`].
pub fn kernel_spectral(spectrum: &SpectralData, tgrid: &TimeGrid) -> Result<HeatKernelField> {
    let tmin = t_min(spectrum);
    let t1 = tgrid.first();
    if t1 < tmin {
        return Err(Error::BelowTmin {
            t: t1,
            t_min: tmin,
            tail: spectral_tail(spectrum, t1),
            kernel: center_value(spectrum, t1),
        });
    }
    let n = spectrum.grid.n;
    let c = spectrum.center_values();
    let mut values = Vec::with_capacity(tgrid.len());
    let mut dt = Vec::with_capacity(tgrid.len());
    let mut tails = Vec::with_capacity(tgrid.len());
    let mut mass = Vec::with_capacity(tgrid.len());
    for &t in tgrid.times() {
        let mut h = vec![0.0; n];
        let mut d = vec![0.0; n];
        for ((lam, phi), ci) in spectrum.lambdas.iter().zip(&spectrum.modes).zip(&c) {
            let a = (-lam * t).exp() * ci;
            if a == 0.0 {
                continue;
            }
            for j in 0..n {
                h[j] += a * phi[j];
                d[j] -= lam * a * phi[j];
            }
        }
        mass.push(h.iter().zip(&spectrum.mass).map(|(v, m)| v * m).sum());
        tails.push(spectral_tail(spectrum, t));
        values.push(h);
        dt.push(d);
    }
    Ok(HeatKernelField {
        geom: spectrum.geom.clone(),
        provenance: Provenance::Spectral,
        r: spectrum.grid.nodes(),
        t: tgrid.times().to_vec(),
        values,
        time_derivative: Some(dt),
        tail_bound: Some(tails),
        mass,
    })
}

/// `-∂_t log H̄(0, t)`, evaluated stably for large `t`.
pub fn kernel_log_slope(spectrum: &SpectralData, t: f64) -> f64 {
    let l1 = spectrum.lambdas[0];
    let (mut num, mut den) = (0.0, 0.0);
    for (l, m) in spectrum.lambdas.iter().zip(&spectrum.modes) {
        let wgt = (-(l - l1) * t).exp() * m[0] * m[0];
        num += l * wgt;
        den += wgt;
    }
    num / den
}

/// Spectral evolution `Σ e^{-λ_i t} ⟨f, φ_i⟩ φ_i` of a grid function.
pub fn propagate(spectrum: &SpectralData, f: &[f64], t: f64) -> Vec<f64> {
    let n = spectrum.grid.n;
    let mut out = vec![0.0; n];
    for (lam, phi) in spectrum.lambdas.iter().zip(&spectrum.modes) {
        let a = (-lam * t).exp() * spectrum.inner(f, phi);
        for j in 0..n {
            out[j] += a * phi[j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{RadialGeometry, RobinParameter::Finite};
    use crate::sturm::solve;

    fn flat_spectrum(alpha: f64) -> SpectralData {
        let g = RadialGeometry::space_form(3, 0.0, 1.0, Finite(alpha)).unwrap();
        solve(&g, 2049, 300).unwrap()
    }

    #[test]
    fn small_time_matches_euclidean_kernel() {
        let spectrum = flat_spectrum(1.0);
        assert!(t_min(&spectrum) < 5e-3);
        let t = 0.01;
        let f = kernel_spectral(&spectrum, &TimeGrid::new(vec![t]).unwrap()).unwrap();
        let euclid = (4.0 * std::f64::consts::PI * t).powf(-1.5);
        assert!((f.values[0][0] / euclid - 1.0).abs() < 0.05);
    }

    #[test]
    fn neumann_mass_is_one() {
        let spectrum = flat_spectrum(0.0);
        let f = kernel_spectral(&spectrum, &TimeGrid::new(vec![0.01, 0.1, 1.0, 2.0]).unwrap()).unwrap();
        for m in &f.mass {
            assert!((m - 1.0).abs() < 1e-6, "{m}");
        }
    }

    #[test]
    fn first_mode_dominates_at_large_time() {
        let spectrum = flat_spectrum(1.0);
        let t = 20.0 / (spectrum.lambdas[1] - spectrum.lambdas[0]);
        let f = kernel_spectral(&spectrum, &TimeGrid::new(vec![t]).unwrap()).unwrap();
        let l1 = spectrum.lambdas[0];
        let c = spectrum.modes[0][0];
        for j in (0..spectrum.grid.n).step_by(64) {
            let lead = c * spectrum.modes[0][j];
            assert!(((l1 * t).exp() * f.values[0][j] / lead - 1.0).abs() < 1e-6);
        }
        assert!((kernel_log_slope(&spectrum, t) / l1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_times_below_tmin() {
        let spectrum = flat_spectrum(1.0);
        let err = kernel_spectral(&spectrum, &TimeGrid::new(vec![1e-7]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::BelowTmin { .. }));
    }

    #[test]
    fn semigroup_property() {
        let spectrum = flat_spectrum(1.0);
        let f = kernel_spectral(&spectrum, &TimeGrid::new(vec![0.05, 0.15]).unwrap()).unwrap();
        let p = propagate(&spectrum, &f.values[0], 0.1);
        let scale = f.values[1][0];
        for (a, b) in p.iter().zip(&f.values[1]) {
            assert!((a - b).abs() < 1e-6 * scale);
        }
    }
}
