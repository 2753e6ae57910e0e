//! Small numerical kernels shared by the solvers: finite-difference weights,
//! local interpolation, least-squares polynomial fits and quadrature.

mod fd;
mod fit;
mod quad;

pub use fd::{derivative, fornberg_weights, stencil_derivative_at, EndTreatment};
pub use fit::{polyfit, polyval, PolyFit};
pub use quad::{gauss_legendre, integrate_adaptive, GL5_NODES, GL5_WEIGHTS};

/// Lagrange interpolation of samples on a uniform grid `x_j = j*h`,
/// using `width` nodes around `x`. With `even` set, the samples are
/// extended to negative `x` by `f(-x) = f(x)`.
pub fn interp_uniform(values: &[f64], h: f64, x: f64, width: usize, even: bool) -> f64 {
    let n = values.len();
    debug_assert!(n >= width && width >= 2);
    let pos = x / h;
    let half = (width / 2) as isize;
    let mut start = pos.floor() as isize - half + 1;
    let last = n as isize - 1;
    if !even && start < 0 {
        start = 0;
    }
    if start + width as isize - 1 > last {
        start = last - width as isize + 1;
    }
    let nodes: Vec<f64> = (0..width).map(|i| (start + i as isize) as f64).collect();
    let w = fornberg_weights(pos, &nodes, 0);
    let mut acc = 0.0;
    for (i, wi) in w[0].iter().enumerate() {
        let idx = (start + i as isize).unsigned_abs();
        acc += wi * values[idx];
    }
    acc
}

/// Index of the interval `[xs[i], xs[i+1]]` containing `x` in an increasing
/// table (clamped to the table ends).
pub fn bracket(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    if x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    match xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    }
}

/// Piecewise-linear interpolation in an increasing table.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = bracket(xs, x);
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Cubic Hermite interpolation from values and first derivatives.
pub fn interp_hermite(xs: &[f64], ys: &[f64], dys: &[f64], x: f64) -> f64 {
    let i = bracket(xs, x);
    let h = xs[i + 1] - xs[i];
    let t = (x - xs[i]) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * ys[i] + h10 * h * dys[i] + h01 * ys[i + 1] + h11 * h * dys[i + 1]
}
