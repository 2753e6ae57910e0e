use nalgebra::{DMatrix, DVector};

/// Least-squares polynomial `p(x) = Σ c_k (x/scale)^k`.
#[derive(Debug, Clone)]
pub struct PolyFit {
    pub coeffs: Vec<f64>,
    pub scale: f64,
    /// Root-mean-square residual of the fit.
    pub rms: f64,
}

impl PolyFit {
    /// Derivative of order `k` at `x = 0`.
    pub fn derivative_at_zero(&self, k: usize) -> f64 {
        if k >= self.coeffs.len() {
            return 0.0;
        }
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs[k] * fact / self.scale.powi(k as i32)
    }

    pub fn eval(&self, x: f64) -> f64 {
        polyval(&self.coeffs, x / self.scale)
    }
}

pub fn polyval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Fits a polynomial of the given degree through `(xs, ys)` by SVD least squares.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Option<PolyFit> {
    let n = xs.len();
    if n <= degree {
        return None;
    }
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(n, degree + 1, |i, k| (xs[i] / scale).powi(k as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).ok()?;
    let resid = &a * &c - &b;
    let rms = (resid.norm_squared() / n as f64).sqrt();
    Some(PolyFit {
        coeffs: c.iter().copied().collect(),
        scale,
        rms,
    })
}
