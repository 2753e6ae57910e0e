//! Symmetric tridiagonal eigenpairs by Sturm-count bisection and inverse iteration.

use crate::{Error, Result};

const BISECTION_BUDGET: usize = 400;
const INVERSE_STEPS: usize = 4;

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Self {
        assert_eq!(e.len() + 1, d.len());
        Self { d, e }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let rad = if i > 0 { self.e[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - rad);
            hi = hi.max(self.d[i] + rad);
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.d[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.d[i] * x[i];
                if i > 0 {
                    acc += self.e[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.e[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// The `k` smallest eigenvalues, ascending.
    pub fn smallest_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        let n = self.len();
        let k = k.min(n);
        let (glo, ghi) = self.gershgorin();
        let norm = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
        let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * norm);
        let spread = (ghi - glo).max(norm * f64::EPSILON);
        let (glo, ghi) = (glo - 2.0 * f64::EPSILON * spread, ghi + 2.0 * f64::EPSILON * spread);
        let abs_tol = 2.0 * f64::EPSILON * norm;
        let mut out = Vec::with_capacity(k);
        let mut lo_start = glo;
        for i in 0..k {
            let (mut lo, mut hi) = (lo_start, ghi);
            let mut converged = false;
            for _ in 0..BISECTION_BUDGET {
                if hi - lo <= abs_tol.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs())) {
                    converged = true;
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if self.count_below(mid, pivmin) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if !converged {
                return Err(Error::Convergence { index: i, budget: BISECTION_BUDGET });
            }
            let lam = 0.5 * (lo + hi);
            out.push(lam);
            lo_start = lo;
        }
        Ok(out)
    }

    /// Unit eigenvector for an accurate eigenvalue estimate `lambda`,
    /// orthogonalized against `against`.
    pub fn inverse_iteration(&self, lambda: f64, seed: u64, against: &[&[f64]]) -> Vec<f64> {
        let n = self.len();
        let norm = self.norm_bound().max(f64::MIN_POSITIVE);
        let lu = TridiagonalLu::factor(&self.d, &self.e, lambda, f64::EPSILON * norm);
        // Deterministic, non-degenerate start vector.
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        let mut x: Vec<f64> = (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                0.5 + (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        for _ in 0..INVERSE_STEPS {
            orthogonalize(&mut x, against);
            normalize(&mut x);
            x = lu.solve(&x);
        }
        orthogonalize(&mut x, against);
        normalize(&mut x);
        x
    }
}

fn orthogonalize(x: &mut [f64], against: &[&[f64]]) {
    for v in against {
        let p: f64 = x.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        for (xi, vi) in x.iter_mut().zip(v.iter()) {
            *xi -= p * vi;
        }
    }
}

fn normalize(x: &mut [f64]) {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return;
    }
    let nrm = x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt() * scale;
    for v in x.iter_mut() {
        *v /= nrm;
    }
}

/// LU factorization of `T - σI` with partial pivoting (two superdiagonals).
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(diag: &[f64], off: &[f64], sigma: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - sigma).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                swap[i] = true;
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        Self { dl, d, du, du2, swap }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                let tmp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = tmp - self.dl[i] * x[i];
            } else {
                x[i + 1] -= self.dl[i] * x[i];
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            if i + 1 < n {
                acc -= self.du[i] * x[i + 1];
            }
            if i + 2 < n {
                acc -= self.du2[i] * x[i + 2];
            }
            x[i] = acc / self.d[i];
        }
        x
    }
}
