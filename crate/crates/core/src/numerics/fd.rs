/// Fornberg's algorithm: weights `w[k][j]` such that
/// `f^(k)(x0) ≈ Σ_j w[k][j] f(nodes[j])` for `k = 0..=max_order`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// How a uniform-grid derivative is closed at the left end. The right end is
/// always one-sided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndTreatment {
    /// Samples of an even function of `x`: mirror across `x = 0`.
    Even,
    OneSided,
}

/// Derivative of order `order` (1..=3) at node `j` of a uniform grid, using a
/// stencil of `width` nodes, centred when possible.
pub fn stencil_derivative_at(
    values: &[f64],
    h: f64,
    j: usize,
    order: usize,
    width: usize,
    left: EndTreatment,
) -> f64 {
    let n = values.len() as isize;
    let half = (width / 2) as isize;
    let mut start = j as isize - half;
    if left == EndTreatment::OneSided && start < 0 {
        start = 0;
    }
    if start + width as isize > n {
        start = n - width as isize;
    }
    let nodes: Vec<f64> = (0..width).map(|i| (start + i as isize) as f64).collect();
    let w = fornberg_weights(j as f64, &nodes, order);
    let mut acc = 0.0;
    for (i, wi) in w[order].iter().enumerate() {
        acc += wi * values[(start + i as isize).unsigned_abs()];
    }
    acc / h.powi(order as i32)
}

/// Derivative of order `order` at every node. Interior stencils are the
/// 5-point centred ones (fourth order for orders 1 and 2); the ends use
/// one-sided stencils of matching order.
pub fn derivative(values: &[f64], h: f64, order: usize, left: EndTreatment) -> Vec<f64> {
    let width = match order {
        1 => 5,
        2 => 6,
        _ => 7,
    };
    let centred = if order <= 2 { 5 } else { 7 };
    let n = values.len();
    let half = centred / 2;
    (0..n)
        .map(|j| {
            let interior = j >= half && j + half < n;
            if interior || (left == EndTreatment::Even && j < half) {
                stencil_derivative_at(values, h, j, order, centred, left)
            } else {
                stencil_derivative_at(values, h, j, order, width, left)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centred_weights_match_textbook_stencil() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for i in 0..5 {
            assert!((w[1][i] - d1[i]).abs() < 1e-14);
            assert!((w[2][i] - d2[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_of_sine_are_fourth_order() {
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|j| (j as f64 * h).sin()).collect();
            let d1 = derivative(&v, h, 1, EndTreatment::OneSided);
            let d2 = derivative(&v, h, 2, EndTreatment::OneSided);
            (0..n)
                .map(|j| {
                    let x = j as f64 * h;
                    (d1[j] - x.cos()).abs().max((d2[j] + x.sin()).abs())
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn even_closure_uses_mirror_values() {
        let h = 0.01;
        let v: Vec<f64> = (0..50).map(|j| (j as f64 * h).cos()).collect();
        let d2 = derivative(&v, h, 2, EndTreatment::Even);
        assert!((d2[0] + 1.0).abs() < 1e-8);
        let d3 = derivative(&v, h, 3, EndTreatment::Even);
        assert!(d3[0].abs() < 1e-8);
    }
}
