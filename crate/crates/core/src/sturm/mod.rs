//! Radial Robin eigenproblem `-(1/w)(w u')' = λu`, `u'(R) + αu(R) = 0`.
//!
//! The operator is discretized as a vertex-centred finite volume scheme on a
//! uniform grid: face conductances `c_{j+1/2} = w(r_{j+1/2})/h` and cell masses
//! `M_j = ∫ w` over `[r_j - h/2, r_j + h/2] ∩ [0, R]`. The vanishing weight at
//! `r = 0` removes the flux through the center, so `u'(0) = 0` needs no explicit
//! row, and the scheme reproduces `Δ r² = 2n` exactly in flat space. The stiffness matrix `K`
//! is symmetric; the generalized problem `K u = λ M u` is solved through
//! `M^{-1/2} K M^{-1/2}`.

mod diagnostics;
mod tridiag;

pub use diagnostics::{
    first_mode_diagnostics, g_limit_diagnostics, lambda_lower_bound_check, w_convexity_check,
    EigfuncDiagnostics, FirstModeReport, GLimits, LowerBoundCheck, WConvexity,
};
pub(crate) use diagnostics::sign_verdict;
pub use tridiag::SymTridiagonal;

use serde::{Deserialize, Serialize};

use crate::geometry::{RadialGeometry, RobinParameter};
use crate::numerics::gauss_legendre;
use crate::{Error, Result};

pub const MIN_NODES: usize = 64;
pub const DEFAULT_NODES: usize = 2049;
/// Grids must place at least this many nodes where `w < max(w)/100`.
pub const MIN_CENTER_NODES: usize = 8;

/// Default retained modes for `n` nodes.
pub fn default_modes(n: usize) -> usize {
    300.min(n / 4)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub radius: f64,
}

impl Grid {
    pub fn new(radius: f64, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!("grid needs at least {MIN_NODES} nodes, got {n}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidGrid(format!("grid radius must be positive, got {radius}")));
        }
        Ok(Self { n, radius })
    }

    pub fn h(&self) -> f64 {
        self.radius / (self.n - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.n {
            self.radius
        } else {
            j as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// The grid with `2n - 1` nodes (spacing halved).
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n - 1, radius: self.radius }
    }
}

/// Assembled stiffness and mass data for one geometry on one grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub geom: RadialGeometry,
    pub grid: Grid,
    /// `w(r_j)` at the nodes.
    pub weight: Vec<f64>,
    /// Cell mass `M_j` on the full grid.
    pub mass: Vec<f64>,
    /// Face conductances `c_{j+1/2}`, length `n - 1`.
    pub conductance: Vec<f64>,
    pub boundary: RobinParameter,
    /// `w(R)`, the weight multiplying the Robin term.
    pub boundary_weight: f64,
}

/// Builds the discrete operator; rejects grids that under-resolve the weight at the center.
pub fn assemble(geom: &RadialGeometry, grid: Grid) -> Result<DiscreteOperator> {
    geom.validate()?;
    if (grid.radius - geom.radius).abs() > 1e-12 * geom.radius {
        return Err(Error::InvalidGrid(format!(
            "grid radius {} differs from geometry radius {}",
            grid.radius, geom.radius
        )));
    }
    let n = grid.n;
    let weight: Vec<f64> = (0..n).map(|j| geom.weight(grid.node(j))).collect();
    let wmax = weight.iter().cloned().fold(0.0, f64::max);
    let resolved = weight.iter().filter(|&&w| w < wmax / 100.0).count();
    if resolved < MIN_CENTER_NODES {
        return Err(Error::InvalidGrid(format!(
            "grid of {n} nodes places only {resolved} nodes where w < max(w)/100; \
             need {MIN_CENTER_NODES}, refine the grid"
        )));
    }
    let mut mass = vec![0.0; n];
    let mut conductance = vec![0.0; n - 1];
    for j in 0..n - 1 {
        let (a, b) = (grid.node(j), grid.node(j + 1));
        let mid = 0.5 * (a + b);
        conductance[j] = geom.weight(mid) / (b - a);
        mass[j] += gauss_legendre(|x| geom.weight(x), a, mid);
        mass[j + 1] += gauss_legendre(|x| geom.weight(x), mid, b);
    }
    Ok(DiscreteOperator {
        boundary: geom.alpha,
        boundary_weight: geom.weight(geom.radius),
        geom: geom.clone(),
        grid,
        weight,
        mass,
        conductance,
    })
}

impl DiscreteOperator {
    /// Number of unknowns: `n`, or `n - 1` when the Dirichlet node is removed.
    pub fn active(&self) -> usize {
        if self.boundary.is_dirichlet() {
            self.grid.n - 1
        } else {
            self.grid.n
        }
    }

    fn robin_term(&self) -> f64 {
        match self.boundary {
            RobinParameter::Finite(a) => a * self.boundary_weight,
            RobinParameter::Dirichlet => 0.0,
        }
    }

    /// Stiffness diagonal and off-diagonal on the active nodes.
    pub fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let na = self.active();
        let c = &self.conductance;
        let mut d = vec![0.0; na];
        for (j, dj) in d.iter_mut().enumerate() {
            let left = if j > 0 { c[j - 1] } else { 0.0 };
            let right = c.get(j).copied().unwrap_or(0.0);
            *dj = left + right;
        }
        if !self.boundary.is_dirichlet() {
            d[na - 1] += self.robin_term();
        }
        let e = (0..na - 1).map(|j| -c[j]).collect();
        (d, e)
    }

    /// `K u` on the active nodes (`u` may carry the full grid; extra entries are ignored).
    pub fn apply_stiffness(&self, u: &[f64]) -> Vec<f64> {
        let na = self.active();
        let (d, e) = self.stiffness();
        (0..na)
            .map(|j| {
                let mut acc = d[j] * u[j];
                if j > 0 {
                    acc += e[j - 1] * u[j - 1];
                }
                if j + 1 < na {
                    acc += e[j] * u[j + 1];
                }
                acc
            })
            .collect()
    }

    /// Discrete `-(1/w)(w u')' = M⁻¹ K u` on the active nodes.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.apply_stiffness(u).iter().zip(&self.mass).map(|(k, m)| k / m).collect()
    }

    /// Symmetrized operator `M^{-1/2} K M^{-1/2}`.
    pub fn symmetrized(&self) -> SymTridiagonal {
        let (d, e) = self.stiffness();
        let m = &self.mass;
        let ds = d.iter().zip(m).map(|(dj, mj)| dj / mj).collect();
        let es = e.iter().enumerate().map(|(j, ej)| ej / (m[j] * m[j + 1]).sqrt()).collect();
        SymTridiagonal::new(ds, es)
    }

    /// Energy `Σ c_{j+1/2}(u_{j+1} - u_j)² + α w(R) u(R)²`, in difference form so
    /// that constants have exactly zero Neumann energy.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let n = self.grid.n;
        let dir = self.boundary.is_dirichlet();
        let val = |j: usize| if dir && j == n - 1 { 0.0 } else { u[j] };
        let mut e = 0.0;
        for j in 0..n - 1 {
            let du = val(j + 1) - val(j);
            e += self.conductance[j] * du * du;
        }
        if !dir {
            e += self.robin_term() * u[n - 1] * u[n - 1];
        }
        e
    }

    /// `Σ M_j u_j v_j` over the active nodes, the discrete `∫ u v w dr`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        (0..self.active()).map(|j| self.mass[j] * u[j] * v[j]).sum()
    }

    /// Discrete total mass `Σ M_j u_j`.
    pub fn total(&self, u: &[f64]) -> f64 {
        (0..self.active()).map(|j| self.mass[j] * u[j]).sum()
    }
}

/// Rayleigh quotient `(∫|u'|² w + α w(R) u(R)²) / ∫ u² w` of a grid function.
pub fn rayleigh(u: &[f64], op: &DiscreteOperator) -> Result<f64> {
    if u.len() != op.grid.n {
        return Err(Error::InvalidGrid(format!("expected {} samples, got {}", op.grid.n, u.len())));
    }
    let denom = op.inner(u, u);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::ZeroNorm("Rayleigh quotient of a function with zero weighted norm".into()));
    }
    Ok(op.energy(u) / denom)
}

/// Eigenpairs of one discrete operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralData {
    pub geom: RadialGeometry,
    pub grid: Grid,
    pub lambdas: Vec<f64>,
    /// `modes[i][j] = φ_i(r_j)` on the full grid; Dirichlet modes carry a trailing zero.
    pub modes: Vec<Vec<f64>>,
    /// Cell masses on the full grid (the Dirichlet node keeps its mass but a zero value).
    pub mass: Vec<f64>,
    /// `ω_{n-1}`; already folded into the weight so that `Σ M_j φ_i φ_k = δ_ik`.
    pub norm_constant: f64,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambda1(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn center_values(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m[0]).collect()
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }

    /// Largest `|⟨φ_i, φ_k⟩ - δ_ik|` over retained modes.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for k in i..self.len() {
                let p = self.inner(&self.modes[i], &self.modes[k]);
                let target = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((p - target).abs());
            }
        }
        worst
    }
}

/// The `k` smallest eigenpairs of `op`, ascending, weight-orthonormal,
/// with `φ_i(0) ≥ 0`.
pub fn eigensolve(op: &DiscreteOperator, k: usize) -> Result<SpectralData> {
    let na = op.active();
    if k == 0 || k > na.saturating_sub(2) {
        return Err(Error::InvalidGrid(format!(
            "mode count must be in 1..={} for {na} unknowns, got {k}",
            na.saturating_sub(2)
        )));
    }
    let a = op.symmetrized();
    let raw = a.smallest_eigenvalues(k)?;
    let cluster = 1e-6 * a.norm_bound();
    let sqrt_m: Vec<f64> = op.mass[..na].iter().map(|m| m.sqrt()).collect();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
    for (i, &lam) in raw.iter().enumerate() {
        let near: Vec<&[f64]> = raw[..i]
            .iter()
            .zip(&vectors)
            .filter(|(l, _)| (lam - **l).abs() < cluster)
            .map(|(_, v)| v.as_slice())
            .collect();
        let v = a.inverse_iteration(lam, i as u64, &near);
        let mut phi = vec![0.0; op.grid.n];
        for j in 0..na {
            phi[j] = v[j] / sqrt_m[j];
        }
        let sign = match phi.iter().find(|x| **x != 0.0) {
            Some(&x0) if phi[0] < 0.0 || (phi[0] == 0.0 && x0 < 0.0) => -1.0,
            _ => 1.0,
        };
        for x in phi.iter_mut() {
            *x *= sign;
        }
        let refined = op.energy(&phi) / op.inner(&phi, &phi);
        vectors.push(v);
        pairs.push((refined, phi));
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));
    let (lambdas, modes) = pairs.into_iter().unzip();
    Ok(SpectralData {
        geom: op.geom.clone(),
        grid: op.grid,
        lambdas,
        modes,
        mass: op.mass.clone(),
        norm_constant: op.geom.norm_constant(),
    })
}

/// Assembles on `n` nodes and solves for `k` modes.
pub fn solve(geom: &RadialGeometry, n: usize, k: usize) -> Result<SpectralData> {
    let grid = Grid::new(geom.radius, n)?;
    let op = assemble(geom, grid)?;
    eigensolve(&op, k)
}

/// First eigenvalue only.
pub fn first_eigenvalue(geom: &RadialGeometry, n: usize) -> Result<f64> {
    Ok(solve(geom, n, 1)?.lambda1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RobinParameter::{Dirichlet, Finite};
    use std::f64::consts::PI;

    fn flat(m: usize, alpha: RobinParameter) -> RadialGeometry {
        RadialGeometry::space_form(m, 0.0, 1.0, alpha).unwrap()
    }

    #[test]
    fn rejects_small_or_coarse_grids() {
        assert!(Grid::new(1.0, 63).is_err());
        // Real dimension 2 needs w < max/100 on eight nodes: r < 0.01.
        let g = flat(2, Finite(1.0));
        assert!(assemble(&g, Grid::new(1.0, 257).unwrap()).is_err());
        assert!(assemble(&g, Grid::new(1.0, 1025).unwrap()).is_ok());
    }

    #[test]
    fn constants_are_the_neumann_null_space() {
        let op = assemble(&flat(3, Finite(0.0)), Grid::new(1.0, 129).unwrap()).unwrap();
        let res = op.apply(&vec![1.0; 129]);
        assert!(res.iter().all(|r| r.abs() < 1e-9));
        assert_eq!(rayleigh(&vec![3.0; 129], &op).unwrap(), 0.0);
    }

    #[test]
    fn symmetrized_matrix_is_symmetric_in_weighted_inner_product() {
        let g = RadialGeometry::kahler(2, 0.5, 1.0, Finite(1.5)).unwrap();
        let op = assemble(&g, Grid::new(1.0, 200).unwrap()).unwrap();
        let u: Vec<f64> = (0..200).map(|j| (j as f64 * 0.1).sin()).collect();
        let v: Vec<f64> = (0..200).map(|j| (j as f64 * 0.037).cos()).collect();
        let lu = op.apply(&u);
        let lv = op.apply(&v);
        let a = op.inner(&lu, &v);
        let b = op.inner(&u, &lv);
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn sinc_residual_is_second_order() {
        // u = sin(kr)/r solves the flat m = 3 equation with λ = k².
        let k = 2.3;
        let res_at = |n: usize| {
            let op = assemble(&flat(3, Finite(1.0)), Grid::new(1.0, n).unwrap()).unwrap();
            let u: Vec<f64> = op
                .grid
                .nodes()
                .iter()
                .map(|&r| if r == 0.0 { k } else { (k * r).sin() / r })
                .collect();
            let lu = op.apply(&u);
            (1..n - 1).map(|j| (lu[j] - k * k * u[j]).abs()).fold(0.0, f64::max)
        };
        let (a, b) = (res_at(129), res_at(257));
        assert!(a < 1e-3 && a / b > 3.5, "{a} {b}");
    }

    #[test]
    fn dirichlet_removes_last_node() {
        let op = assemble(&flat(3, Dirichlet), Grid::new(1.0, 257).unwrap()).unwrap();
        assert_eq!(op.active(), 256);
        let u: Vec<f64> =
            op.grid.nodes().iter().map(|&r| if r == 0.0 { PI } else { (PI * r).sin() / r }).collect();
        let lu = op.apply(&u);
        let res = (1..256).map(|j| (lu[j] - PI * PI * u[j]).abs()).fold(0.0, f64::max);
        assert!(res < 1e-3, "{res}");
    }

    #[test]
    fn flat_robin_eigenvalue_and_rayleigh() {
        let spectrum = solve(&flat(3, Finite(1.0)), 1025, 20).unwrap();
        let exact = PI * PI / 4.0;
        assert!((spectrum.lambda1() - exact).abs() < 1e-5);
        assert!(spectrum.orthonormality_defect() < 1e-8);
        assert!(spectrum.modes[0][..1024].iter().all(|&x| x > 0.0));
        assert!(spectrum.lambdas.windows(2).all(|w| w[1] > w[0]));
        let op = assemble(&spectrum.geom, spectrum.grid).unwrap();
        let rq = rayleigh(&spectrum.modes[0], &op).unwrap();
        assert!((rq - spectrum.lambda1()).abs() < 1e-10 * spectrum.lambda1());
        assert!((rq - exact).abs() < 1e-5);
    }

    #[test]
    fn neumann_first_eigenvalue_vanishes() {
        let spectrum = solve(&flat(3, Finite(0.0)), 1025, 5).unwrap();
        assert!(spectrum.lambda1().abs() < 1e-8, "{}", spectrum.lambda1());
        let phi = &spectrum.modes[0];
        let spread = phi.iter().fold(0.0f64, |m, x| m.max((x - phi[0]).abs()));
        assert!(spread < 1e-8);
    }

    #[test]
    fn mode_count_bounds() {
        let op = assemble(&flat(3, Finite(1.0)), Grid::new(1.0, 129).unwrap()).unwrap();
        assert!(eigensolve(&op, 0).is_err());
        assert!(eigensolve(&op, 128).is_err());
        assert!(eigensolve(&op, 127).is_ok());
    }
}
