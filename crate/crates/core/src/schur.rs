//! Nyström discretization of the Schur complement `S(z) = Δ(z) − α²K(z)` of
//! `Ĥ^(σ)_α − z` on the one-photon sector, with eigenvalue counting below
//! the sector's essential spectrum.
//!
//! All matrices live on the radial nodes of a [`QuadratureRule`] in the
//! orthonormal basis `√W_i δ(r − r_i)`, so integral kernels `k(r, s)` become
//! `√W_i k(r_i, r_j) √W_j`. With `μ_i = √W_i λ(r_i)`, `x_i = ω(r_i) − m` and
//! `c = 2m + σε − z`:
//!
//! ```text
//! Δ_i   = Φ^(σ)_α(z − ω(r_i))
//! K_ij  = μ_i μ_j / (x_i + x_j + c)
//! ```

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inertia, max_abs, slice_eigenvalues};
use crate::model::{check_alpha, Model};
use crate::nevanlinna::{find_zero, phi_at_gap, sector_bottom, Sigma};
use crate::oracle;
use crate::quad::QuadratureRule;

/// Relative zero threshold for inertia counts.
pub const COUNT_ZERO_REL: f64 = 1e-12;

/// Nodes with `ω(r) − m` at or below this are on the level set `ω = m`.
pub const LEVEL_SET_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    OnePhotonRadial,
    TwoPhotonSymmetric,
}

/// A symmetric matrix over (a subset of) the nodes of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    pub matrix: DMatrix<f64>,
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
    pub sector: Sector,
    pub z: f64,
    pub sigma: Sigma,
}

impl DiscretizedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// Node data shared by the assemblers.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    pub x: Vec<f64>,
    pub omega: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Grid {
    pub fn new(model: &Model, rule: &QuadratureRule) -> Self {
        let r = rule.nodes().to_vec();
        let w = rule.weights().to_vec();
        let x = r.iter().map(|&ri| model.excess(ri)).collect();
        let omega = r.iter().map(|&ri| model.omega(ri)).collect();
        let mu = r.iter().zip(&w).map(|(&ri, &wi)| wi.sqrt() * model.lambda(ri)).collect();
        Grid { r, w, x, omega, mu }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    fn operator(&self, matrix: DMatrix<f64>, z: f64, sigma: Sigma) -> DiscretizedOperator {
        DiscretizedOperator {
            matrix,
            radii: self.r.clone(),
            weights: self.w.clone(),
            sector: Sector::OnePhotonRadial,
            z,
            sigma,
        }
    }
}

/// `c = 2m + σε − z`, required positive.
fn kernel_gap(model: &Model, sigma: Sigma, z: f64, what: &'static str) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::InvalidArgument(format!("z must be finite, got {z}")));
    }
    let limit = 2.0 * model.m() + sigma.sign() * model.epsilon();
    let c = limit - z;
    if c <= 0.0 {
        return Err(Error::Domain { what, z, limit });
    }
    Ok(c)
}

fn check_alpha_nonneg(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")))
    }
}

/// `Ψ₂(a, b; c) = 1/(a+b+c) − 1/(a+c) − 1/(b+c) + 1/c`, in the
/// cancellation-free form `ab(a+b+2c) / (c(a+c)(b+c)(a+b+c))`.
pub fn psi2(a: f64, b: f64, c: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    a * b * (a + b + 2.0 * c) / (c * (a + c) * (b + c) * (a + b + c))
}

/// `Ψ₁(a, b; c) = 1/(a+c) + 1/(b+c) − 1/c`.
pub fn psi1(a: f64, b: f64, c: f64) -> f64 {
    1.0 / (a + c) + 1.0 / (b + c) - 1.0 / c
}

fn delta_entries(model: &Model, grid: &Grid, sigma: Sigma, alpha: f64, c: f64) -> Result<Vec<f64>> {
    grid.x.iter().map(|&xi| phi_at_gap(model, sigma, alpha, c + xi)).collect()
}

/// Diagonal `Δ(r_i; z) = Φ^(σ)_α(z − ω(r_i))`.
pub fn delta_diag(model: &Model, sigma: Sigma, alpha: f64, z: f64, rule: &QuadratureRule) -> Result<DiscretizedOperator> {
    check_alpha_nonneg(alpha)?;
    let c = kernel_gap(model, sigma, z, "delta_diag")?;
    let grid = Grid::new(model, rule);
    let d = delta_entries(model, &grid, sigma, alpha, c)?;
    Ok(grid.operator(DMatrix::from_diagonal(&d.into()), z, sigma))
}

fn kernel_matrix(grid: &Grid, psi: impl Fn(f64, f64) -> f64) -> DMatrix<f64> {
    let n = grid.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = grid.mu[i] * grid.mu[j] * psi(grid.x[i], grid.x[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// The integral operator `K(z)` with kernel `λ(r)λ(s)/(ω(r) + ω(s) + σε − z)`.
pub fn kernel_k(model: &Model, sigma: Sigma, z: f64, rule: &QuadratureRule) -> Result<DiscretizedOperator> {
    let c = kernel_gap(model, sigma, z, "kernel_K")?;
    let grid = Grid::new(model, rule);
    let k = kernel_matrix(&grid, |a, b| 1.0 / (a + b + c));
    Ok(grid.operator(k, z, sigma))
}

/// `K = K₁ + K₂` with `K₁` of rank at most two and `K₂ ≥ 0` entrywise.
pub fn split_k(
    model: &Model,
    sigma: Sigma,
    z: f64,
    rule: &QuadratureRule,
) -> Result<(DiscretizedOperator, DiscretizedOperator)> {
    let c = kernel_gap(model, sigma, z, "split_K")?;
    let grid = Grid::new(model, rule);
    let k1 = kernel_matrix(&grid, |a, b| psi1(a, b, c));
    let k2 = kernel_matrix(&grid, |a, b| psi2(a, b, c));
    Ok((grid.operator(k1, z, sigma), grid.operator(k2, z, sigma)))
}

/// Which kernel enters the Birman–Schwinger operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelChoice {
    FullK,
    K2Only,
}

/// `T = Δ^{-1/2} K_sel Δ^{-1/2}`.
///
/// With [`KernelChoice::FullK`] every `Δ_i` must be positive. With
/// [`KernelChoice::K2Only`] the point `z` may reach `z₀ = m + E_σε(α)`; nodes
/// on the level set `ω = m` are dropped, and `Δ` is evaluated in the
/// factored form
///
/// ```text
/// Δ(r; z) = (z₀ − z + ω(r) − m) · (1 + α² ∫ |λ|² / ((ω − m + δ_r)(ω − m + δ₀)))
/// ```
///
/// where `δ₀` is the gap of the sector root and `δ_r = δ₀ + z₀ − z + ω(r) − m`,
/// which stays accurate as `z ↑ z₀`.
pub fn birman_schwinger_t(
    model: &Model,
    sigma: Sigma,
    alpha: f64,
    z: f64,
    rule: &QuadratureRule,
    which: KernelChoice,
) -> Result<DiscretizedOperator> {
    check_alpha(alpha)?;
    match which {
        KernelChoice::FullK => {
            let c = kernel_gap(model, sigma, z, "birman_schwinger_T")?;
            let grid = Grid::new(model, rule);
            let d = delta_entries(model, &grid, sigma, alpha, c)?;
            if let Some((node, &value)) = d.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                return Err(Error::NonPositiveDelta { node, value });
            }
            let s: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
            let mut t = kernel_matrix(&grid, |a, b| 1.0 / (a + b + c));
            for i in 0..grid.len() {
                for j in 0..grid.len() {
                    t[(i, j)] *= s[i] * s[j];
                }
            }
            Ok(grid.operator(t, z, sigma))
        }
        KernelChoice::K2Only => {
            let root = find_zero(model, sigma, alpha)?
                .ok_or(Error::NotApplicable("the sector has no root of Φ, so there is no boundary point z₀"))?;
            if root.gap == 0.0 {
                return Err(Error::NotApplicable("the root of Φ is closer to the threshold than 1e-300"));
            }
            let z0 = model.m() + root.z;
            if !(z <= z0) {
                return Err(Error::Domain { what: "birman_schwinger_T", z, limit: z0 });
            }
            t_k2_at_offset(model, sigma, alpha, z0 - z, root.gap, rule, z)
        }
    }
}

/// K₂-only operator at `z = z₀ − s`, `s ≥ 0`, given the root gap `δ₀`.
fn t_k2_at_offset(
    model: &Model,
    sigma: Sigma,
    alpha: f64,
    s: f64,
    gap0: f64,
    rule: &QuadratureRule,
    z: f64,
) -> Result<DiscretizedOperator> {
    let full = Grid::new(model, rule);
    let keep: Vec<usize> = (0..full.len()).filter(|&i| full.x[i] > LEVEL_SET_TOL).collect();
    let grid = Grid {
        r: keep.iter().map(|&i| full.r[i]).collect(),
        w: keep.iter().map(|&i| full.w[i]).collect(),
        x: keep.iter().map(|&i| full.x[i]).collect(),
        omega: keep.iter().map(|&i| full.omega[i]).collect(),
        mu: keep.iter().map(|&i| full.mu[i]).collect(),
    };
    let c = gap0 + s;
    let a2 = alpha * alpha;
    let mut d = Vec::with_capacity(grid.len());
    for &xk in &grid.x {
        let dk = c + xk;
        let j = model.weighted_l2_norm_sq(|r| {
            let x = model.excess(r);
            1.0 / ((x + dk) * (x + gap0))
        })?;
        d.push((s + xk) * (1.0 + a2 * j));
    }
    let inv: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    let mut t = kernel_matrix(&grid, |a, b| psi2(a, b, c));
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            t[(i, j)] *= inv[i] * inv[j];
        }
    }
    Ok(grid.operator(t, z, sigma))
}

/// `D − α²K` on the rule's nodes.
pub fn schur_matrix(model: &Model, sigma: Sigma, alpha: f64, z: f64, rule: &QuadratureRule) -> Result<DMatrix<f64>> {
    check_alpha_nonneg(alpha)?;
    let c = kernel_gap(model, sigma, z, "schur_matrix")?;
    let grid = Grid::new(model, rule);
    schur_on_grid(model, &grid, sigma, alpha, c)
}

fn schur_on_grid(model: &Model, grid: &Grid, sigma: Sigma, alpha: f64, c: f64) -> Result<DMatrix<f64>> {
    let d = delta_entries(model, grid, sigma, alpha, c)?;
    let a2 = alpha * alpha;
    let mut m = kernel_matrix(grid, |a, b| -a2 / (a + b + c));
    for (i, di) in d.iter().enumerate() {
        m[(i, i)] += di;
    }
    Ok(m)
}

fn count_matrix(m: &DMatrix<f64>) -> usize {
    inertia(m, COUNT_ZERO_REL * max_abs(m)).negative
}

/// Number of eigenvalues of `Ĥ^(σ)_α` below `z`, counted as the negative
/// inertia of `Δ(z) − α²K(z)` on the rule's nodes. Requires `z` below the
/// sector's essential spectrum.
pub fn count_below(model: &Model, sigma: Sigma, alpha: f64, z: f64, rule: &QuadratureRule) -> Result<usize> {
    let bottom = sector_bottom(model, sigma, alpha)?;
    if !(z < bottom) {
        return Err(Error::Domain { what: "count_below", z, limit: bottom });
    }
    Counter::new(model, sigma, alpha, rule).count(z)
}

/// Repeated counts on one grid.
struct Counter<'a> {
    model: &'a Model,
    grid: Grid,
    sigma: Sigma,
    alpha: f64,
}

impl<'a> Counter<'a> {
    fn new(model: &'a Model, sigma: Sigma, alpha: f64, rule: &QuadratureRule) -> Self {
        Counter { model, grid: Grid::new(model, rule), sigma, alpha }
    }

    fn count(&self, z: f64) -> Result<usize> {
        let c = kernel_gap(self.model, self.sigma, z, "count_below")?;
        let m = schur_on_grid(self.model, &self.grid, self.sigma, self.alpha, c)?;
        Ok(count_matrix(&m))
    }
}

/// Absolute tolerance for eigenvalue locations.
pub const EIGENVALUE_TOL: f64 = 1e-10;

/// Eigenvalues of `Ĥ^(σ)_α` below `bottom − gap`, with multiplicity, located
/// as the jumps of the counting function.
pub fn discrete_eigenvalues(
    model: &Model,
    sigma: Sigma,
    alpha: f64,
    rule: &QuadratureRule,
    gap: f64,
) -> Result<Vec<f64>> {
    if !(gap.is_finite() && gap > 0.0) {
        return Err(Error::InvalidArgument(format!("gap must be positive, got {gap}")));
    }
    let bottom = sector_bottom(model, sigma, alpha)?;
    let top = bottom - gap;
    let counter = Counter::new(model, sigma, alpha, rule);
    let n_top = counter.count(top)?;
    if n_top == 0 {
        return Ok(Vec::new());
    }
    let mut step = 1.0;
    let mut lo = top - step;
    while counter.count(lo)? > 0 {
        step *= 2.0;
        lo = top - step;
        if step > 1e12 {
            return Err(Error::BracketFailure("no lower bound for the discrete spectrum".into()));
        }
    }
    let mut out = Vec::with_capacity(n_top);
    let mut f = |z: f64| counter.count(z);
    slice_eigenvalues(&mut f, lo, top, 0, n_top, usize::MAX, EIGENVALUE_TOL, &mut out)?;
    Ok(out)
}

/// Both sides of `N(z; H) ≤ N(z; Ĥ⁺) + N(z; Ĥ⁻) + 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullCountCheck {
    pub full_plus: usize,
    pub full_minus: usize,
    pub hat_plus: usize,
    pub hat_minus: usize,
    pub holds: bool,
}

impl FullCountCheck {
    pub fn full(&self) -> usize {
        self.full_plus + self.full_minus
    }

    pub fn hat(&self) -> usize {
        self.hat_plus + self.hat_minus
    }
}

/// Compares the truncated full Hamiltonian's count below `z` with the
/// Schur counts of both sectors.
pub fn full_count_bound_check(model: &Model, alpha: f64, z: f64, rule: &QuadratureRule) -> Result<FullCountCheck> {
    let ess = crate::nevanlinna::essential_spectrum(model, alpha)?;
    if !(z < ess.bottom) {
        return Err(Error::Domain { what: "full_count_bound_check", z, limit: ess.bottom });
    }
    let full_plus = oracle::truncate_full(model, Sigma::Plus, alpha, rule)?.count_below(z)?;
    let full_minus = oracle::truncate_full(model, Sigma::Minus, alpha, rule)?.count_below(z)?;
    let hat_plus = count_below(model, Sigma::Plus, alpha, z, rule)?;
    let hat_minus = count_below(model, Sigma::Minus, alpha, z, rule)?;
    let holds = full_plus + full_minus <= hat_plus + hat_minus + 4;
    Ok(FullCountCheck { full_plus, full_minus, hat_plus, hat_minus, holds })
}
