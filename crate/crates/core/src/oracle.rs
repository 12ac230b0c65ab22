//! Finite truncations of the operator matrices on radial grids, used as an
//! independent check of the Schur-complement computations.
//!
//! The truncated space is spanned by an orthonormal basis of one-photon node
//! functions `i` and symmetric two-photon node pairs `(j, k)`, `j ≤ k`, plus
//! the vacuum for the full Hamiltonian. The pair basis carries the weights
//! `W_j W_k` for `j < k` and `½ W_j²` on the diagonal, matching the `½` in the
//! symmetric two-photon inner product. With `μ_i = √W_i λ(r_i)`:
//!
//! ```text
//! H₁₁[i, i]          = ω_i − σε
//! H₂₂[(j,k), (j,k)]  = ω_j + ω_k + σε
//! H₂₁[(j,k), k]      = μ_j,   H₂₁[(j,k), j] = μ_k   (j < k)
//! H₂₁[(j,j), j]      = √2 μ_j
//! H₀₁[0, i]          = μ_i
//! ```
//!
//! Eigenvalues are counted by block elimination of the diagonal two-photon
//! block (Haynsworth inertia additivity), which keeps the work at `O(n³)` for
//! a matrix of dimension `O(n²)`. Dense eigensolves are available for small
//! grids.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inertia_lower, slice_eigenvalues, symmetric_eigenvalues};
use crate::model::{check_alpha, CaseTag, CouplingClass, Model};
use crate::nevanlinna::{bottom_energy, find_zero, phi_boundary_limit, SectorRoot, Sigma};
use crate::quad::QuadratureRule;

/// Largest dimension accepted by [`TruncatedHamiltonian::to_dense`].
pub const MAX_DENSE_DIM: usize = 4000;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedHamiltonian {
    sigma: Sigma,
    alpha: f64,
    epsilon: f64,
    vacuum: bool,
    radii: Vec<f64>,
    weights: Vec<f64>,
    omega: Vec<f64>,
    mu: Vec<f64>,
}

fn truncate(model: &Model, sigma: Sigma, alpha: f64, rule: &QuadratureRule, vacuum: bool) -> Result<TruncatedHamiltonian> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    let radii = rule.nodes().to_vec();
    let weights = rule.weights().to_vec();
    let omega = radii.iter().map(|&r| model.omega(r)).collect();
    let mu = radii.iter().zip(&weights).map(|(&r, &w)| w.sqrt() * model.lambda(r)).collect();
    Ok(TruncatedHamiltonian { sigma, alpha, epsilon: model.epsilon(), vacuum, radii, weights, omega, mu })
}

/// Truncation of `Ĥ^(σ)_α` (one- and two-photon sectors).
pub fn truncate_hhat(model: &Model, sigma: Sigma, alpha: f64, rule: &QuadratureRule) -> Result<TruncatedHamiltonian> {
    truncate(model, sigma, alpha, rule, false)
}

/// Truncation of `H^(σ)_α` (vacuum, one- and two-photon sectors).
pub fn truncate_full(model: &Model, sigma: Sigma, alpha: f64, rule: &QuadratureRule) -> Result<TruncatedHamiltonian> {
    truncate(model, sigma, alpha, rule, true)
}

impl TruncatedHamiltonian {
    pub fn sigma(&self) -> Sigma {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn has_vacuum(&self) -> bool {
        self.vacuum
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of one-photon nodes.
    pub fn nodes(&self) -> usize {
        self.radii.len()
    }

    pub fn pairs(&self) -> usize {
        let n = self.nodes();
        n * (n + 1) / 2
    }

    pub fn dim(&self) -> usize {
        self.vacuum as usize + self.nodes() + self.pairs()
    }

    fn se(&self) -> f64 {
        self.sigma.sign() * self.epsilon
    }

    pub fn vacuum_energy(&self) -> f64 {
        self.se()
    }

    pub fn one_photon_energy(&self, i: usize) -> f64 {
        self.omega[i] - self.se()
    }

    pub fn pair_energy(&self, j: usize, k: usize) -> f64 {
        self.omega[j] + self.omega[k] + self.se()
    }

    /// Position of pair `(j, k)`, `j ≤ k`, in the row-major pair ordering.
    pub fn pair_index(&self, j: usize, k: usize) -> usize {
        let (j, k) = if j <= k { (j, k) } else { (k, j) };
        let n = self.nodes();
        j * n + k - j * (j + 1) / 2
    }

    fn pair_list(&self) -> Vec<(usize, usize)> {
        let n = self.nodes();
        let mut out = Vec::with_capacity(self.pairs());
        for j in 0..n {
            for k in j..n {
                out.push((j, k));
            }
        }
        out
    }

    /// `H₁₂` as an `n × pairs` matrix, from `(H₁₂f)(k) = ∫ f(k, q) λ(q) dq`.
    pub fn h12_dense(&self) -> DMatrix<f64> {
        let n = self.nodes();
        let mut h = DMatrix::zeros(n, self.pairs());
        for i in 0..n {
            for q in 0..n {
                let p = self.pair_index(i, q);
                h[(i, p)] = if q == i { SQRT_2 * self.mu[i] } else { self.mu[q] };
            }
        }
        h
    }

    /// `H₂₁` as a `pairs × n` matrix, from `(H₂₁f)(k₁, k₂) = λ(k₁)f(k₂) + λ(k₂)f(k₁)`.
    pub fn h21_dense(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.pairs(), self.nodes());
        for (p, (j, k)) in self.pair_list().into_iter().enumerate() {
            if j == k {
                h[(p, j)] = SQRT_2 * self.mu[j];
            } else {
                h[(p, k)] += self.mu[j];
                h[(p, j)] += self.mu[k];
            }
        }
        h
    }

    /// `max |H₂₁ − H₁₂ᵀ|`.
    pub fn adjointness_residual(&self) -> f64 {
        crate::linalg::max_abs_diff(&self.h21_dense(), &self.h12_dense().transpose())
    }

    /// The full symmetric matrix, ordered vacuum, one-photon, pairs.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        if dim > MAX_DENSE_DIM {
            return Err(Error::TooLarge(dim));
        }
        let n = self.nodes();
        let o = self.vacuum as usize;
        let mut h = DMatrix::zeros(dim, dim);
        if self.vacuum {
            h[(0, 0)] = self.vacuum_energy();
            for i in 0..n {
                h[(0, o + i)] = self.alpha * self.mu[i];
                h[(o + i, 0)] = self.alpha * self.mu[i];
            }
        }
        for i in 0..n {
            h[(o + i, o + i)] = self.one_photon_energy(i);
        }
        let h21 = self.h21_dense();
        let h12 = self.h12_dense();
        let base = o + n;
        for (p, (j, k)) in self.pair_list().into_iter().enumerate() {
            h[(base + p, base + p)] = self.pair_energy(j, k);
            for i in 0..n {
                h[(base + p, o + i)] = self.alpha * h21[(p, i)];
                h[(o + i, base + p)] = self.alpha * h12[(i, p)];
            }
        }
        Ok(h)
    }

    /// Lower bound of the spectrum from Gershgorin discs.
    pub fn gershgorin_lower(&self) -> f64 {
        let n = self.nodes();
        let a = self.alpha;
        let abs_mu: Vec<f64> = self.mu.iter().map(|m| m.abs()).collect();
        let total: f64 = abs_mu.iter().sum();
        let mut low = f64::INFINITY;
        if self.vacuum {
            low = low.min(self.vacuum_energy() - a * total);
        }
        for i in 0..n {
            let mut radius = a * (total - abs_mu[i] + SQRT_2 * abs_mu[i]);
            if self.vacuum {
                radius += a * abs_mu[i];
            }
            low = low.min(self.one_photon_energy(i) - radius);
        }
        for j in 0..n {
            low = low.min(self.pair_energy(j, j) - a * SQRT_2 * abs_mu[j]);
            for k in j + 1..n {
                low = low.min(self.pair_energy(j, k) - a * (abs_mu[j] + abs_mu[k]));
            }
        }
        low
    }

    /// Number of eigenvalues strictly below `z`.
    ///
    /// Eliminating the diagonal two-photon block `D`:
    /// `N(z) = #{p : D_p < z} + neg(A − z − α² Bᵀ (D − z)⁻¹ B)`, where `A` is
    /// the vacuum plus one-photon block and `B = H₂₁`.
    pub fn count_below(&self, z: f64) -> Result<usize> {
        if !z.is_finite() {
            return Err(Error::InvalidArgument(format!("z must be finite, got {z}")));
        }
        let n = self.nodes();
        // the elimination needs D − z invertible
        let mut z = z;
        while (0..n).any(|j| (j..n).any(|k| self.pair_energy(j, k) == z)) {
            z -= f64::EPSILON * z.abs().max(f64::MIN_POSITIVE);
        }
        let o = self.vacuum as usize;
        let dim = o + n;
        let a2 = self.alpha * self.alpha;
        let mut s = vec![0.0; dim * dim];
        let mut below = 0usize;
        for j in 0..n {
            let dj = self.pair_energy(j, j) - z;
            if dj < 0.0 {
                below += 1;
            }
            s[(o + j) * dim + o + j] += self.one_photon_energy(j) - z - 2.0 * a2 * self.mu[j] * self.mu[j] / dj;
            for k in j + 1..n {
                let d = self.pair_energy(j, k) - z;
                if d < 0.0 {
                    below += 1;
                }
                let g = a2 / d;
                s[(o + j) * dim + o + j] -= g * self.mu[k] * self.mu[k];
                s[(o + k) * dim + o + k] -= g * self.mu[j] * self.mu[j];
                s[(o + k) * dim + o + j] -= g * self.mu[j] * self.mu[k];
            }
        }
        if self.vacuum {
            s[0] = self.vacuum_energy() - z;
            for i in 0..n {
                s[(o + i) * dim] = self.alpha * self.mu[i];
            }
        }
        Ok(below + inertia_lower(&mut s, dim, 0.0).negative)
    }

    /// Eigenvalues below `z` with multiplicity, by spectrum slicing.
    pub fn eigenvalues_below(&self, z: f64, tol: f64) -> Result<Vec<f64>> {
        let n_top = self.count_below(z)?;
        let mut out = Vec::with_capacity(n_top);
        let lo = self.gershgorin_lower() - 1.0;
        if lo >= z {
            return Ok(out);
        }
        let mut f = |x: f64| self.count_below(x);
        slice_eigenvalues(&mut f, lo, z, 0, n_top, usize::MAX, tol, &mut out)?;
        Ok(out)
    }

    /// The `k` lowest eigenvalues with multiplicity.
    pub fn lowest_eigenvalues(&self, k: usize, tol: f64) -> Result<Vec<f64>> {
        let k = k.min(self.dim());
        let lo = self.gershgorin_lower() - 1.0;
        let mut step = 1.0;
        let mut hi = lo + step;
        let mut n_hi = self.count_below(hi)?;
        while n_hi < k {
            step *= 2.0;
            hi = lo + step;
            n_hi = self.count_below(hi)?;
        }
        let mut out = Vec::with_capacity(k);
        let mut f = |x: f64| self.count_below(x);
        slice_eigenvalues(&mut f, lo, hi, 0, n_hi, k, tol, &mut out)?;
        Ok(out)
    }
}

/// All eigenvalues below `z` of a symmetric matrix, ascending.
pub fn eigs_below(matrix: &DMatrix<f64>, z: f64) -> Vec<f64> {
    symmetric_eigenvalues(matrix).into_iter().filter(|&v| v < z).collect()
}

/// Result of [`ess_bottom_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssBottomEstimate {
    /// Extrapolated edge.
    pub estimate: f64,
    /// Cluster edge on each rule.
    pub edges: Vec<f64>,
    /// Node counts of the rules.
    pub nodes: Vec<usize>,
}

/// Number of low eigenvalues inspected per rule.
pub const CLUSTER_WINDOW: usize = 24;

const CLUSTER_SHRINK: f64 = 2.0;

fn spacings(ev: &[f64]) -> Vec<f64> {
    (0..ev.len())
        .map(|i| {
            let left = if i > 0 { ev[i] - ev[i - 1] } else { f64::INFINITY };
            let right = if i + 1 < ev.len() { ev[i + 1] - ev[i] } else { f64::INFINITY };
            left.min(right)
        })
        .collect()
}

fn nearest(ev: &[f64], x: f64) -> usize {
    let i = ev.partition_point(|&v| v < x);
    if i == 0 {
        0
    } else if i == ev.len() || x - ev[i - 1] <= ev[i] - x {
        i - 1
    } else {
        i
    }
}

/// Locates the accumulation edge of the truncated spectra of `Ĥ^(σ)_α` on a
/// sequence of refining rules: the lowest eigenvalue whose nearest-neighbour
/// spacing shrinks at least twofold between adjacent rules (or is
/// degenerate). The edges are extrapolated with Aitken's Δ² when the last
/// three behave geometrically; otherwise the finest edge is returned.
pub fn ess_bottom_estimate(
    model: &Model,
    sigma: Sigma,
    alpha: f64,
    rules: &[QuadratureRule],
) -> Result<EssBottomEstimate> {
    check_alpha(alpha)?;
    if rules.len() < 2 {
        return Err(Error::NoCluster("at least two rules are needed".into()));
    }
    let mut levels = Vec::with_capacity(rules.len());
    for rule in rules {
        let h = truncate_hhat(model, sigma, alpha, rule)?;
        levels.push(h.lowest_eigenvalues(CLUSTER_WINDOW, 1e-13)?);
    }
    let spacing: Vec<Vec<f64>> = levels.iter().map(|ev| spacings(ev)).collect();

    let mut edges = Vec::with_capacity(levels.len());
    for (l, ev) in levels.iter().enumerate() {
        let other = if l == 0 { 1 } else { l - 1 };
        let in_cluster: Vec<bool> = ev
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let own = spacing[l][i];
                if own <= 1e-10 * (1.0 + e.abs()) {
                    return true;
                }
                let j = nearest(&levels[other], e);
                let theirs = spacing[other][j];
                if l == 0 {
                    theirs * CLUSTER_SHRINK <= own
                } else {
                    own * CLUSTER_SHRINK <= theirs
                }
            })
            .collect();
        let edge = (0..ev.len().saturating_sub(1)).find(|&i| in_cluster[i] && in_cluster[i + 1]);
        match edge {
            Some(i) => edges.push(ev[i]),
            None => {
                return Err(Error::NoCluster(format!(
                    "no clustering among the lowest {} eigenvalues on rule {l}",
                    ev.len()
                )))
            }
        }
    }

    let k = edges.len();
    let last = edges[k - 1];
    let mut estimate = last;
    if k >= 3 {
        let d1 = edges[k - 2] - edges[k - 3];
        let d2 = last - edges[k - 2];
        if d2.abs() > 1e-14 * (1.0 + last.abs()) && d1 != 0.0 {
            let ratio = d2 / d1;
            if ratio > 0.0 && ratio < 1.0 {
                estimate = last + d2 * ratio / (1.0 - ratio);
            }
        }
    }
    Ok(EssBottomEstimate { estimate, edges, nodes: rules.iter().map(|r| r.len()).collect() })
}

/// An eigenvalue of the one-boson Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneBosonLevel {
    pub value: f64,
    /// Block `T^(σ)` carrying the eigenvalue; its zero is that of `Φ^(−σ)`.
    pub block: Sigma,
    pub root: SectorRoot,
}

/// Comparison of one block of the truncated one-boson Hamiltonian with the
/// analytic prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneBosonBlock {
    pub block: Sigma,
    /// Analytic eigenvalue below the block's essential spectrum.
    pub expected: Option<f64>,
    /// Isolated eigenvalue of the truncated block, clearly below its
    /// smallest diagonal one-photon entry.
    pub truncated: Option<f64>,
    /// Whether the grid resolves the expected eigenvalue (or its absence).
    pub resolvable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneBosonReport {
    /// `m − ε`, the bottom of the essential spectrum.
    pub ess_bottom: f64,
    /// Discrete eigenvalues, ascending.
    pub eigenvalues: Vec<OneBosonLevel>,
    pub ground_state: f64,
    /// Lowest eigenvalue of the truncated blocks.
    pub truncated_ground_state: f64,
    pub blocks: Vec<OneBosonBlock>,
    pub class: CouplingClass,
}

/// Default rule of [`oneboson_spectrum`].
pub fn oneboson_default_rule(model: &Model) -> QuadratureRule {
    model.rule(24, 16)
}

pub fn oneboson_spectrum(model: &Model, alpha: f64) -> Result<OneBosonReport> {
    oneboson_spectrum_with_rule(model, alpha, &oneboson_default_rule(model))
}

/// Grid resolution needed to call an eigenvalue resolvable, as a multiple
/// of the smallest node excess `ω(r_i) − m`.
const RESOLUTION_FACTOR: f64 = 1e3;

/// Smallest separation from the truncated continuum edge of an isolated
/// eigenvalue.
const ISOLATION_MARGIN: f64 = 1e-9;

/// Spectrum of the one-boson Hamiltonian `T_α = T⁽⁺⁾ ⊕ T⁽⁻⁾` with
/// `T^(σ) = [[σε, αH₀₁], [αH₁₀, ω − σε]]`: essential spectrum `[m − ε, ∞)`,
/// and an eigenvalue of `T^(σ)` wherever `Φ^(−σ)` vanishes.
pub fn oneboson_spectrum_with_rule(model: &Model, alpha: f64, rule: &QuadratureRule) -> Result<OneBosonReport> {
    check_alpha(alpha)?;
    let energy = bottom_energy(model, alpha)?;
    let eps = model.epsilon();
    let grid = crate::schur::Grid::new(model, rule);
    let min_x = grid.x.iter().copied().fold(f64::INFINITY, f64::min);

    let mut eigenvalues = Vec::new();
    let mut blocks = Vec::new();
    let mut truncated_ground = f64::INFINITY;
    for block in Sigma::BOTH {
        let se = block.sign() * eps;
        let n = grid.len();
        let mut t = DMatrix::zeros(n + 1, n + 1);
        t[(0, 0)] = se;
        for i in 0..n {
            t[(0, i + 1)] = alpha * grid.mu[i];
            t[(i + 1, 0)] = alpha * grid.mu[i];
            t[(i + 1, i + 1)] = grid.omega[i] - se;
        }
        let ev = symmetric_eigenvalues(&t);
        truncated_ground = truncated_ground.min(ev[0]);
        // a bordered diagonal matrix always has an eigenvalue below its
        // smallest diagonal entry; it counts as isolated only when it is
        // clearly separated from it
        let cont = grid.omega.iter().copied().fold(f64::INFINITY, f64::min) - se;
        let margin = (RESOLUTION_FACTOR * min_x).max(ISOLATION_MARGIN);
        let truncated = ev.iter().copied().find(|&v| v < cont - margin);

        let root = find_zero(model, block.flip(), alpha)?;
        let resolvable = match root {
            Some(r) => r.gap > 2.0 * margin + min_x,
            None => phi_boundary_limit(model, block.flip(), alpha)? > 1e-6,
        };
        if let Some(r) = root {
            eigenvalues.push(OneBosonLevel { value: r.z, block, root: r });
        }
        blocks.push(OneBosonBlock { block, expected: root.map(|r| r.z), truncated, resolvable });
    }
    eigenvalues.sort_by(|a, b| a.value.total_cmp(&b.value));
    let ground_state = eigenvalues[0].value;
    debug_assert_eq!(ground_state, energy.energy);
    Ok(OneBosonReport {
        ess_bottom: model.m() - eps,
        eigenvalues,
        ground_state,
        truncated_ground_state: truncated_ground,
        blocks,
        class: energy.class,
    })
}

/// Expected number of one-boson eigenvalues per regime.
pub fn oneboson_expected_count(tag: CaseTag) -> usize {
    match tag {
        CaseTag::Case1 | CaseTag::Case2a => 2,
        CaseTag::Case2b => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub upper: f64,
    pub ok: bool,
}

/// Relative slack of the inequality check, in units of `1/c`.
pub const INEQUALITY_SLACK: f64 = 1e-12;

/// `0 ≤ 1/(a+b+c) − 1/(a+c) − 1/(b+c) + 1/c ≤ √(ab)/(2c²)` for `a, b ≥ 0`,
/// `c > 0`, with the left side evaluated term by term.
pub fn elementary_inequality(a: f64, b: f64, c: f64) -> Result<InequalityCheck> {
    if !(a >= 0.0 && b >= 0.0 && c > 0.0) || !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("need a, b ≥ 0 and c > 0, got ({a}, {b}, {c})")));
    }
    let lhs = 1.0 / (a + b + c) - 1.0 / (a + c) - 1.0 / (b + c) + 1.0 / c;
    let upper = (a * b).sqrt() / (2.0 * c * c);
    let slack = INEQUALITY_SLACK / c;
    let ok = lhs >= -slack && lhs <= upper + slack;
    Ok(InequalityCheck { lhs, upper, ok })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub count: usize,
    pub violations: usize,
    /// Largest `(lhs − upper)·c`, i.e. the excess in units of `1/c`.
    pub worst_excess: f64,
    pub first_violation: Option<[f64; 3]>,
}

/// Checks the inequality on `count` triples drawn log-uniformly from
/// `[10⁻⁶, 10⁶]³`.
pub fn fuzz_inequality(count: usize, seed: u64) -> Result<FuzzReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (1e-6f64.ln(), 1e6f64.ln());
    let mut report = FuzzReport { seed, count, violations: 0, worst_excess: f64::NEG_INFINITY, first_violation: None };
    for _ in 0..count {
        let mut draw = || rng.random_range(lo..hi).exp();
        let (a, b, c) = (draw(), draw(), draw());
        let check = elementary_inequality(a, b, c)?;
        let excess = ((check.lhs - check.upper).max(-check.lhs)) * c;
        report.worst_excess = report.worst_excess.max(excess);
        if !check.ok {
            report.violations += 1;
            report.first_violation.get_or_insert([a, b, c]);
        }
    }
    Ok(report)
}
