//! The scalar functions `Φ^(σ)_α`, their zeros `E_σε(α)`, the essential
//! spectrum bottom `m + E(α)` and the weak-coupling expansion.
//!
//! `Φ` is evaluated in terms of the gap `δ = m + σε − z > 0` to the
//! sector threshold:
//!
//! ```text
//! Φ(δ) = δ − m − 2σε − α² S_{d-1} ∫ |λ(r)|² r^{d-1} / (ω(r) − m + δ) dr
//! ```
//!
//! which is strictly increasing in `δ`. Working with `δ` keeps roots that lie
//! exponentially close to the threshold (infrared-divergent models at weak
//! coupling) representable.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_alpha, CaseTag, CouplingClass, Model};

/// Spin sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sigma {
    Plus,
    Minus,
}

impl Sigma {
    pub const BOTH: [Sigma; 2] = [Sigma::Plus, Sigma::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Sigma::Plus => 1.0,
            Sigma::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sigma {
        match self {
            Sigma::Plus => Sigma::Minus,
            Sigma::Minus => Sigma::Plus,
        }
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sigma::Plus => "+",
            Sigma::Minus => "-",
        })
    }
}

impl std::str::FromStr for Sigma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "+1" | "1" => Ok(Sigma::Plus),
            "-" | "minus" | "-1" => Ok(Sigma::Minus),
            _ => Err(Error::InvalidArgument(format!("unknown sigma '{s}'"))),
        }
    }
}

/// `z` values closer than this to `m + σε` are refused by [`phi`].
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// Sector threshold `m + σε`, the right end of the domain of `Φ^(σ)`.
pub fn sector_threshold(model: &Model, sigma: Sigma) -> f64 {
    model.m() + sigma.sign() * model.epsilon()
}

/// `S_{d-1} ∫ |λ|² r^{d-1} / (ω − m + δ) dr`.
pub fn resolvent_integral(model: &Model, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("gap must be positive, got {delta}")));
    }
    model.weighted_l2_norm_sq(|r| 1.0 / (model.excess(r) + delta))
}

/// `Φ^(σ)_α` at gap `δ = m + σε − z > 0`.
pub fn phi_at_gap(model: &Model, sigma: Sigma, alpha: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("gap must be positive and finite, got {delta}")));
    }
    let base = delta - model.m() - 2.0 * sigma.sign() * model.epsilon();
    if alpha == 0.0 {
        return Ok(base);
    }
    Ok(base - alpha * alpha * resolvent_integral(model, delta)?)
}

/// `Φ^(σ)_α(z) = −σε − z − α² ∫ |λ|²/(ω + σε − z)` for `z < m + σε`.
pub fn phi(model: &Model, sigma: Sigma, alpha: f64, z: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    if !z.is_finite() {
        return Err(Error::InvalidArgument(format!("z must be finite, got {z}")));
    }
    let limit = sector_threshold(model, sigma);
    if z >= limit - BOUNDARY_GUARD {
        return Err(Error::Domain { what: "phi", z, limit });
    }
    phi_at_gap(model, sigma, alpha, limit - z)
}

/// Limit of `Φ^(σ)_α(z)` as `z ↑ m + σε`: `−∞` for infrared-divergent
/// models, `−2σε − m − α²‖λ/√(ω−m)‖²` otherwise.
pub fn phi_boundary_limit(model: &Model, sigma: Sigma, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    let base = -2.0 * sigma.sign() * model.epsilon() - model.m();
    match model.excess_norm_sq()? {
        None if alpha == 0.0 => Ok(base),
        None => Ok(f64::NEG_INFINITY),
        Some(norm) => Ok(base - alpha * alpha * norm),
    }
}

/// A zero of `Φ^(σ)_α` with its distance to the sector threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorRoot {
    pub sigma: Sigma,
    /// `E_σε(α)`.
    pub z: f64,
    /// `m + σε − E_σε(α)`, accurate even when `z` rounds to the threshold.
    /// Zero when the true gap is below `1e-300`.
    pub gap: f64,
}

const MIN_GAP: f64 = 1e-300;
const MAX_GAP: f64 = 1e300;

/// Unique zero of `Φ^(σ)_α` below `m + σε`, or `None` when `σ = −` and the
/// pair is in Case 2b.
pub fn find_zero(model: &Model, sigma: Sigma, alpha: f64) -> Result<Option<SectorRoot>> {
    check_alpha(alpha)?;
    let class = model.classify(alpha)?;
    if sigma == Sigma::Minus && class.tag == CaseTag::Case2b {
        return Ok(None);
    }
    let f = |delta: f64| phi_at_gap(model, sigma, alpha, delta);
    let fail = |what: &str| {
        Error::BracketFailure(format!(
            "{what} for model '{}', sigma {sigma}, alpha {alpha:e}",
            model.name()
        ))
    };

    // Φ is increasing in δ: grow δ until Φ > 0, then shrink until Φ < 0.
    let mut hi = model.epsilon().max(1.0);
    let mut f_hi = f(hi)?;
    let mut lo: Option<(f64, f64)> = None;
    while f_hi <= 0.0 {
        if f_hi == 0.0 {
            return Ok(Some(root_from_gap(model, sigma, hi)));
        }
        lo = Some((hi, f_hi));
        hi *= 2.0;
        if hi > MAX_GAP {
            return Err(fail("Φ stays negative far below the threshold"));
        }
        f_hi = f(hi)?;
    }
    let (mut lo, mut f_lo) = match lo {
        Some(pair) => pair,
        None => {
            let mut d = hi;
            loop {
                d *= 0.5;
                if d < MIN_GAP {
                    // the zero exists but lies closer to the threshold than
                    // any representable gap
                    if phi_boundary_limit(model, sigma, alpha)? < 0.0 {
                        return Ok(Some(root_from_gap(model, sigma, 0.0)));
                    }
                    return Err(fail("Φ stays positive up to the threshold"));
                }
                let v = f(d)?;
                if v < 0.0 {
                    break (d, v);
                }
                if v == 0.0 {
                    return Ok(Some(root_from_gap(model, sigma, d)));
                }
                hi = d;
                f_hi = v;
            }
        }
    };

    // geometric bisection until the bracket is within a factor of 2
    while hi > 2.0 * lo {
        let mid = (lo * hi).sqrt();
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(Some(root_from_gap(model, sigma, mid)));
        }
        if v < 0.0 {
            lo = mid;
            f_lo = v;
        } else {
            hi = mid;
            f_hi = v;
        }
    }

    let xtol = 1e-15 * lo;
    let gap = brent(f, lo, hi, f_lo, f_hi, xtol)?;
    Ok(Some(root_from_gap(model, sigma, gap)))
}

fn root_from_gap(model: &Model, sigma: Sigma, gap: f64) -> SectorRoot {
    SectorRoot { sigma, z: sector_threshold(model, sigma) - gap, gap }
}

/// Brent's method on a bracket `[a, b]` with `f(a) < 0 < f(b)`.
fn brent<F>(f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::BracketFailure("Brent iteration did not converge".into()))
}

/// `E(α)` with both sector roots and the regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BottomEnergy {
    /// `E(α)`.
    pub energy: f64,
    /// `E_ε(α)`, zero of `Φ^(+)`.
    pub e_plus: SectorRoot,
    /// `E_{−ε}(α)`, zero of `Φ^(−)`; absent in Case 2b.
    pub e_minus: Option<SectorRoot>,
    pub class: CouplingClass,
}

pub fn bottom_energy(model: &Model, alpha: f64) -> Result<BottomEnergy> {
    let class = model.classify(alpha)?;
    let e_plus = find_zero(model, Sigma::Plus, alpha)?.expect("the plus sector always has a root");
    let e_minus = find_zero(model, Sigma::Minus, alpha)?;
    let energy = match (class.tag, e_minus) {
        (CaseTag::Case2b, _) | (_, None) => e_plus.z,
        (_, Some(r)) => e_plus.z.min(r.z),
    };
    Ok(BottomEnergy { energy, e_plus, e_minus, class })
}

/// Which component sets the bottom of the essential spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attaining {
    Plus,
    Minus,
    /// The `[2m − ε, ∞)` branch of the minus sector in Case 2b.
    UnperturbedBranch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssentialSpectrum {
    /// `m + E(α)`.
    pub bottom: f64,
    pub attaining: Attaining,
    /// Bottom of the plus-sector essential spectrum, `m + E_ε(α)`.
    pub plus_bottom: f64,
    /// Bottom of the minus-sector essential spectrum.
    pub minus_bottom: f64,
    pub energy: BottomEnergy,
}

pub fn essential_spectrum(model: &Model, alpha: f64) -> Result<EssentialSpectrum> {
    let energy = bottom_energy(model, alpha)?;
    let m = model.m();
    let plus_bottom = m + energy.e_plus.z;
    let (minus_bottom, minus_kind) = match energy.e_minus {
        Some(r) if energy.class.tag != CaseTag::Case2b => (m + r.z, Attaining::Minus),
        _ => (2.0 * m - model.epsilon(), Attaining::UnperturbedBranch),
    };
    let (bottom, attaining) =
        if plus_bottom <= minus_bottom { (plus_bottom, Attaining::Plus) } else { (minus_bottom, minus_kind) };
    Ok(EssentialSpectrum { bottom, attaining, plus_bottom, minus_bottom, energy })
}

/// Bottom of the essential spectrum of one sector: `m + E_σε(α)`, or
/// `2m − ε` for the minus sector in Case 2b.
pub fn sector_bottom(model: &Model, sigma: Sigma, alpha: f64) -> Result<f64> {
    match find_zero(model, sigma, alpha)? {
        Some(r) => Ok(model.m() + r.z),
        None => Ok(2.0 * model.m() - model.epsilon()),
    }
}

/// `‖λ/√(ω + 2ε)‖²`, the weak-coupling slope `−(E_ε(α) + ε)/α² → c`.
pub fn asymptotic_coefficient(model: &Model) -> Result<f64> {
    let eps = model.epsilon();
    let tight = crate::Tolerances { integral_rel: 1e-13, ..*model.tol() };
    model.with_tolerances(tight)?.weighted_l2_norm_sq(|r| 1.0 / (model.omega(r) + 2.0 * eps))
}

/// Whether `α ≤ √(2ε)/‖λ/√(ω−m)‖`, the range where `E(α) = E_ε(α)` is
/// guaranteed. Not applicable to infrared-divergent models.
pub fn check_small_alpha_regime(model: &Model, alpha: f64) -> Result<bool> {
    check_alpha(alpha)?;
    let Some(norm) = model.excess_norm_sq()? else {
        return Err(Error::NotApplicable("small-coupling bound needs an integrable model"));
    };
    Ok(alpha <= (2.0 * model.epsilon()).sqrt() / norm.sqrt())
}

/// One row of an α sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub alpha: f64,
    pub e_plus: f64,
    pub e_minus: Option<f64>,
    pub energy: f64,
    pub ess_bottom: f64,
}

pub fn scan_alpha(model: &Model, grid: &[f64]) -> Result<Vec<ScanRow>> {
    grid.iter()
        .map(|&alpha| {
            let b = bottom_energy(model, alpha)?;
            Ok(ScanRow {
                alpha,
                e_plus: b.e_plus.z,
                e_minus: b.e_minus.map(|r| r.z),
                energy: b.energy,
                ess_bottom: model.m() + b.energy,
            })
        })
        .collect()
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a sweep as CSV with header `alpha,E_plus,E_minus,E,ess_bottom`.
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "E_plus", "E_minus", "E", "ess_bottom"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.alpha),
            fmt_f64(r.e_plus),
            r.e_minus.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.energy),
            fmt_f64(r.ess_bottom),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Lin,
    Log,
}

/// `steps` points from `start` to `stop` inclusive.
pub fn alpha_grid(start: f64, stop: f64, steps: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && start > 0.0 && stop > start) {
        return Err(Error::InvalidArgument(format!(
            "alpha grid needs 0 < start < stop, got {start}:{stop}"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidArgument("alpha grid needs at least two steps".into()));
    }
    let last = (steps - 1) as f64;
    let grid = (0..steps)
        .map(|i| {
            let t = i as f64 / last;
            match spacing {
                Spacing::Lin => start + (stop - start) * t,
                Spacing::Log => (start.ln() + (stop.ln() - start.ln()) * t).exp(),
            }
        })
        .collect::<Vec<_>>();
    let mut grid = grid;
    grid[0] = start;
    grid[steps - 1] = stop;
    Ok(grid)
}
