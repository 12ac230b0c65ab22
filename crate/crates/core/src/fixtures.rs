//! Frozen regression values: generation and re-evaluation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{preset_model, Model};
use crate::nevanlinna::{asymptotic_coefficient, bottom_energy, find_zero, sector_bottom, Sigma};
use crate::oracle::truncate_hhat;
use crate::quad::QuadratureRule;
use crate::schur;

/// Composite rule used for all regression values: 25 panels of order 16.
pub const FIXTURE_RULE: RuleSpec = RuleSpec { panels: 25, order: 16 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub panels: usize,
    pub order: usize,
}

impl RuleSpec {
    pub fn build(&self, model: &Model) -> QuadratureRule {
        model.rule(self.panels, self.order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Zero of `Φ^(σ)_α`.
    SectorRoot,
    /// `E(α)`.
    BottomEnergy,
    AsymptoticCoefficient,
    /// Eigencount of the truncated `Ĥ^(σ)_α` below `z`.
    TruncatedCount,
    /// Lowest eigenvalue of the truncated `Ĥ^(σ)_α`.
    TruncatedLowest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Sigma>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    pub quantity: Quantity,
    pub value: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub generator: String,
}

fn generator() -> String {
    format!("spinboson {} gen-fixtures", env!("CARGO_PKG_VERSION"))
}

fn need<T>(v: Option<T>, what: &str, f: &Fixture) -> Result<T> {
    v.ok_or_else(|| Error::InvalidArgument(format!("fixture {:?} for {} lacks {what}", f.quantity, f.model)))
}

/// Recomputes the quantity a fixture describes.
pub fn evaluate(f: &Fixture) -> Result<f64> {
    let model = preset_model(&f.model)?;
    match f.quantity {
        Quantity::AsymptoticCoefficient => asymptotic_coefficient(&model),
        Quantity::BottomEnergy => Ok(bottom_energy(&model, need(f.alpha, "alpha", f)?)?.energy),
        Quantity::SectorRoot => {
            let (sigma, alpha) = (need(f.sigma, "sigma", f)?, need(f.alpha, "alpha", f)?);
            let root = find_zero(&model, sigma, alpha)?.ok_or(Error::NotApplicable("the sector has no root"))?;
            Ok(root.z)
        }
        Quantity::TruncatedCount => {
            let (sigma, alpha) = (need(f.sigma, "sigma", f)?, need(f.alpha, "alpha", f)?);
            let rule = need(f.rule, "rule", f)?.build(&model);
            let h = truncate_hhat(&model, sigma, alpha, &rule)?;
            Ok(h.count_below(need(f.z, "z", f)?)? as f64)
        }
        Quantity::TruncatedLowest => {
            let (sigma, alpha) = (need(f.sigma, "sigma", f)?, need(f.alpha, "alpha", f)?);
            let rule = need(f.rule, "rule", f)?.build(&model);
            let h = truncate_hhat(&model, sigma, alpha, &rule)?;
            Ok(h.lowest_eigenvalues(1, 1e-15)?[0])
        }
    }
}

/// Schur-complement count for a [`Quantity::TruncatedCount`] fixture.
pub fn schur_count(f: &Fixture) -> Result<usize> {
    if f.quantity != Quantity::TruncatedCount {
        return Err(Error::InvalidArgument("not a count fixture".into()));
    }
    let model = preset_model(&f.model)?;
    let rule = need(f.rule, "rule", f)?.build(&model);
    schur::count_below(&model, need(f.sigma, "sigma", f)?, need(f.alpha, "alpha", f)?, need(f.z, "z", f)?, &rule)
}

/// Computes the full set of regression values.
pub fn generate() -> Result<Vec<Fixture>> {
    let gen = generator();
    let base = |model: &str, quantity: Quantity, tolerance: f64| Fixture {
        model: model.into(),
        sigma: None,
        alpha: None,
        rule: None,
        z: None,
        quantity,
        value: 0.0,
        tolerance,
        note: None,
        generator: gen.clone(),
    };
    let mut out = vec![
        Fixture { sigma: Some(Sigma::Plus), alpha: Some(1.0), ..base("M1", Quantity::SectorRoot, 1e-12) },
        Fixture { sigma: Some(Sigma::Minus), alpha: Some(1.0), ..base("M1", Quantity::SectorRoot, 1e-12) },
        Fixture { alpha: Some(1.0), ..base("M1", Quantity::BottomEnergy, 1e-12) },
        Fixture { sigma: Some(Sigma::Plus), alpha: Some(0.3), ..base("M3", Quantity::SectorRoot, 1e-12) },
        Fixture {
            note: Some("4π(4 ln(3/2) − 3/2)".into()),
            ..base("M3", Quantity::AsymptoticCoefficient, 1e-12)
        },
    ];

    let m1 = preset_model("M1")?;
    let alpha = 0.2;
    let z = sector_bottom(&m1, Sigma::Plus, alpha)? - 1e-3;
    out.push(Fixture {
        sigma: Some(Sigma::Plus),
        alpha: Some(alpha),
        rule: Some(FIXTURE_RULE),
        z: Some(z),
        note: Some("eigenvalues below m + E_ε(α) − 1e-3".into()),
        ..base("M1", Quantity::TruncatedCount, 0.0)
    });
    out.push(Fixture {
        sigma: Some(Sigma::Plus),
        alpha: Some(alpha),
        rule: Some(FIXTURE_RULE),
        ..base("M1", Quantity::TruncatedLowest, 1e-10)
    });

    for f in &mut out {
        f.value = evaluate(f)?;
    }
    Ok(out)
}

pub fn to_json(fixtures: &[Fixture]) -> String {
    let mut s = serde_json::to_string_pretty(fixtures).expect("fixtures serialize");
    s.push('\n');
    s
}

pub fn from_json_str(s: &str) -> Result<Vec<Fixture>> {
    Ok(serde_json::from_str(s)?)
}

pub fn load(path: impl AsRef<Path>) -> Result<Vec<Fixture>> {
    from_json_str(&std::fs::read_to_string(path)?)
}
