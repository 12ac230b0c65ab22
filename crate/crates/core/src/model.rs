//! Model parameters: dispersion `ω`, coupling `λ`, atom level `ε`, and the
//! coupling-regime classification.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::RadialDomain;
use crate::Tolerances;

/// Radial dispersion relation `ω(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Dispersion {
    /// `ω(r) = r`.
    Abs {},
    /// `ω(r) = √(r² + mass²)`.
    Relativistic { mass: f64 },
    /// `ω(r) = max(r − a, 0) + m`.
    FlatBottom { a: f64, m: f64 },
    /// Piecewise linear through `(r, ω)` pairs starting at `r = 0`,
    /// continued with the last slope beyond the table.
    Tabulated { points: Vec<[f64; 2]> },
}

/// Radial coupling function `λ(r)`, zero beyond `support_radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Coupling {
    /// `λ(r) = amplitude` on `[0, R]`.
    Box {
        support_radius: f64,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// `λ(r) = amplitude · √ω(r)` on `[0, R]`.
    SqrtOmegaBox {
        support_radius: f64,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// Piecewise linear through `(r, λ)` pairs starting at `r = 0`, constant
    /// beyond the last node and zero beyond `support_radius`.
    Tabulated { points: Vec<[f64; 2]>, support_radius: f64 },
}

fn unit() -> f64 {
    1.0
}

/// Declared square-integrability of `λ/√(ω − m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrability {
    Case1Divergent,
    Case2Integrable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub dimension: usize,
    pub epsilon: f64,
    pub omega: Dispersion,
    pub lambda: Coupling,
    pub integrability: Integrability,
}

impl ModelSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }
}

/// Regime tag of a `(model, α)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    Case1,
    Case2a,
    Case2b,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseTag::Case1 => "Case1",
            CaseTag::Case2a => "Case2a",
            CaseTag::Case2b => "Case2b",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingClass {
    pub tag: CaseTag,
    pub alpha_cr: Option<f64>,
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 4] = ["M1", "M3", "MF", "relativistic-massive"];

/// Bundled models.
///
/// * `M1`: `d = 1`, `ω = |k|`, box `R = 1` (infrared divergent).
/// * `M3`: `d = 3`, `ω = |k|`, box `R = 1`.
/// * `MF`: `d = 1`, flat bottom `ω = max(|k| − 1, 0)`, box `R = 2`.
/// * `relativistic-massive` (alias `REL`): `d = 3`, `ω = √(k² + 9)`, box `R = 1`.
///
/// All use `ε = 1`.
pub fn preset(name: &str) -> Option<ModelSpec> {
    let boxed = |r: f64| Coupling::Box { support_radius: r, amplitude: 1.0 };
    let spec = match name.to_ascii_lowercase().as_str() {
        "m1" => ModelSpec {
            name: "M1".into(),
            dimension: 1,
            epsilon: 1.0,
            omega: Dispersion::Abs {},
            lambda: boxed(1.0),
            integrability: Integrability::Case1Divergent,
        },
        "m3" => ModelSpec {
            name: "M3".into(),
            dimension: 3,
            epsilon: 1.0,
            omega: Dispersion::Abs {},
            lambda: boxed(1.0),
            integrability: Integrability::Case2Integrable,
        },
        "mf" => ModelSpec {
            name: "MF".into(),
            dimension: 1,
            epsilon: 1.0,
            omega: Dispersion::FlatBottom { a: 1.0, m: 0.0 },
            lambda: boxed(2.0),
            integrability: Integrability::Case1Divergent,
        },
        "rel" | "relativistic-massive" => ModelSpec {
            name: "relativistic-massive".into(),
            dimension: 3,
            epsilon: 1.0,
            omega: Dispersion::Relativistic { mass: 3.0 },
            lambda: boxed(1.0),
            integrability: Integrability::Case2Integrable,
        },
        _ => return None,
    };
    Some(spec)
}

/// A validated model with its photon mass `m` and cached norms.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    m: f64,
    lambda_norm_sq: f64,
    // ‖λ/√(ω−m)‖² when declared integrable, or the failure message
    excess_norm_sq: Option<std::result::Result<f64, String>>,
    domain: RadialDomain,
    tol: Tolerances,
    diagnostic: Option<String>,
}

/// Validates a specification with default tolerances.
pub fn validate_model(spec: ModelSpec) -> Result<Model> {
    Model::new(spec, Tolerances::default())
}

/// Loads and validates a bundled preset.
pub fn preset_model(name: &str) -> Result<Model> {
    let spec = preset(name).ok_or_else(|| Error::InvalidArgument(format!("unknown preset '{name}'")))?;
    validate_model(spec)
}

fn finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{what} must be finite, got {v}")))
    }
}

fn check_table(points: &[[f64; 2]], what: &str) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::InvalidModel(format!("{what} table needs at least two points")));
    }
    if points[0][0] != 0.0 {
        return Err(Error::InvalidModel(format!("{what} table must start at r = 0")));
    }
    for p in points {
        finite(p[0], what)?;
        finite(p[1], what)?;
    }
    if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
        return Err(Error::InvalidModel(format!("{what} table radii must be strictly increasing")));
    }
    Ok(())
}

fn interpolate(points: &[[f64; 2]], r: f64) -> f64 {
    let i = points.partition_point(|p| p[0] <= r);
    if i == 0 {
        return points[0][1];
    }
    if i == points.len() {
        return points[i - 1][1];
    }
    let [r0, v0] = points[i - 1];
    let [r1, v1] = points[i];
    v0 + (v1 - v0) * (r - r0) / (r1 - r0)
}

impl Model {
    pub fn new(spec: ModelSpec, tol: Tolerances) -> Result<Self> {
        if spec.epsilon.is_nan() || spec.epsilon <= 0.0 {
            return Err(Error::NegativeEpsilon(spec.epsilon));
        }
        finite(spec.epsilon, "epsilon")?;
        if spec.dimension == 0 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        if spec.dimension > 64 {
            return Err(Error::InvalidModel("dimension above 64 is not supported".into()));
        }
        tol.validate()?;

        let m = match &spec.omega {
            Dispersion::Abs {} => 0.0,
            Dispersion::Relativistic { mass } => {
                finite(*mass, "mass")?;
                if *mass < 0.0 {
                    return Err(Error::InvalidModel("mass must be nonnegative".into()));
                }
                *mass
            }
            Dispersion::FlatBottom { a, m } => {
                finite(*a, "a")?;
                finite(*m, "m")?;
                if *a < 0.0 || *m < 0.0 {
                    return Err(Error::InvalidModel("flat-bottom parameters must be nonnegative".into()));
                }
                *m
            }
            Dispersion::Tabulated { points } => {
                check_table(points, "omega")?;
                let min = points.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
                if min < 0.0 {
                    return Err(Error::InvalidModel("omega must be nonnegative".into()));
                }
                min
            }
        };

        let radius = match &spec.lambda {
            Coupling::Box { support_radius, amplitude } | Coupling::SqrtOmegaBox { support_radius, amplitude } => {
                finite(*amplitude, "amplitude")?;
                *support_radius
            }
            Coupling::Tabulated { points, support_radius } => {
                check_table(points, "lambda")?;
                *support_radius
            }
        };
        finite(radius, "support_radius")?;
        if radius <= 0.0 {
            return Err(Error::InvalidModel("support_radius must be positive".into()));
        }

        let domain = RadialDomain::with_breaks(radius, spec.dimension, &[]);
        let mut model = Model {
            spec,
            m,
            lambda_norm_sq: 0.0,
            excess_norm_sq: None,
            domain,
            tol,
            diagnostic: None,
        };
        model.domain = RadialDomain::with_breaks(radius, model.spec.dimension, &model.breakpoints());

        model.check_unbounded()?;
        let sampled_min = (0..=4096)
            .map(|i| model.omega(radius * i as f64 / 4096.0))
            .fold(f64::INFINITY, f64::min);
        if sampled_min < m - 1e-12 * (1.0 + m) {
            return Err(Error::InvalidModel(format!(
                "sampled omega minimum {sampled_min} lies below the infimum {m}"
            )));
        }

        let norm = model
            .weighted_l2_norm_sq(|_| 1.0)
            .map_err(|e| Error::InvalidModel(format!("coupling is not square integrable: {e}")))?;
        if !(norm > 0.0) {
            return Err(Error::ZeroCoupling);
        }
        model.lambda_norm_sq = norm;

        if model.spec.integrability == Integrability::Case2Integrable {
            model.excess_norm_sq = Some(model.weighted_l2_norm_sq(|r| 1.0 / model.excess(r)).map_err(|e| e.to_string()));
        }
        model.check_integrability_flag();
        Ok(model)
    }

    fn breakpoints(&self) -> Vec<(f64, bool)> {
        let mut breaks = Vec::new();
        if let Dispersion::FlatBottom { a, .. } = self.spec.omega {
            breaks.push((a, false));
        }
        if let Dispersion::Tabulated { points } = &self.spec.omega {
            let mut prev_flat = points[0][1] == self.m;
            for p in &points[1..] {
                let at_min = p[1] == self.m;
                breaks.push((p[0], at_min && !prev_flat));
                prev_flat = at_min;
            }
        }
        if let Coupling::Tabulated { points, .. } = &self.spec.lambda {
            breaks.extend(points[1..].iter().map(|p| (p[0], false)));
        }
        breaks
    }

    fn check_unbounded(&self) -> Result<()> {
        let threshold = 1e6 * (1.0 + self.m + self.spec.epsilon);
        let mut max_sampled = f64::NEG_INFINITY;
        for k in 0..=80 {
            let v = self.omega(2f64.powi(k));
            max_sampled = max_sampled.max(v);
            if v > threshold {
                return Ok(());
            }
        }
        Err(Error::BoundedDispersion { max_sampled })
    }

    /// Dyadic probe of `I(δ) = ∫|λ|²/(ω − m + δ)` for `δ = 2^{-k}`,
    /// `k = 10..30`: a divergent integral keeps growing by a roughly constant
    /// (or increasing) amount per halving, a convergent one by a shrinking
    /// amount.
    fn probe_divergence(&self) -> Option<bool> {
        let mut values = Vec::new();
        for k in 10..=30 {
            let delta = 2f64.powi(-k);
            let v = self
                .domain
                .integrate_adaptive(|r| self.lambda_sq(r) / (self.excess(r) + delta), 1e-8, self.tol.max_nodes)
                .ok()?;
            values.push(v);
        }
        let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let tail = &inc[inc.len() - 6..];
        let growing = tail.windows(2).all(|w| w[0] > 0.0 && w[1] >= 0.9 * w[0]);
        Some(growing)
    }

    fn check_integrability_flag(&mut self) {
        let declared_divergent = self.spec.integrability == Integrability::Case1Divergent;
        let Some(probed_divergent) = self.probe_divergence() else {
            return;
        };
        if probed_divergent != declared_divergent {
            let msg = format!(
                "model '{}' is declared {:?} but the dyadic probe suggests the integral of |λ|²/(ω−m) {}",
                self.spec.name,
                self.spec.integrability,
                if probed_divergent { "diverges" } else { "converges" }
            );
            log::warn!("{msg}");
            self.diagnostic = Some(msg);
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn dim(&self) -> usize {
        self.spec.dimension
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }

    /// Photon mass `m = inf ω`.
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn support_radius(&self) -> f64 {
        self.domain.radius()
    }

    pub fn domain(&self) -> &RadialDomain {
        &self.domain
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    pub fn integrability(&self) -> Integrability {
        self.spec.integrability
    }

    pub fn is_case1(&self) -> bool {
        self.spec.integrability == Integrability::Case1Divergent
    }

    /// Warning recorded when the integrability probe contradicts the
    /// declared flag.
    pub fn diagnostic(&self) -> Option<&str> {
        self.diagnostic.as_deref()
    }

    /// `‖λ‖² = S_{d-1} ∫ |λ|² r^{d-1} dr`.
    pub fn lambda_norm_sq(&self) -> f64 {
        self.lambda_norm_sq
    }

    pub fn with_tolerances(&self, tol: Tolerances) -> Result<Model> {
        tol.validate()?;
        Ok(Model { tol, ..self.clone() })
    }

    /// Composite rule on `[0, R_λ]` respecting the model's breakpoints.
    pub fn rule(&self, panels: usize, order: usize) -> crate::quad::QuadratureRule {
        self.domain.rule(panels, order)
    }

    pub fn omega(&self, r: f64) -> f64 {
        match &self.spec.omega {
            Dispersion::Abs {} => r,
            Dispersion::Relativistic { mass } => r.hypot(*mass),
            Dispersion::FlatBottom { a, m } => (r - a).max(0.0) + m,
            Dispersion::Tabulated { points } => {
                let last = points.len() - 1;
                let [r1, v1] = points[last];
                if r <= r1 {
                    interpolate(points, r)
                } else {
                    let [r0, v0] = points[last - 1];
                    v1 + (v1 - v0) / (r1 - r0) * (r - r1)
                }
            }
        }
    }

    /// `ω(r) − m`, evaluated without cancellation where the kind allows.
    pub fn excess(&self, r: f64) -> f64 {
        match &self.spec.omega {
            Dispersion::Abs {} => r,
            Dispersion::Relativistic { mass } => {
                let s = r.hypot(*mass) + mass;
                if s == 0.0 {
                    0.0
                } else {
                    r * r / s
                }
            }
            Dispersion::FlatBottom { a, .. } => (r - a).max(0.0),
            Dispersion::Tabulated { .. } => (self.omega(r) - self.m).max(0.0),
        }
    }

    pub fn lambda(&self, r: f64) -> f64 {
        match &self.spec.lambda {
            Coupling::Box { support_radius, amplitude } => {
                if r <= *support_radius {
                    *amplitude
                } else {
                    0.0
                }
            }
            Coupling::SqrtOmegaBox { support_radius, amplitude } => {
                if r <= *support_radius {
                    amplitude * self.omega(r).sqrt()
                } else {
                    0.0
                }
            }
            Coupling::Tabulated { points, support_radius } => {
                if r <= *support_radius {
                    interpolate(points, r)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn lambda_sq(&self, r: f64) -> f64 {
        let l = self.lambda(r);
        l * l
    }

    /// `S_{d-1} ∫₀^{R_λ} weight(r) |λ(r)|² r^{d-1} dr`, adaptively.
    pub fn weighted_l2_norm_sq<F>(&self, weight: F) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        self.domain
            .integrate_adaptive(|r| weight(r) * self.lambda_sq(r), self.tol.integral_rel, self.tol.max_nodes)
            .map_err(|e| match e {
                Error::NoConvergence { .. } | Error::NonFiniteIntegrand { .. } => Error::DivergentIntegral(e.to_string()),
                other => other,
            })
    }

    /// `‖λ/√(ω − m)‖²` for models declared integrable.
    pub fn excess_norm_sq(&self) -> Result<Option<f64>> {
        match &self.excess_norm_sq {
            None => Ok(None),
            Some(Ok(v)) => Ok(Some(*v)),
            Some(Err(msg)) => Err(Error::DivergentIntegral(format!(
                "model '{}' is declared integrable but ‖λ/√(ω−m)‖² failed: {msg}",
                self.spec.name
            ))),
        }
    }

    /// `√(2ε − m)/‖λ/√(ω − m)‖` for integrable models with `m < 2ε`.
    pub fn alpha_critical(&self) -> Result<Option<f64>> {
        if self.is_case1() || self.m >= 2.0 * self.spec.epsilon {
            return Ok(None);
        }
        let norm = self.excess_norm_sq()?.expect("integrable model carries its norm");
        Ok(Some((2.0 * self.spec.epsilon - self.m).sqrt() / norm.sqrt()))
    }

    pub fn classify(&self, alpha: f64) -> Result<CouplingClass> {
        check_alpha(alpha)?;
        if self.is_case1() {
            return Ok(CouplingClass { tag: CaseTag::Case1, alpha_cr: None });
        }
        let alpha_cr = self.alpha_critical()?;
        let tag = match alpha_cr {
            Some(cr) if alpha <= cr => CaseTag::Case2b,
            _ => CaseTag::Case2a,
        };
        Ok(CouplingClass { tag, alpha_cr })
    }

    /// The same model with `λ` replaced by `c·λ`.
    pub fn scaled_coupling(&self, c: f64) -> Result<Model> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {c}")));
        }
        let mut spec = self.spec.clone();
        match &mut spec.lambda {
            Coupling::Box { amplitude, .. } | Coupling::SqrtOmegaBox { amplitude, .. } => *amplitude *= c,
            Coupling::Tabulated { points, .. } => points.iter_mut().for_each(|p| p[1] *= c),
        }
        Model::new(spec, self.tol)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must be positive and finite, got {alpha}")))
    }
}

/// Free-function form of [`Model::weighted_l2_norm_sq`].
pub fn weighted_l2_norm_sq<F: Fn(f64) -> f64>(model: &Model, weight: F) -> Result<f64> {
    model.weighted_l2_norm_sq(weight)
}

pub fn classify(model: &Model, alpha: f64) -> Result<CouplingClass> {
    model.classify(alpha)
}

pub fn alpha_critical(model: &Model) -> Result<Option<f64>> {
    model.alpha_critical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn m1() -> Model {
        preset_model("M1").unwrap()
    }

    #[test]
    fn presets_validate_with_exact_mass() {
        assert_eq!(m1().m(), 0.0);
        assert_eq!(preset_model("MF").unwrap().m(), 0.0);
        assert_eq!(preset_model("REL").unwrap().m(), 3.0);
        for name in PRESET_NAMES {
            let model = preset_model(name).unwrap();
            assert!(model.diagnostic().is_none(), "{name}: {:?}", model.diagnostic());
        }
    }

    #[test]
    fn zero_coupling_is_rejected() {
        let mut spec = preset("M1").unwrap();
        spec.lambda = Coupling::Box { support_radius: 1.0, amplitude: 0.0 };
        assert!(matches!(validate_model(spec), Err(Error::ZeroCoupling)));

        let mut spec = preset("M1").unwrap();
        spec.lambda = Coupling::Tabulated { points: vec![[0.0, 0.0], [1.0, 0.0]], support_radius: 1.0 };
        assert!(matches!(validate_model(spec), Err(Error::ZeroCoupling)));
    }

    #[test]
    fn nonpositive_epsilon_is_rejected() {
        for eps in [0.0, -1.0] {
            let mut spec = preset("M1").unwrap();
            spec.epsilon = eps;
            assert!(matches!(validate_model(spec), Err(Error::NegativeEpsilon(_))));
        }
    }

    #[test]
    fn bounded_dispersion_is_rejected() {
        let mut spec = preset("M1").unwrap();
        spec.omega = Dispersion::Tabulated { points: vec![[0.0, 0.0], [1.0, 1.0], [2.0, 1.0]] };
        assert!(matches!(validate_model(spec), Err(Error::BoundedDispersion { .. })));
    }

    #[test]
    fn weighted_norms() {
        let m1 = m1();
        assert!((m1.weighted_l2_norm_sq(|_| 1.0).unwrap() - 2.0).abs() < 1e-10);
        let v = m1.weighted_l2_norm_sq(|r| 1.0 / (m1.omega(r) + 2.0)).unwrap();
        assert!((v - 2.0 * 1.5f64.ln()).abs() < 1e-10);
        let m3 = preset_model("M3").unwrap();
        let v = m3.weighted_l2_norm_sq(|r| 1.0 / m3.omega(r)).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn divergent_weight_is_reported() {
        let m1 = m1();
        let err = m1.weighted_l2_norm_sq(|r| 1.0 / r).unwrap_err();
        assert!(matches!(err, Error::DivergentIntegral(_)));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(m1().classify(1.0).unwrap().tag, CaseTag::Case1);
        assert_eq!(m1().alpha_critical().unwrap(), None);

        let m3 = preset_model("M3").unwrap();
        let c = m3.classify(1.0).unwrap();
        assert_eq!(c.tag, CaseTag::Case2a);
        assert!((c.alpha_cr.unwrap() - 1.0 / PI.sqrt()).abs() < 1e-10);
        assert_eq!(m3.classify(0.3).unwrap().tag, CaseTag::Case2b);
        // boundary belongs to Case 2b
        let cr = c.alpha_cr.unwrap();
        assert_eq!(m3.classify(cr).unwrap().tag, CaseTag::Case2b);

        let rel = preset_model("relativistic-massive").unwrap();
        assert_eq!(rel.alpha_critical().unwrap(), None);
        assert_eq!(rel.classify(0.01).unwrap().tag, CaseTag::Case2a);
    }

    #[test]
    fn classify_rejects_bad_alpha() {
        assert!(matches!(m1().classify(0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(m1().classify(f64::NAN), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn json_roundtrip_and_unknown_fields() {
        let spec = preset("MF").unwrap();
        let back = ModelSpec::from_json_str(&spec.to_json()).unwrap();
        assert_eq!(back, spec);

        let text = r#"{"name":"x","dimension":1,"epsilon":1,"omega":{"kind":"abs"},
            "lambda":{"kind":"box","support_radius":1},"integrability":"case1-divergent"}"#;
        let parsed = ModelSpec::from_json_str(text).unwrap();
        assert_eq!(parsed.lambda, Coupling::Box { support_radius: 1.0, amplitude: 1.0 });

        let extra = text.replace("\"name\"", "\"colour\":1,\"name\"");
        assert!(ModelSpec::from_json_str(&extra).is_err());
        let extra_param = text.replace("{\"kind\":\"abs\"}", "{\"kind\":\"abs\",\"mass\":1}");
        assert!(ModelSpec::from_json_str(&extra_param).is_err());
        let extra_lambda = text.replace("\"support_radius\":1}", "\"support_radius\":1,\"shape\":2}");
        assert!(ModelSpec::from_json_str(&extra_lambda).is_err());
    }

    #[test]
    fn mis_declared_integrability_warns_but_is_kept() {
        let mut spec = preset("M1").unwrap();
        spec.integrability = Integrability::Case2Integrable;
        let model = validate_model(spec).unwrap();
        assert_eq!(model.integrability(), Integrability::Case2Integrable);
        assert!(model.diagnostic().is_some());
        assert!(matches!(model.alpha_critical(), Err(Error::DivergentIntegral(_))));

        let mut spec = preset("M3").unwrap();
        spec.integrability = Integrability::Case1Divergent;
        let model = validate_model(spec).unwrap();
        assert!(model.diagnostic().is_some());
        assert_eq!(model.classify(1.0).unwrap().tag, CaseTag::Case1);
    }

    #[test]
    fn tabulated_profiles() {
        let spec = ModelSpec {
            name: "tab".into(),
            dimension: 1,
            epsilon: 1.0,
            omega: Dispersion::Tabulated { points: vec![[0.0, 0.5], [1.0, 1.5]] },
            lambda: Coupling::Tabulated { points: vec![[0.0, 1.0], [1.0, 0.0]], support_radius: 1.0 },
            integrability: Integrability::Case2Integrable,
        };
        let model = validate_model(spec).unwrap();
        assert_eq!(model.m(), 0.5);
        assert!((model.omega(3.0) - 3.5).abs() < 1e-15);
        assert!((model.lambda(0.25) - 0.75).abs() < 1e-15);
        assert_eq!(model.lambda(1.5), 0.0);
        // ∫_{-1}^{1} (1-|r|)² dr = 2/3
        assert!((model.lambda_norm_sq() - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn scaling_divides_alpha_cr() {
        let m3 = preset_model("M3").unwrap();
        let scaled = m3.scaled_coupling(2.0).unwrap();
        let a = m3.alpha_critical().unwrap().unwrap();
        let b = scaled.alpha_critical().unwrap().unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert_eq!(scaled.classify(0.2).unwrap().tag, m3.classify(0.4).unwrap().tag);
    }

    #[test]
    fn relativistic_excess_is_stable() {
        let rel = preset_model("REL").unwrap();
        let r = 1e-9;
        let exact = r * r / (2.0 * 3.0);
        assert!((rel.excess(r) - exact).abs() <= 1e-12 * exact);
    }
}
