use serde_json::json;
use spinboson::nevanlinna::{asymptotic_coefficient, essential_spectrum, find_zero, scan_alpha, sector_bottom};
use spinboson::oracle::{fuzz_inequality as fuzz, oneboson_spectrum, truncate_hhat};
use spinboson::schur::{discrete_eigenvalues, full_count_bound_check, EIGENVALUE_TOL};
use spinboson::{Error, Sigma};

use crate::output::{num, opt, Report};
use crate::RunConfig;

/// Default grid of the asymptotics table.
const ASYMPTOTIC_GRID: [f64; 7] = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1];

fn label(v: impl serde::Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

pub fn classify(cfg: &RunConfig) -> Result<Report, Error> {
    let m = &cfg.model;
    let mut r = Report::new("classify", m.name(), vec!["alpha", "case", "alpha_cr"]);
    let alpha_cr = m.alpha_critical()?;
    r.set("integrability", m.integrability());
    r.set("alpha_critical", alpha_cr);
    if let Some(d) = m.diagnostic() {
        r.set("diagnostic", d);
    }
    let mut rows = Vec::new();
    for &alpha in cfg.alphas.as_deref().unwrap_or(&[]) {
        let class = m.classify(alpha)?;
        r.row(vec![num(alpha), class.tag.to_string(), opt(class.alpha_cr)]);
        rows.push(json!({ "alpha": alpha, "case": class.tag, "alpha_cr": class.alpha_cr }));
    }
    r.set("rows", rows);
    Ok(r)
}

pub fn bottom(cfg: &RunConfig) -> Result<Report, Error> {
    let m = &cfg.model;
    let mut r = Report::new(
        "bottom",
        m.name(),
        vec!["alpha", "E_plus", "E_minus", "E", "ess_bottom", "plus_bottom", "minus_bottom", "attaining", "case"],
    );
    let mut rows = Vec::new();
    for &alpha in cfg.alphas()? {
        let ess = essential_spectrum(m, alpha)?;
        let e = &ess.energy;
        r.row(vec![
            num(alpha),
            num(e.e_plus.z),
            opt(e.e_minus.map(|s| s.z)),
            num(e.energy),
            num(ess.bottom),
            num(ess.plus_bottom),
            num(ess.minus_bottom),
            label(ess.attaining),
            e.class.tag.to_string(),
        ]);
        rows.push(json!({ "alpha": alpha, "essential_spectrum": ess }));
    }
    r.set("rows", rows);
    Ok(r)
}

pub fn scan(cfg: &RunConfig) -> Result<Report, Error> {
    let m = &cfg.model;
    let rows = scan_alpha(m, cfg.alphas()?)?;
    let mut r = Report::new("scan", m.name(), vec!["alpha", "E_plus", "E_minus", "E", "ess_bottom"]);
    for row in &rows {
        r.row(vec![num(row.alpha), num(row.e_plus), opt(row.e_minus), num(row.energy), num(row.ess_bottom)]);
    }
    r.set("rows", rows);
    Ok(r)
}

pub fn eigs(cfg: &RunConfig) -> Result<Report, Error> {
    let m = &cfg.model;
    let rule = cfg.rule();
    let mut r = Report::new("eigs", m.name(), vec!["alpha", "sigma", "index", "eigenvalue"]);
    r.set("nodes", rule.len());
    r.set("gap", cfg.gap);
    let mut rows = Vec::new();
    for &alpha in cfg.alphas()? {
        let ess = essential_spectrum(m, alpha)?;
        let mut sectors = Vec::new();
        let mut total = 0;
        for sigma in Sigma::BOTH {
            let bottom = sector_bottom(m, sigma, alpha)?;
            let ev = discrete_eigenvalues(m, sigma, alpha, &rule, cfg.gap)?;
            for (i, &e) in ev.iter().enumerate() {
                r.row(vec![num(alpha), sigma.to_string(), i.to_string(), num(e)]);
            }
            total += ev.iter().filter(|&&e| e < ess.bottom - cfg.gap).count();
            sectors.push(json!({ "sigma": sigma, "sector_bottom": bottom, "eigenvalues": ev }));
        }
        let check = full_count_bound_check(m, alpha, ess.bottom - cfg.gap, &rule)?;
        rows.push(json!({
            "alpha": alpha,
            "ess_bottom": ess.bottom,
            "sectors": sectors,
            "total_below_ess_bottom": total,
            "full_count_check": check,
        }));
    }
    r.set("rows", rows);
    Ok(r)
}

pub fn oracle(cfg: &RunConfig) -> Result<Report, Error> {
    let m = &cfg.model;
    let rule = cfg.rule();
    let mut r = Report::new("oracle", m.name(), vec!["alpha", "sigma", "index", "schur", "truncation", "difference"]);
    r.set("nodes", rule.len());
    r.set("gap", cfg.gap);
    let mut rows = Vec::new();
    for &alpha in cfg.alphas()? {
        for sigma in Sigma::BOTH {
            let top = sector_bottom(m, sigma, alpha)? - cfg.gap;
            let schur = discrete_eigenvalues(m, sigma, alpha, &rule, cfg.gap)?;
            let truncated = truncate_hhat(m, sigma, alpha, &rule)?.eigenvalues_below(top, EIGENVALUE_TOL)?;
            for i in 0..schur.len().max(truncated.len()) {
                let (a, b) = (schur.get(i).copied(), truncated.get(i).copied());
                let diff = a.zip(b).map(|(a, b)| a - b);
                r.row(vec![num(alpha), sigma.to_string(), i.to_string(), opt(a), opt(b), opt(diff)]);
            }
            rows.push(json!({
                "alpha": alpha,
                "sigma": sigma,
                "below": top,
                "schur": schur,
                "truncation": truncated,
                "counts_agree": schur.len() == truncated.len(),
            }));
        }
    }
    r.set("rows", rows);
    Ok(r)
}

pub fn asymptotics(cfg: &RunConfig) -> Result<Report, Error> {
    let m = &cfg.model;
    let c = asymptotic_coefficient(m)?;
    let mut r = Report::new("asymptotics", m.name(), vec!["alpha", "E_plus", "ratio", "target", "discrepancy"]);
    r.set("coefficient", c);
    let alphas = cfg.alphas.as_deref().unwrap_or(&ASYMPTOTIC_GRID);
    let mut rows = Vec::new();
    for &alpha in alphas {
        let root = find_zero(m, Sigma::Plus, alpha)?.ok_or(Error::NotApplicable("the plus sector has no root"))?;
        let ratio = (root.z + m.epsilon()) / (alpha * alpha);
        let disc = (ratio + c).abs();
        r.row(vec![num(alpha), num(root.z), num(ratio), num(-c), num(disc)]);
        rows.push(json!({ "alpha": alpha, "e_plus": root.z, "ratio": ratio, "target": -c, "discrepancy": disc }));
    }
    r.set("rows", rows);
    Ok(r)
}

pub fn oneboson(cfg: &RunConfig) -> Result<Report, Error> {
    let m = &cfg.model;
    let mut r = Report::new(
        "oneboson",
        m.name(),
        vec!["alpha", "block", "expected", "truncated", "resolvable", "ground_state", "ess_bottom"],
    );
    let mut rows = Vec::new();
    for &alpha in cfg.alphas()? {
        let rep = oneboson_spectrum(m, alpha)?;
        for b in &rep.blocks {
            r.row(vec![
                num(alpha),
                b.block.to_string(),
                opt(b.expected),
                opt(b.truncated),
                b.resolvable.to_string(),
                num(rep.ground_state),
                num(rep.ess_bottom),
            ]);
        }
        rows.push(json!({ "alpha": alpha, "report": rep }));
    }
    r.set("rows", rows);
    Ok(r)
}

pub fn fuzz_inequality(cfg: &RunConfig) -> Result<Report, Error> {
    let rep = fuzz(cfg.count, cfg.seed)?;
    let mut r = Report::new("fuzz-inequality", cfg.model.name(), vec!["seed", "count", "violations", "worst_excess", "passed"]);
    let passed = rep.violations == 0;
    r.row(vec![
        rep.seed.to_string(),
        rep.count.to_string(),
        rep.violations.to_string(),
        num(rep.worst_excess),
        passed.to_string(),
    ]);
    r.set("passed", passed);
    r.set("result", rep);
    Ok(r)
}
