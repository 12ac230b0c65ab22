//! Radial quadrature on `[0, R]` with the `d`-dimensional surface measure
//! folded into the weights.
//!
//! Every integral in the crate has the form `S_{d-1} ∫₀^R f(r) r^{d-1} dr`,
//! where `S_{d-1}` is the area of the unit sphere in `ℝ^d`. Rules are
//! composite Gauss–Legendre with panels graded geometrically (ratio 2)
//! toward the points where integrands may become singular: the origin and
//! any kink radius of the dispersion relation. Nodes never touch a panel
//! endpoint.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre order used by [`RadialDomain::integrate_adaptive`].
pub const ADAPTIVE_ORDER: usize = 16;

/// Default node cap for adaptive refinement.
pub const DEFAULT_MAX_NODES: usize = 1 << 20;

const INITIAL_DEPTH: usize = 8;
// deep enough to resolve 1/(x + δ) for δ down to 1e-300
const MAX_DEPTH: usize = 1024;

/// Area of the unit sphere `S^{d-1} ⊂ ℝ^d`, i.e. `2π^{d/2}/Γ(d/2)`.
///
/// Computed by the recursion `S(d+2) = 2π S(d) / d` from `S(1) = 2` and
/// `S(2) = 2π`, which is exact up to rounding of π.
pub fn sphere_area(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    let (mut s, mut k) = if d % 2 == 1 { (2.0, 1) } else { (2.0 * PI, 2) };
    while k < d {
        s *= 2.0 * PI / k as f64;
        k += 2;
    }
    s
}

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Direction of geometric grading inside a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    /// Finest panel adjacent to the left endpoint.
    Left,
    /// Finest panel adjacent to the right endpoint.
    Right,
    /// Split at the midpoint, each half graded toward its outer endpoint.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub grading: Grading,
}

impl Segment {
    /// Panel endpoints for `depth` geometric panels per graded half.
    fn panel_edges(&self, depth: usize, out: &mut Vec<f64>) {
        let depth = depth.max(1);
        match self.grading {
            Grading::Left => push_left_graded(self.lo, self.hi, depth, out),
            Grading::Right => push_right_graded(self.lo, self.hi, depth, out),
            Grading::Both => {
                let mid = 0.5 * (self.lo + self.hi);
                push_left_graded(self.lo, mid, depth, out);
                out.pop();
                push_right_graded(mid, self.hi, depth, out);
            }
        }
    }
}

fn push_left_graded(lo: f64, hi: f64, depth: usize, out: &mut Vec<f64>) {
    let len = hi - lo;
    out.push(lo);
    for k in 1..depth {
        out.push(lo + len * 0.5f64.powi((depth - k) as i32));
    }
    out.push(hi);
}

fn push_right_graded(lo: f64, hi: f64, depth: usize, out: &mut Vec<f64>) {
    let len = hi - lo;
    out.push(lo);
    for k in 1..depth {
        out.push(hi - len * 0.5f64.powi(k as i32));
    }
    out.push(hi);
}

/// The radial interval `[0, R]` in dimension `d`, split at breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDomain {
    radius: f64,
    dim: usize,
    segments: Vec<Segment>,
}

impl RadialDomain {
    /// Single segment graded toward the origin.
    pub fn new(radius: f64, dim: usize) -> Self {
        assert!(radius > 0.0 && radius.is_finite(), "radius must be positive");
        assert!(dim >= 1, "dimension must be positive");
        RadialDomain {
            radius,
            dim,
            segments: vec![Segment { lo: 0.0, hi: radius, grading: Grading::Left }],
        }
    }

    /// Splits `[0, R]` at the given interior breakpoints. Each segment is
    /// graded toward its left endpoint; a breakpoint flagged `true` is also
    /// graded from the left, so the segment ending there is graded at both
    /// ends.
    pub fn with_breaks(radius: f64, dim: usize, breaks: &[(f64, bool)]) -> Self {
        let mut domain = RadialDomain::new(radius, dim);
        let mut pts: Vec<(f64, bool)> = breaks
            .iter()
            .copied()
            .filter(|(b, _)| *b > 0.0 && *b < radius)
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-14 * radius);
        if pts.is_empty() {
            return domain;
        }
        domain.segments.clear();
        let mut lo = 0.0;
        for (b, both) in pts {
            let grading = if both { Grading::Both } else { Grading::Left };
            domain.segments.push(Segment { lo, hi: b, grading });
            lo = b;
        }
        domain.segments.push(Segment { lo, hi: radius, grading: Grading::Left });
        domain
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Composite rule with `panels` geometric panels in total (spread evenly
    /// over segments, at least one each) of `order` points.
    pub fn rule(&self, panels: usize, order: usize) -> QuadratureRule {
        assert!(panels >= 1 && order >= 1, "panels and order must be positive");
        let per_segment = (panels / self.segments.len()).max(1);
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        self.for_each_node(per_segment, 1, &x, &w, |r, wt| {
            nodes.push(r);
            weights.push(wt);
            Ok(())
        })
        .expect("rule assembly cannot fail");
        QuadratureRule {
            nodes,
            weights,
            radius: self.radius,
            dim: self.dim,
            panels: per_segment * self.segments.len(),
            order,
        }
    }

    fn for_each_node<F>(&self, depth: usize, subdiv: usize, x: &[f64], w: &[f64], mut visit: F) -> Result<()>
    where
        F: FnMut(f64, f64) -> Result<()>,
    {
        let surface = sphere_area(self.dim);
        let power = (self.dim - 1) as i32;
        let mut edges = Vec::with_capacity(2 * depth + 2);
        for seg in &self.segments {
            let depth = match seg.grading {
                Grading::Both => (depth / 2).max(1),
                _ => depth,
            };
            edges.clear();
            seg.panel_edges(depth, &mut edges);
            for pair in edges.windows(2) {
                let h = (pair[1] - pair[0]) / subdiv as f64;
                for s in 0..subdiv {
                    let a = pair[0] + s as f64 * h;
                    let half = 0.5 * h;
                    let mid = a + half;
                    for (xi, wi) in x.iter().zip(w) {
                        let r = mid + half * xi;
                        visit(r, wi * half * surface * r.powi(power))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Integrates `f` against the radial measure, doubling the number of
    /// nodes (first by deepening the geometric grading, then by uniform
    /// subdivision of panels) until two successive estimates agree to
    /// `rel_tol`.
    pub fn integrate_adaptive<F>(&self, f: F, rel_tol: f64, max_nodes: usize) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let (x, w) = gauss_legendre(ADAPTIVE_ORDER);
        let mut depth = INITIAL_DEPTH;
        let mut subdiv = 1;
        let mut previous: Option<f64> = None;
        loop {
            let mut sum = 0.0;
            let mut count = 0usize;
            self.for_each_node(depth, subdiv, &x, &w, |r, wt| {
                let v = f(r);
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand { r });
                }
                sum += wt * v;
                count += 1;
                Ok(())
            })?;
            if let Some(prev) = previous {
                if (sum - prev).abs() <= rel_tol * sum.abs() {
                    return Ok(sum);
                }
                if 2 * count > max_nodes {
                    return Err(Error::NoConvergence { nodes: count, previous: prev, last: sum });
                }
            }
            previous = Some(sum);
            if depth < MAX_DEPTH {
                depth *= 2;
            } else {
                subdiv *= 2;
            }
        }
    }
}

/// Composite Gauss–Legendre rule with weights `W_i = w_i S_{d-1} r_i^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    radius: f64,
    dim: usize,
    panels: usize,
    order: usize,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `Σ W_i f(r_i)`.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let mut sum = 0.0;
        for (&r, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(r);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { r });
            }
            sum += w * v;
        }
        Ok(sum)
    }
}

/// Composite rule on `[0, R]` graded toward the origin.
pub fn build_rule(radius: f64, panels: usize, order: usize, dim: usize) -> QuadratureRule {
    RadialDomain::new(radius, dim).rule(panels, order)
}

/// Adaptive integral over `[0, R]` graded toward the origin.
pub fn integrate_adaptive<F>(radius: f64, dim: usize, f: F, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    RadialDomain::new(radius, dim).integrate_adaptive(f, rel_tol, DEFAULT_MAX_NODES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert_eq!(sphere_area(2), 2.0 * PI);
        assert_eq!(sphere_area(3), 4.0 * PI);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1, 2, 5, 16, 40] {
            let (x, w) = gauss_legendre(order);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
            let deg = 2 * order - 2;
            let exact = 2.0 / (deg as f64 + 1.0);
            let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            assert_relative_eq!(approx, exact, max_relative = 1e-13);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn rule_moments() {
        let r = build_rule(1.0, 8, 16, 1);
        assert_eq!(r.len(), 128);
        assert!((r.weights().iter().sum::<f64>() - 2.0).abs() < 1e-12);

        let r3 = build_rule(1.0, 8, 16, 3);
        assert!((r3.weights().iter().sum::<f64>() - 4.0 * PI / 3.0).abs() < 1e-10);

        let r2 = build_rule(2.0, 8, 16, 1);
        assert!((r2.weights().iter().sum::<f64>() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn nodes_strictly_interior_and_finest_panel_at_origin() {
        let r = build_rule(1.0, 8, 16, 2);
        assert!(r.nodes().iter().all(|&x| x > 0.0 && x < 1.0));
        assert!(r.nodes().windows(2).all(|p| p[0] < p[1]));
        // finest panel is [0, 2^-7]
        assert!(r.nodes()[15] < 1.0 / 128.0 && r.nodes()[16] > 1.0 / 128.0);
    }

    #[test]
    fn integrate_examples() {
        let r1 = build_rule(1.0, 8, 16, 1);
        let v = r1.integrate(|r| 1.0 / (r + 2.0)).unwrap();
        assert!((v - 2.0 * (1.5f64).ln()).abs() < 1e-10);
        assert_eq!(r1.integrate(|_| 0.0).unwrap(), 0.0);

        let r3 = build_rule(1.0, 8, 16, 3);
        let v = r3.integrate(|r| 1.0 / r).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn integrate_reports_non_finite() {
        let r = build_rule(1.0, 2, 4, 1);
        assert!(matches!(r.integrate(|_| f64::NAN), Err(Error::NonFiniteIntegrand { .. })));
    }

    #[test]
    fn adaptive_resolves_near_singular_denominators() {
        // ∫₀¹ dr/(r+δ) in d = 1 (S₀ = 2)
        for delta in [1e-3, 1e-12, 1e-40] {
            let v = integrate_adaptive(1.0, 1, |r| 1.0 / (r + delta), 1e-12).unwrap();
            let exact = 2.0 * ((1.0 + delta) / delta).ln();
            assert_relative_eq!(v, exact, max_relative = 1e-11);
        }
        // integrable endpoint singularity r^{-1/2}
        let v = integrate_adaptive(1.0, 1, |r| r.powf(-0.5), 1e-12).unwrap();
        assert_relative_eq!(v, 4.0, max_relative = 1e-11);
    }

    #[test]
    fn adaptive_flags_divergence() {
        let err = integrate_adaptive(1.0, 1, |r| 1.0 / r, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. } | Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn breaks_split_and_grade_toward_kink() {
        let d = RadialDomain::with_breaks(2.0, 1, &[(1.0, false)]);
        assert_eq!(d.segments().len(), 2);
        let rule = d.rule(10, 10);
        assert_eq!(rule.len(), 100);
        assert!((rule.weights().iter().sum::<f64>() - 4.0).abs() < 1e-12);
        // kinked integrand |r-1| is integrated exactly
        let v = rule.integrate(|r| (r - 1.0).abs()).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        // graded toward r = 1 from the right
        let just_right = rule.nodes().iter().filter(|&&r| r > 1.0 && r < 1.0625).count();
        assert!(just_right >= 10);
    }

    #[test]
    fn symmetric_kernel_double_sum_is_symmetric() {
        let rule = build_rule(1.0, 6, 8, 3);
        let k = |r: f64, s: f64| (r * r + 3.0 * s) / (1.0 + r + s);
        let mut a = 0.0;
        let mut b = 0.0;
        for (&ri, &wi) in rule.nodes().iter().zip(rule.weights()) {
            for (&sj, &wj) in rule.nodes().iter().zip(rule.weights()) {
                a += wi * wj * k(ri, sj);
                b += wj * wi * k(sj, ri);
            }
        }
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }
}
