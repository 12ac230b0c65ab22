use proptest::prelude::*;
use spinboson::linalg::{max_abs, max_abs_diff, symmetric_eigenvalues};
use spinboson::nevanlinna::{
    bottom_energy, check_small_alpha_regime, find_zero, phi, phi_at_gap, phi_boundary_limit, sector_threshold,
};
use spinboson::oracle::{elementary_inequality, truncate_full, truncate_hhat};
use spinboson::quad::sphere_area;
use spinboson::schur::{
    birman_schwinger_t, count_below, kernel_k, psi1, psi2, schur_matrix, split_k, KernelChoice,
};
use spinboson::{build_rule, preset_model, CaseTag, Model, Sigma};

const PRESETS: [&str; 4] = ["M1", "M3", "MF", "relativistic-massive"];

fn preset(i: usize) -> Model {
    preset_model(PRESETS[i]).unwrap()
}

fn sigma(plus: bool) -> Sigma {
    if plus {
        Sigma::Plus
    } else {
        Sigma::Minus
    }
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

#[test]
fn sphere_areas_are_exact() {
    assert_eq!(sphere_area(1), 2.0);
    assert_eq!(sphere_area(2), 2.0 * std::f64::consts::PI);
    assert_eq!(sphere_area(3), 4.0 * std::f64::consts::PI);
}

#[test]
fn rule_refinement_converges_monotonically() {
    for name in PRESETS {
        let m = preset_model(name).unwrap();
        let f = |r: f64| m.lambda_sq(r) / (m.omega(r) + 3.0);
        let values: Vec<f64> = [2, 4, 8, 16, 32].iter().map(|&o| m.rule(8, o).integrate(f).unwrap()).collect();
        let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for w in diffs.windows(2) {
            assert!(w[1] < w[0] || w[1] < 1e-14, "{name}: {diffs:?}");
        }
    }
}

#[test]
fn symmetric_kernels_integrate_symmetrically() {
    let rule = build_rule(1.0, 6, 8, 3);
    let p = |r: f64, s: f64| (r + 2.0 * s).sin() / (1.0 + r * s);
    let (x, w) = (rule.nodes(), rule.weights());
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            a += w[i] * w[j] * p(x[i], x[j]);
            b += w[j] * w[i] * p(x[j], x[i]);
        }
    }
    assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
}

#[test]
fn critical_coupling_marks_the_case_boundary() {
    // with m > 2ε the minus root exists for every α, so only M3 has one
    assert_eq!(preset_model("relativistic-massive").unwrap().alpha_critical().unwrap(), None);
    let m = preset_model("M3").unwrap();
    let a = m.alpha_critical().unwrap().unwrap();
    let lim = phi_boundary_limit(&m, Sigma::Minus, a).unwrap();
    assert!(lim.abs() < 1e-9, "{lim}");
    assert_eq!(m.classify(a).unwrap().tag, CaseTag::Case2b);
    assert_eq!(m.classify(a * 1.001).unwrap().tag, CaseTag::Case2a);
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn scaling_covariance(i in 0usize..4, c in 0.2f64..5.0, alpha in 0.05f64..3.0, plus: bool) {
        let m = preset(i);
        let scaled = m.scaled_coupling(c).unwrap();
        let s = sigma(plus);
        let a = m.classify(c * alpha).unwrap();
        let b = scaled.classify(alpha).unwrap();
        prop_assert_eq!(a.tag, b.tag);
        if let (Some(x), Some(y)) = (m.alpha_critical().unwrap(), scaled.alpha_critical().unwrap()) {
            prop_assert!((x / c - y).abs() <= 1e-12 * x);
        }
        let z = sector_threshold(&m, s) - 0.37;
        let p1 = phi(&scaled, s, alpha, z).unwrap();
        let p2 = phi(&m, s, c * alpha, z).unwrap();
        prop_assert!((p1 - p2).abs() <= 1e-12 * (1.0 + p1.abs()), "{} vs {}", p1, p2);
        let r1 = find_zero(&scaled, s, alpha).unwrap();
        let r2 = find_zero(&m, s, c * alpha).unwrap();
        prop_assert_eq!(r1.is_some(), r2.is_some());
        if let (Some(r1), Some(r2)) = (r1, r2) {
            prop_assert!((r1.z - r2.z).abs() <= 1e-10);
        }
    }

    #[test]
    fn phi_is_decreasing_in_z_and_alpha(
        i in 0usize..4, plus: bool, alpha in 0.05f64..3.0, d1 in 1e-6f64..5.0, d2 in 1e-6f64..5.0,
    ) {
        prop_assume!((d1 - d2).abs() > 1e-9);
        let m = preset(i);
        let s = sigma(plus);
        let (near, far) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        // a larger gap is a smaller z
        prop_assert!(phi_at_gap(&m, s, alpha, far).unwrap() > phi_at_gap(&m, s, alpha, near).unwrap());
        let z = sector_threshold(&m, s) - near;
        prop_assert!(phi(&m, s, 1.1 * alpha, z).unwrap() < phi(&m, s, alpha, z).unwrap());
    }

    #[test]
    fn roots_decrease_in_alpha_and_stay_below_threshold(i in 0usize..4, alpha in 0.05f64..4.0) {
        let m = preset(i);
        let a = find_zero(&m, Sigma::Plus, alpha).unwrap().unwrap();
        let b = find_zero(&m, Sigma::Plus, 1.2 * alpha).unwrap().unwrap();
        prop_assert!(b.z < a.z);
        prop_assert!(a.z < m.m() - m.epsilon());
        let res = phi_at_gap(&m, Sigma::Plus, alpha, a.gap).unwrap();
        prop_assert!(res.abs() < 1e-9 * (1.0 + a.z.abs()));
        if let (Some(p), Some(q)) = (
            find_zero(&m, Sigma::Minus, alpha).unwrap(),
            find_zero(&m, Sigma::Minus, 1.2 * alpha).unwrap(),
        ) {
            prop_assert!(q.z <= p.z);
        }
    }

    #[test]
    fn small_coupling_ground_state_is_the_plus_root(
        (i, top) in prop::sample::select(vec![(1usize, 0.56), (3, 0.16)]),
        u in 0.0f64..1.0,
    ) {
        // the regime check fails above `top` for these presets
        let alpha = 0.01 + u * (top - 0.01);
        let m = preset(i);
        assert!(!m.is_case1());
        prop_assume!(check_small_alpha_regime(&m, alpha).unwrap());
        let e = find_zero(&m, Sigma::Plus, alpha).unwrap().unwrap();
        let limit = sector_threshold(&m, Sigma::Minus);
        prop_assume!(e.z < limit);
        prop_assert!(phi(&m, Sigma::Minus, alpha, e.z).unwrap() > 0.0);
        prop_assert_eq!(bottom_energy(&m, alpha).unwrap().energy, e.z);
    }

    #[test]
    fn elementary_inequality_holds(a in 0.0f64..1e3, b in 0.0f64..1e3, c in 1e-3f64..1e3) {
        let chk = elementary_inequality(a, b, c).unwrap();
        prop_assert!(chk.ok, "{:?}", chk);
        let lhs = psi2(a, b, c);
        prop_assert!(lhs >= -1e-12 / c && lhs <= chk.upper + 1e-12 / c);
        let total = psi1(a, b, c) + lhs;
        prop_assert!((total - 1.0 / (a + b + c)).abs() <= 1e-13 / c);
    }

    #[test]
    fn kernel_structure(i in 0usize..4, plus: bool, shift in 1e-3f64..2.0) {
        let m = preset(i);
        let s = sigma(plus);
        let rule = m.rule(4, 6);
        let z = 2.0 * m.m() + s.sign() * m.epsilon() - shift;
        let k = kernel_k(&m, s, z, &rule).unwrap();
        let (k1, k2) = split_k(&m, s, z, &rule).unwrap();
        let sum = &k1.matrix + &k2.matrix;
        // near the pole both halves are O(1/shift) while K is O(1), so the
        // rounding of the sum is measured against the halves
        let err = max_abs_diff(&sum, &k.matrix);
        let halves = max_abs(&k1.matrix) + max_abs(&k2.matrix);
        prop_assert!(err <= 1e-14 * halves);
        if halves <= 4.0 * max_abs(&k.matrix) {
            prop_assert!(err <= 1e-14 * max_abs(&k.matrix));
        }
        prop_assert!(k.frobenius_norm() <= m.lambda_norm_sq() / shift);
        for (idx, &r) in rule.nodes().iter().enumerate() {
            let xr = m.excess(r);
            let mr = rule.weights()[idx].sqrt() * m.lambda(r);
            for (jdx, &t) in rule.nodes().iter().enumerate() {
                let xt = m.excess(t);
                let mt = rule.weights()[jdx].sqrt() * m.lambda(t);
                let bound = (mr * mt).abs() * ((xr * xt).sqrt() / (2.0 * shift * shift) + 1e-12 / shift);
                let e = k2.matrix[(idx, jdx)];
                prop_assert!(e >= -1e-12 * bound.max(1e-300) && e <= bound);
            }
        }
    }

    #[test]
    fn birman_schwinger_equivalence(i in 0usize..4, plus: bool, alpha in 0.1f64..3.0, below in 1e-2f64..2.0) {
        let m = preset(i);
        let s = sigma(plus);
        let rule = m.rule(4, 6);
        let bottom = spinboson::nevanlinna::sector_bottom(&m, s, alpha).unwrap();
        let z = bottom - below;
        let t = birman_schwinger_t(&m, s, alpha, z, &rule, KernelChoice::FullK).unwrap();
        let above = symmetric_eigenvalues(&t.matrix).iter().filter(|&&v| v > 1.0 / (alpha * alpha)).count();
        let direct = symmetric_eigenvalues(&schur_matrix(&m, s, alpha, z, &rule).unwrap())
            .iter()
            .filter(|&&v| v < 0.0)
            .count();
        prop_assert_eq!(above, direct);
        prop_assert_eq!(count_below(&m, s, alpha, z, &rule).unwrap(), direct);
    }

    #[test]
    fn count_is_monotone_in_z(i in 0usize..4, plus: bool, alpha in 0.1f64..3.0, a in 1e-3f64..3.0, b in 1e-3f64..3.0) {
        let m = preset(i);
        let s = sigma(plus);
        let rule = m.rule(4, 6);
        let bottom = spinboson::nevanlinna::sector_bottom(&m, s, alpha).unwrap();
        let (lo, hi) = if a > b { (bottom - a, bottom - b) } else { (bottom - b, bottom - a) };
        prop_assert!(count_below(&m, s, alpha, lo, &rule).unwrap() <= count_below(&m, s, alpha, hi, &rule).unwrap());
    }

    #[test]
    fn truncation_structure(i in 0usize..4, plus: bool, alpha in 0.0f64..3.0, z in -8.0f64..3.0) {
        let m = preset(i);
        let s = sigma(plus);
        let rule = m.rule(2, 3);
        let hat = truncate_hhat(&m, s, alpha, &rule).unwrap();
        let full = truncate_full(&m, s, alpha, &rule).unwrap();
        prop_assert!(hat.adjointness_residual() < 1e-13);
        let dense = hat.to_dense().unwrap();
        prop_assert!(spinboson::linalg::asymmetry(&dense) < 1e-12);
        let a = hat.count_below(z).unwrap();
        let b = full.count_below(z).unwrap();
        prop_assert!(a.abs_diff(b) <= 2);
        let ev = symmetric_eigenvalues(&dense);
        prop_assert_eq!(a, ev.iter().filter(|&&v| v < z).count());
    }
}

#[test]
fn two_photon_sector_is_bounded_below_at_zero_coupling() {
    for name in PRESETS {
        let m = preset_model(name).unwrap();
        for s in Sigma::BOTH {
            let h = truncate_hhat(&m, s, 0.0, &m.rule(3, 4)).unwrap();
            let floor = 2.0 * m.m() + s.sign() * m.epsilon() - 1e-10;
            let ev = symmetric_eigenvalues(&h.to_dense().unwrap());
            let one_photon_below = (0..h.nodes()).filter(|&i| h.one_photon_energy(i) < floor).count();
            let below = ev.iter().filter(|&&v| v < floor).count();
            assert_eq!(below, one_photon_below, "{name} {s}");
            for j in 0..h.nodes() {
                for k in j..h.nodes() {
                    assert!(h.pair_energy(j, k) >= floor);
                }
            }
        }
    }
}
