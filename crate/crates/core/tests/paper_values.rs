use spinboson::nevanlinna::{essential_spectrum, find_zero, phi, phi_boundary_limit, sector_bottom};
use spinboson::oracle::oneboson_spectrum;
use spinboson::schur::{birman_schwinger_t, count_below, delta_diag, KernelChoice};
use spinboson::{preset_model, CaseTag, Sigma, PRESET_NAMES};

#[test]
fn infrared_divergent_model_is_case_one() {
    let m1 = preset_model("M1").unwrap();
    assert_eq!(m1.classify(1.0).unwrap().tag, CaseTag::Case1);
    assert_eq!(m1.classify(1e-3).unwrap().tag, CaseTag::Case1);
    assert_eq!(phi_boundary_limit(&m1, Sigma::Plus, 1.0).unwrap(), f64::NEG_INFINITY);
    assert_eq!(phi_boundary_limit(&m1, Sigma::Minus, 0.01).unwrap(), f64::NEG_INFINITY);
}

#[test]
fn essential_bottom_lies_below_two_photon_threshold() {
    for name in PRESET_NAMES {
        let m = preset_model(name).unwrap();
        for alpha in [0.05, 0.3, 1.0, 3.0, 10.0] {
            let ess = essential_spectrum(&m, alpha).unwrap();
            assert!(ess.bottom < 2.0 * m.m() - m.epsilon(), "{name} α={alpha}");
        }
    }
}

#[test]
fn delta_is_bounded_below_by_phi_at_the_mass() {
    for name in PRESET_NAMES {
        let m = preset_model(name).unwrap();
        let rule = m.rule(6, 8);
        for sigma in Sigma::BOTH {
            for alpha in [0.3, 1.0, 2.0] {
                let z = sector_bottom(&m, sigma, alpha).unwrap() - 0.05;
                let d = delta_diag(&m, sigma, alpha, z, &rule).unwrap();
                let at_mass = phi(&m, sigma, alpha, z - m.m()).unwrap();
                let inf = (0..d.dim()).map(|i| d.matrix[(i, i)]).fold(f64::INFINITY, f64::min);
                assert!(inf >= at_mass - 1e-12 * at_mass.abs(), "{name} {sigma} α={alpha}");
                assert!(at_mass > 0.0);
            }
        }
    }
}

#[test]
fn boundary_kernel_is_bounded_and_left_continuous() {
    for name in ["M1", "M3", "MF"] {
        let m = preset_model(name).unwrap();
        let rule = m.rule(6, 8);
        for sigma in Sigma::BOTH {
            let alpha = 1.0;
            let Some(root) = find_zero(&m, sigma, alpha).unwrap() else { continue };
            let z0 = m.m() + root.z;
            let c0 = 2.0 * m.m() + sigma.sign() * m.epsilon() - z0;
            let theta = birman_schwinger_t(&m, sigma, alpha, z0, &rule, KernelChoice::K2Only).unwrap();
            let mu: Vec<f64> = theta
                .radii
                .iter()
                .zip(&theta.weights)
                .map(|(&r, &w)| w.sqrt() * m.lambda(r))
                .collect();
            for i in 0..theta.dim() {
                for j in 0..theta.dim() {
                    let bound = (mu[i] * mu[j]).abs() / (2.0 * c0 * c0);
                    assert!(theta.matrix[(i, j)].abs() <= bound * (1.0 + 1e-12), "{name} {sigma} ({i}, {j})");
                }
            }
            let mut prev = f64::INFINITY;
            for k in 1..=8 {
                let t = birman_schwinger_t(&m, sigma, alpha, z0 - 10f64.powi(-k), &rule, KernelChoice::K2Only).unwrap();
                let d = (&t.matrix - &theta.matrix).norm();
                assert!(d < prev, "{name} {sigma} k={k}");
                prev = d;
            }
            assert!(prev < 1e-6);
        }
    }
}

#[test]
fn no_eigenvalues_at_vanishing_coupling() {
    for name in PRESET_NAMES {
        let m = preset_model(name).unwrap();
        for sigma in Sigma::BOTH {
            let z = sector_bottom(&m, sigma, 1e-4).unwrap() - 1e-3;
            assert_eq!(count_below(&m, sigma, 1e-4, z, &m.rule(6, 8)).unwrap(), 0, "{name} {sigma}");
        }
    }
}

#[test]
fn one_boson_spectrum_per_regime() {
    let m3 = preset_model("M3").unwrap();
    let r = oneboson_spectrum(&m3, 0.3).unwrap();
    assert_eq!(r.class.tag, CaseTag::Case2b);
    assert_eq!(r.eigenvalues.len(), 1);
    assert_eq!(r.eigenvalues[0].value, find_zero(&m3, Sigma::Plus, 0.3).unwrap().unwrap().z);
    assert_eq!(r.ess_bottom, m3.m() - m3.epsilon());

    let m1 = preset_model("M1").unwrap();
    let r = oneboson_spectrum(&m1, 1.0).unwrap();
    assert_eq!(r.eigenvalues.len(), 2);
    let energy = spinboson::nevanlinna::bottom_energy(&m1, 1.0).unwrap().energy;
    assert_eq!(r.ground_state, energy);
    assert!((r.truncated_ground_state - energy).abs() < 1e-8);
    for b in &r.blocks {
        let (Some(x), Some(y)) = (b.expected, b.truncated) else { panic!("{b:?}") };
        assert!((x - y).abs() < 1e-8);
    }
}
