mod common;

use common::{covectors, rel, system, BUILTINS};
use geoflow_core::asymptotics;
use geoflow_core::expr::parse;
use geoflow_core::flag::FlagOptions;
use geoflow_core::hamiltonian::PhasePoint;
use geoflow_core::rho::{self, RhoOptions};

#[test]
fn g_rel_is_the_integral_of_rho_along() {
    let opts = RhoOptions::default();
    let end = 0.3;
    for name in BUILTINS {
        let sys = system(name);
        for l in covectors(name, &sys, 3, 41) {
            let profile = asymptotics::rho_profile(&sys, &l, end, 17, &opts).unwrap();
            for t in [0.1, 0.2, end] {
                let g = rho::g_rel(&sys, &l, t, &opts.flag).unwrap();
                let i = profile.integral_to(t);
                assert!((g - i).abs() <= 1e-5, "{name} t={t}: g_rel {g} vs ∫ρ {i}");
            }
        }
    }
}

#[test]
fn derivative_of_g_rel_is_rho_along() {
    let opts = RhoOptions::default();
    let h = 1e-3;
    for name in BUILTINS {
        let sys = system(name);
        for l in covectors(name, &sys, 3, 42) {
            for t in [0.1, 0.25] {
                let g = rho::g_rel_many(&sys, &l, &[t - 2.0 * h, t - h, t + h, t + 2.0 * h], &opts.flag).unwrap();
                let d = (g[0] - 8.0 * g[1] + 8.0 * g[2] - g[3]) / (12.0 * h);
                let r = rho::rho_along(&sys, &l, t, &opts).unwrap();
                assert!((d - r).abs() <= 1e-5, "{name} t={t}: {d} vs {r}");
            }
        }
    }
}

#[test]
fn gram_determinants_stay_positive() {
    let times: Vec<f64> = (0..8).map(|i| 0.05 * i as f64).collect();
    for name in BUILTINS {
        let sys = system(name);
        for l in covectors(name, &sys, 4, 43) {
            for g in rho::gram_many(&sys, &l, &times, &FlagOptions::default()).unwrap() {
                assert!(g.dets.iter().all(|&d| d > 0.0), "{name}: {:?}", g.dets);
                assert_eq!(g.dets.len(), g.growth.len());
            }
        }
    }
}

#[test]
fn closed_form_g_examples() {
    let flag = FlagOptions::default();
    let opts = RhoOptions::default();
    let flat = system("euclidean:3");
    for l in covectors("euclidean:3", &flat, 3, 44) {
        assert!(rho::g_rel(&flat, &l, 0.7, &flag).unwrap().abs() < 1e-12);
        assert!(rho::rho(&flat, &l, &opts).unwrap().abs() < 1e-10);
    }
    let weighted = system("euclidean:3:psi=0.3*x1-0.2*x2+0.5*x3");
    for l in covectors("euclidean:3", &weighted, 3, 45) {
        let v = 0.3 * l.p[0] - 0.2 * l.p[1] + 0.5 * l.p[2];
        for t in [0.1, 0.4, 0.9] {
            assert!((rho::g_rel(&weighted, &l, t, &flag).unwrap() - t * v).abs() < 1e-10);
            assert!((rho::rho_along(&weighted, &l, t, &opts).unwrap() - v).abs() < 1e-8);
        }
    }
    let heis = system("heisenberg3");
    for l in covectors("heisenberg3", &heis, 3, 46) {
        for t in [0.2, 0.5] {
            assert!(rho::g_rel(&heis, &l, t, &flag).unwrap().abs() < 1e-9);
            assert!(rho::rho_along(&heis, &l, t, &opts).unwrap().abs() < 1e-6);
        }
    }
}

#[test]
fn dilation_laws() {
    let opts = RhoOptions::default();
    let times = [0.05, 0.1, 0.2];
    for name in ["heisenberg3", "heisenberg5:1,2", "engel"] {
        let sys = system(name);
        for l in covectors(name, &sys, 3, 47) {
            for c in [1.0, 0.5, 2.0, 3.0] {
                let rep = rho::scaling_checks(&sys, &l, c, &times, &opts).unwrap();
                assert!(rep.passed, "{name} c={c}: {rep:?}");
            }
        }
    }
    let heis = system("heisenberg3");
    let l = covectors("heisenberg3", &heis, 1, 48).remove(0);
    let rep = rho::scaling_checks(&heis, &l, 2.0, &times, &opts).unwrap();
    assert!(rep.rho.abs() < 1e-6 && rep.rho_scaled.abs() < 1e-6);
    assert!(rho::scaling_checks(&system("euclidean:2"), &l, 2.0, &times, &opts).is_err());
}

#[test]
fn riemannian_divergence_formula() {
    let opts = RhoOptions::default();
    for name in ["euclidean:2", "euclidean:3:psi=0.3*x1-0.2*x2+0.5*x3", "sphere2"] {
        let sys = system(name);
        for l in covectors(name, &sys, 5, 49) {
            let d = rho::riemannian_divergence_check(&sys, &l, &opts).unwrap();
            assert!(d.passed, "{name}: {d:?}");
        }
    }
    let sphere = system("sphere2");
    for l in covectors("sphere2", &sphere, 5, 50) {
        assert!(rho::rho(&sphere, &l, &opts).unwrap().abs() < 1e-6);
    }
    let weighted = system("euclidean:3:psi=0.3*x1-0.2*x2+0.5*x3");
    let l = PhasePoint::new(vec![0.1, 0.2, 0.3], vec![0.0, 0.6, 0.8]);
    let d = rho::riemannian_divergence_check(&weighted, &l, &opts).unwrap();
    assert!((d.difference - (-0.2 * 0.6 + 0.5 * 0.8)).abs() < 1e-12);
    assert!(rho::riemannian_divergence_check(&system("heisenberg3"), &l, &opts).is_err());
}

#[test]
fn rho_along_matches_the_contact_oracle_derivative() {
    let base = system("heisenberg5:1,2");
    let vars = ["x1", "x2", "x3", "x4", "x5"];
    let sys = base.with_density(parse("exp(x3 - 0.5*x1*x2)", &vars).unwrap()).unwrap();
    let opts = RhoOptions::default();
    let h = 1e-3;
    for l in covectors("heisenberg5", &sys, 5, 51) {
        for t in [0.05, 0.15, 0.25] {
            let times = [t - 2.0 * h, t - h, t + h, t + 2.0 * h];
            let o: Vec<f64> = rho::contact_check(&sys, &l, &times, &opts.flag).unwrap().iter().map(|s| s.oracle).collect();
            let d = (o[0] - 8.0 * o[1] + 8.0 * o[2] - o[3]) / (12.0 * h);
            let r = rho::rho_along(&sys, &l, t, &opts).unwrap();
            assert!((d - r).abs() <= 1e-5, "t={t}: oracle slope {d} vs {r}");
        }
    }
}

#[test]
fn two_rho_paths_agree() {
    let opts = RhoOptions::default();
    for name in BUILTINS {
        let sys = system(name);
        for l in covectors(name, &sys, 5, 52) {
            let a = rho::rho(&sys, &l, &opts).unwrap();
            let b = rho::rho_flow(&sys, &l, &opts).unwrap();
            assert!((a - b.rho).abs() <= 1e-5, "{name}: {a} vs {}", b.rho);
            assert!(rel(a, b.rho) <= 1e-5);
        }
    }
}
