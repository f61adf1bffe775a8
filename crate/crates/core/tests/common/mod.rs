#![allow(dead_code)]

use geoflow_core::catalog::builtin;
use geoflow_core::hamiltonian::{self, PhasePoint};
use geoflow_core::ControlSystem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every builtin family, with representative parameters.
pub const BUILTINS: &[&str] = &[
    "euclidean:2",
    "euclidean:3",
    "euclidean:3:psi=0.3*x1-0.2*x2+0.5*x3",
    "sphere2",
    "heisenberg3",
    "heisenberg5:1,2",
    "engel",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn system(name: &str) -> ControlSystem {
    builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Rescale so that `H = 1/2`.
pub fn unit(sys: &ControlSystem, lambda: PhasePoint) -> PhasePoint {
    let h = hamiltonian::energy(sys, &lambda);
    assert!(h > 1e-6, "covector is nearly annihilated by the frame");
    lambda.scaled(1.0 / (2.0 * h).sqrt())
}

/// A random ample unit covector suited to `name`.
///
/// The nilpotent groups are sampled at the origin. For Engel the horizontal
/// part lies on the unit circle and the vertical part stays moderate, so the
/// volume ratio is not dominated by its higher-order terms on the fit window.
pub fn covector(name: &str, sys: &ControlSystem, rng: &mut ChaCha8Rng) -> PhasePoint {
    let n = sys.n();
    let head = name.split(':').next().unwrap();
    let lambda = match head {
        "heisenberg3" | "heisenberg5" => {
            let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let last = rng.gen_range(0.2..1.0);
            p[n - 1] = if rng.gen_bool(0.5) { last } else { -last };
            PhasePoint::new(vec![0.0; n], p)
        }
        "engel" => {
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let p = vec![th.cos(), th.sin(), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            PhasePoint::new(vec![0.0; n], p)
        }
        _ => {
            let x = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let p = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            PhasePoint::new(x, p)
        }
    };
    unit(sys, lambda)
}

pub fn covectors(name: &str, sys: &ControlSystem, count: usize, seed: u64) -> Vec<PhasePoint> {
    let mut r = rng(seed);
    (0..count).map(|_| covector(name, sys, &mut r)).collect()
}

/// `|a − b| / max(|a|, |b|, 1)`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
