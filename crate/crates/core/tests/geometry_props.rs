mod common;

use common::{covector, rng, system, BUILTINS};
use geoflow_core::flag::FlagOptions;
use geoflow_core::geometry::{self, lie_bracket, volume_of};
use geoflow_core::hamiltonian::{self, PhasePoint};
use geoflow_core::linalg::Matrix;
use geoflow_core::rho;
use geoflow_core::{Expr, VectorField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random polynomial of degree ≤ 3 in three variables.
fn cubic(r: &mut ChaCha8Rng) -> Expr {
    let mut terms = Vec::new();
    for a in 0..=3i32 {
        for b in 0..=3 - a {
            for c in 0..=3 - a - b {
                let coef = r.gen_range(-1.0..1.0);
                terms.push(Expr::product([Expr::constant(coef), Expr::var(0).powi(a), Expr::var(1).powi(b), Expr::var(2).powi(c)]));
            }
        }
    }
    Expr::sum(terms).simplify()
}

fn field(r: &mut ChaCha8Rng) -> VectorField {
    VectorField::new((0..3).map(|_| cubic(r)).collect())
}

fn at(v: &VectorField, x: &[f64]) -> Vec<f64> {
    v.eval(x).iter().copied().collect()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    for (p, q) in a.iter().zip(b) {
        assert!((p - q).abs() <= tol * p.abs().max(q.abs()).max(1.0), "{a:?} vs {b:?}");
    }
}

#[test]
fn bracket_is_antisymmetric_bilinear_and_jacobi() {
    let mut r = rng(11);
    for _ in 0..20 {
        let (u, v, w) = (field(&mut r), field(&mut r), field(&mut r));
        let (a, b) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let x: Vec<f64> = (0..3).map(|_| r.gen_range(-1.0..1.0)).collect();

        let uv = at(&lie_bracket(&u, &v), &x);
        let vu = at(&lie_bracket(&v, &u), &x);
        assert_close(&uv, &vu.iter().map(|c| -c).collect::<Vec<_>>(), 1e-9);

        let combo = u.scaled(&Expr::constant(a)).add(&v.scaled(&Expr::constant(b)));
        let lhs = at(&lie_bracket(&combo, &w), &x);
        let uw = at(&lie_bracket(&u, &w), &x);
        let vw = at(&lie_bracket(&v, &w), &x);
        let rhs: Vec<f64> = uw.iter().zip(&vw).map(|(p, q)| a * p + b * q).collect();
        assert_close(&lhs, &rhs, 1e-9);

        let j1 = at(&lie_bracket(&u, &lie_bracket(&v, &w)), &x);
        let j2 = at(&lie_bracket(&v, &lie_bracket(&w, &u)), &x);
        let j3 = at(&lie_bracket(&w, &lie_bracket(&u, &v)), &x);
        let scale = j1.iter().chain(&j2).chain(&j3).fold(1.0f64, |m, c| m.max(c.abs()));
        for i in 0..3 {
            assert!((j1[i] + j2[i] + j3[i]).abs() <= 1e-9 * scale, "Jacobi violated: {j1:?} {j2:?} {j3:?}");
        }
    }
}

#[test]
fn aux_frame_has_unit_volume_on_builtins() {
    let mut r = rng(12);
    for name in BUILTINS {
        let sys = system(name);
        for _ in 0..10 {
            let x: Vec<f64> = (0..sys.n()).map(|_| r.gen_range(-0.8..0.8)).collect();
            let comp = geometry::choose_complement(&sys, &x).unwrap();
            let aux = geometry::aux_frame_at(&sys, &x, &comp).unwrap();
            assert!(aux.volume_defect(&sys, &x) < 1e-12, "{name} at {x:?}");
            assert!((volume_of(&sys, &x, &aux.vectors) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn volume_of_examples() {
    let sys = system("euclidean:3");
    let x = [0.1, 0.2, 0.3];
    assert_eq!(volume_of(&sys, &x, &Matrix::identity(3, 3)), 1.0);
    assert!((volume_of(&sys, &x, &(Matrix::identity(3, 3) * 0.5)) - 0.125).abs() < 1e-15);
    let mut rep = Matrix::identity(3, 3);
    rep.set_column(2, &rep.column(1).clone_owned());
    assert_eq!(volume_of(&sys, &x, &rep), 0.0);
}

/// `√Π det M_i` along the geodesic for a prescribed complement.
fn volumes(sys: &geoflow_core::ControlSystem, l0: &PhasePoint, complement: &[usize], times: &[f64]) -> Vec<f64> {
    let opts = FlagOptions::default();
    hamiltonian::flow_many(sys, l0, times, opts.tol)
        .unwrap()
        .iter()
        .map(|s| rho::gram_at_point(sys, &s.point, complement, &opts).unwrap().log_volume())
        .collect()
}

#[test]
fn symbol_volume_does_not_depend_on_complement() {
    let times = [0.0, 0.05, 0.1, 0.2];
    let cases: [(&str, Vec<f64>, [Vec<usize>; 2]); 3] = [
        ("heisenberg3", vec![0.2, 0.4, -0.1], [vec![2], vec![0]]),
        ("heisenberg5:1,2", vec![0.3, 0.2, -0.4, 0.1, 0.0], [vec![4], vec![0]]),
        ("engel", vec![0.5, 0.1, 0.0, 0.0], [vec![2, 3], vec![1, 2]]),
    ];
    let mut r = rng(13);
    for (name, x, [c1, c2]) in cases {
        let sys = system(name);
        for _ in 0..5 {
            let mut l = covector(name, &sys, &mut r);
            l.x = x.clone();
            let l = common::unit(&sys, l);
            let a = volumes(&sys, &l, &c1, &times);
            let b = volumes(&sys, &l, &c2, &times);
            for (p, q) in a.iter().zip(&b) {
                let (vp, vq) = (p.exp(), q.exp());
                assert!((vp - vq).abs() <= 1e-7 * vp.max(vq).max(1.0), "{name}: {vp} vs {vq}");
            }
        }
    }
}
