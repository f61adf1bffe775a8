//! The fiber-quadratic Hamiltonian, its flow and variational equations.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::ControlSystem;
use crate::linalg::{self, Matrix};
use crate::ode::{self, Tolerances};

pub const DEFAULT_TOL: f64 = 1e-12;

/// A covector `(x, p)`, with `p` in dual coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> PhasePoint {
        assert_eq!(x.len(), p.len(), "x and p must have equal length");
        PhasePoint { x, p }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Concatenated `(x, p)`; the variable layout of phase-space expressions.
    pub fn state(&self) -> Vec<f64> {
        let mut s = self.x.clone();
        s.extend_from_slice(&self.p);
        s
    }

    pub fn from_state(n: usize, s: &[f64]) -> PhasePoint {
        PhasePoint { x: s[..n].to_vec(), p: s[n..2 * n].to_vec() }
    }

    /// Fiber dilation `(x, c·p)`.
    pub fn scaled(&self, c: f64) -> PhasePoint {
        PhasePoint { x: self.x.clone(), p: self.p.iter().map(|v| c * v).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.p).all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug)]
pub struct FlowSample {
    pub t: f64,
    pub point: PhasePoint,
    /// `∂x(t)/∂p(0)`, present when requested.
    pub jv: Option<Matrix>,
    pub controls: Vec<f64>,
    pub energy: f64,
}

/// Symbolic Hamiltonian data, built once per system.
pub struct Symbolic {
    pub n: usize,
    pub h: Expr,
    /// `∂H/∂x` then `∂H/∂p`.
    pub grad: Vec<Expr>,
    /// Full Hessian in the same ordering.
    pub hess: Vec<Vec<Expr>>,
    /// `u_b = ⟨p, X_b⟩`.
    pub controls: Vec<Expr>,
}

impl Symbolic {
    fn build(sys: &ControlSystem) -> Symbolic {
        let n = sys.n();
        let pairing = |comps: &[Expr]| Expr::sum(comps.iter().enumerate().map(|(i, c)| Expr::var(n + i) * c)).simplify();
        let controls: Vec<Expr> = sys.frame().iter().map(|f| pairing(f.components())).collect();
        let kinetic = Expr::sum(controls.iter().map(|u| u.powi(2)));
        let h = (kinetic * 0.5 + pairing(sys.drift().components()) + sys.potential() * 0.5).simplify();
        let grad: Vec<Expr> = (0..2 * n).map(|j| h.diff(j).simplify()).collect();
        let mut hess = vec![vec![Expr::zero(); 2 * n]; 2 * n];
        for i in 0..2 * n {
            for j in i..2 * n {
                let e = grad[i].diff(j).simplify();
                hess[j][i] = e.clone();
                hess[i][j] = e;
            }
        }
        Symbolic { n, h, grad, hess, controls }
    }

    /// Hamiltonian vector field at state `z`.
    pub fn field(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            out[i] = self.grad[n + i].eval(z);
            out[n + i] = -self.grad[i].eval(z);
        }
    }

    /// Jacobian of the Hamiltonian vector field.
    pub fn field_jacobian(&self, z: &[f64]) -> Matrix {
        let n = self.n;
        let mut hz = Matrix::zeros(2 * n, 2 * n);
        for i in 0..2 * n {
            for j in i..2 * n {
                let v = self.hess[i][j].eval(z);
                hz[(i, j)] = v;
                hz[(j, i)] = v;
            }
        }
        let mut df = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..2 * n {
                df[(i, j)] = hz[(n + i, j)];
                df[(n + i, j)] = -hz[(i, j)];
            }
        }
        df
    }
}

pub(crate) fn symbolic(sys: &ControlSystem) -> Arc<Symbolic> {
    sys.caches.hamiltonian.call_once(|| Arc::new(Symbolic::build(sys))).clone()
}

/// `H = ½Σ⟨p, X_b⟩² + ⟨p, X₀⟩ + ½Q` over `(x1..xn, p1..pn)`.
pub fn hamiltonian(sys: &ControlSystem) -> Expr {
    symbolic(sys).h.clone()
}

pub fn energy(sys: &ControlSystem, lambda: &PhasePoint) -> f64 {
    symbolic(sys).h.eval(&lambda.state())
}

pub fn controls(sys: &ControlSystem, lambda: &PhasePoint) -> Vec<f64> {
    let z = lambda.state();
    symbolic(sys).controls.iter().map(|u| u.eval(&z)).collect()
}

fn check_input(sys: &ControlSystem, lambda: &PhasePoint) -> Result<()> {
    if lambda.n() != sys.n() {
        return Err(Error::Dimension(alloc::format!("covector has dimension {}, chart has {}", lambda.n(), sys.n())));
    }
    if !lambda.is_finite() {
        return Err(Error::NonFinite("initial covector"));
    }
    Ok(())
}

/// Integrate from `lambda` to each time in `times` (any order, any sign).
/// With `tangent = Some(Φ₀)` the linearised flow is carried along and
/// `Φ(t) = ∂z(t)/∂z(0) · Φ₀` is returned per time.
pub(crate) fn integrate_flow(
    sys: &ControlSystem,
    lambda: &PhasePoint,
    times: &[f64],
    tol: f64,
    tangent: Option<&Matrix>,
) -> Result<Vec<(PhasePoint, Option<Matrix>)>> {
    check_input(sys, lambda)?;
    let sym = symbolic(sys);
    let n = sys.n();
    let cols = tangent.map_or(0, |m| m.ncols());
    let dim = 2 * n + 2 * n * cols;

    let mut y0 = lambda.state();
    if let Some(m) = tangent {
        assert_eq!(m.nrows(), 2 * n, "tangent block must have 2n rows");
        y0.extend(m.iter().copied());
    }
    // The tangent block wants a very small absolute tolerance: its entries
    // vanish to high order at t = 0 and ρ is read off their ratios. On some
    // covectors an entry hovers near zero and stalls the controller, so the
    // tolerance is relaxed step by step until the integration goes through.
    let tols_for = |floor: f64| {
        let mut atol = vec![tol * 1e-3; 2 * n];
        atol.resize(dim, tol * floor);
        Tolerances { rtol: tol, atol, max_steps: 200_000 }
    };
    let floors: &[f64] = if cols > 0 { &[1e-15, 1e-12, 1e-9] } else { &[1e-15] };

    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        sym.field(&y[..2 * n], &mut dy[..2 * n]);
        if cols > 0 {
            let df = sym.field_jacobian(&y[..2 * n]);
            let phi = nalgebra::DMatrixView::from_slice(&y[2 * n..], 2 * n, cols);
            let dphi = &df * phi;
            dy[2 * n..].copy_from_slice(dphi.as_slice());
        }
    };

    let h0 = sym.h.eval(&y0[..2 * n]);
    let allowed = 1e-9 * (1.0 + h0.abs());
    let mut results: Vec<Option<(PhasePoint, Option<Matrix>)>> = vec![None; times.len()];
    for forward in [true, false] {
        let mut idx: Vec<usize> =
            (0..times.len()).filter(|&i| if forward { times[i] >= 0.0 } else { times[i] < 0.0 }).collect();
        if idx.is_empty() {
            continue;
        }
        idx.sort_by(|&a, &b| {
            let o = times[a].total_cmp(&times[b]);
            if forward {
                o
            } else {
                o.reverse()
            }
        });
        let stops: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
        let mut attempt = Err(Error::Precondition("no tolerance tried".into()));
        for &floor in floors {
            attempt = ode::integrate(rhs, 0.0, &y0, &stops, &tols_for(floor));
            if !matches!(attempt, Err(Error::Integration { .. })) {
                break;
            }
        }
        let states = attempt?;
        for (&i, y) in idx.iter().zip(states) {
            let drift = (sym.h.eval(&y[..2 * n]) - h0).abs();
            if drift > allowed {
                return Err(Error::EnergyDrift { drift, allowed });
            }
            let point = PhasePoint::from_state(n, &y);
            let phi = (cols > 0).then(|| Matrix::from_column_slice(2 * n, cols, &y[2 * n..]));
            results[i] = Some((point, phi));
        }
    }
    Ok(results.into_iter().map(|r| r.expect("every time integrated")).collect())
}

fn sample(sys: &ControlSystem, t: f64, point: PhasePoint, jv: Option<Matrix>) -> FlowSample {
    let controls = controls(sys, &point);
    let energy = energy(sys, &point);
    FlowSample { t, point, jv, controls, energy }
}

pub fn flow(sys: &ControlSystem, lambda: &PhasePoint, t: f64, tol: f64) -> Result<FlowSample> {
    Ok(flow_many(sys, lambda, &[t], tol)?.pop().expect("one sample"))
}

pub fn flow_many(sys: &ControlSystem, lambda: &PhasePoint, times: &[f64], tol: f64) -> Result<Vec<FlowSample>> {
    let raw = integrate_flow(sys, lambda, times, tol, None)?;
    Ok(times.iter().zip(raw).map(|(&t, (p, _))| sample(sys, t, p, None)).collect())
}

/// Flow samples carrying the vertical Jacobian.
pub fn flow_with_jacobian(sys: &ControlSystem, lambda: &PhasePoint, times: &[f64], tol: f64) -> Result<Vec<FlowSample>> {
    let n = sys.n();
    let mut init = Matrix::zeros(2 * n, n);
    for i in 0..n {
        init[(n + i, i)] = 1.0;
    }
    let raw = integrate_flow(sys, lambda, times, tol, Some(&init))?;
    Ok(times
        .iter()
        .zip(raw)
        .map(|(&t, (p, phi))| {
            let phi = phi.expect("tangent requested");
            sample(sys, t, p, Some(phi.rows(0, n).into_owned()))
        })
        .collect())
}

/// Full `2n × 2n` differential of the time-`t` flow map.
pub fn tangent_map(sys: &ControlSystem, lambda: &PhasePoint, t: f64, tol: f64) -> Result<Matrix> {
    let n = sys.n();
    let init = Matrix::identity(2 * n, 2 * n);
    let mut raw = integrate_flow(sys, lambda, &[t], tol, Some(&init))?;
    Ok(raw.pop().and_then(|(_, m)| m).expect("tangent requested"))
}

pub fn vertical_jacobian(sys: &ControlSystem, lambda: &PhasePoint, t: f64, tol: f64) -> Result<Matrix> {
    let mut s = flow_with_jacobian(sys, lambda, &[t], tol)?;
    Ok(s.pop().and_then(|s| s.jv).expect("jacobian requested"))
}

/// Projection of the flow: `x(t)` for the geodesic with initial covector
/// `p0` at `x0`.
pub fn exp_map(sys: &ControlSystem, x0: &[f64], p0: &[f64], t: f64, tol: f64) -> Result<Vec<f64>> {
    let lambda = PhasePoint::new(x0.to_vec(), p0.to_vec());
    Ok(flow(sys, &lambda, t, tol)?.point.x)
}

/// `r(t) = m(γ(t))·|det J_v(t)| / m(x₀)`.
pub fn volume_ratio(sys: &ControlSystem, lambda: &PhasePoint, t: f64, tol: f64) -> Result<f64> {
    Ok(volume_ratios(sys, lambda, &[t], tol)?[0])
}

pub fn volume_ratios(sys: &ControlSystem, lambda: &PhasePoint, times: &[f64], tol: f64) -> Result<Vec<f64>> {
    let m0 = sys.density_at(&lambda.x)?;
    flow_with_jacobian(sys, lambda, times, tol)?
        .into_iter()
        .map(|s| {
            let m = sys.density_at(&s.point.x)?;
            Ok(m * linalg::det(s.jv.as_ref().expect("jacobian")).abs() / m0)
        })
        .collect()
}
