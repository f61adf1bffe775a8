//! The volume function `g_λ(t)` and the invariant `ρ(λ) = ġ_λ(0)`.
//!
//! `e^{g}` is the volume of the parallelotope spanned by `ad_T^{i−1} X_a`
//! after projecting each level onto the orthogonal complement of the
//! previous ones, measured in the auxiliary inner product for which the
//! frame, completed by coordinate fields and normalised against the
//! density, is orthonormal. Level by level this is `det M_i = Π σ_l²` over
//! the non-zero singular values of the projected images.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::flag::{self, FlagOptions};
use crate::geometry::{self, ControlSystem, VectorField};
use crate::hamiltonian::{self, PhasePoint};
use crate::linalg::{self, Matrix, Vector};
use crate::math;

#[derive(Clone, Debug)]
pub struct RhoOptions {
    /// Central-difference step for `ġ`; one Richardson level halves it.
    pub step: f64,
    pub flag: FlagOptions,
    /// Geometric grid for the flow-based estimate.
    pub flow_window: (f64, f64),
    pub flow_samples: usize,
    /// Degree of the polynomial in `t`; terms above the linear one only
    /// absorb curvature.
    pub flow_degree: usize,
    /// Residual norm above which the flow fit is rejected.
    pub flow_max_residual: f64,
}

impl Default for RhoOptions {
    fn default() -> RhoOptions {
        RhoOptions {
            step: 1e-3,
            flag: FlagOptions::default(),
            flow_window: (1e-3, 1e-1),
            flow_samples: 24,
            flow_degree: 8,
            flow_max_residual: 1e-5,
        }
    }
}

/// The Gram determinants along one geodesic at one time.
#[derive(Clone, Debug)]
pub struct SymbolGram {
    pub t: f64,
    pub point: PhasePoint,
    pub growth: Vec<usize>,
    /// Coordinate directions completing the frame.
    pub complement: Vec<usize>,
    /// `det M_1, …, det M_m`. Individually these depend on the complement;
    /// only the product does not.
    pub dets: Vec<f64>,
    /// Orthonormal bases of `V_i` in auxiliary coordinates.
    pub levels: Vec<Matrix>,
}

impl SymbolGram {
    /// `g = ½ Σ log det M_i`.
    pub fn log_volume(&self) -> f64 {
        0.5 * self.dets.iter().map(|d| math::ln(*d)).sum::<f64>()
    }
}

/// Gram data at the base point of `lambda`, completing the frame with the
/// coordinate directions `complement`.
pub fn gram_at_point(sys: &ControlSystem, lambda: &PhasePoint, complement: &[usize], opts: &FlagOptions) -> Result<SymbolGram> {
    let f = flag::flag_at_point(sys, lambda, opts)?;
    if !f.ample {
        return Err(Error::NotAmple(f.growth));
    }
    let aux = geometry::aux_frame_at(sys, &lambda.x, complement)?;
    let n = sys.n();
    let mut below = Matrix::zeros(n, 0);
    let mut dets = Vec::with_capacity(f.growth.len());
    let mut levels = Vec::with_capacity(f.growth.len());
    for (i, &d) in f.increments.iter().enumerate() {
        let images = aux.coords(&f.level_vectors[i]);
        let projected = linalg::project_out(&below, &images);
        if d == 0 {
            dets.push(1.0);
            levels.push(Matrix::zeros(n, 0));
        } else {
            let s = linalg::singular_values(&projected);
            let scale = images.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
            if s.len() < d || !(s[d - 1] > 1e-10 * scale.max(1e-300)) {
                return Err(Error::RankDeficient(i + 1));
            }
            dets.push(s[..d].iter().map(|x| x * x).product());
            levels.push(linalg::dominant_basis(&projected, d));
        }
        let mut all = Matrix::zeros(n, below.ncols() + images.ncols());
        all.columns_mut(0, below.ncols()).copy_from(&below);
        all.columns_mut(below.ncols(), images.ncols()).copy_from(&images);
        below = linalg::dominant_basis(&all, f.growth[i]);
    }
    Ok(SymbolGram { t: 0.0, point: lambda.clone(), growth: f.growth, complement: complement.to_vec(), dets, levels })
}

/// Gram data at `γ(t)` for each time, all sharing the complement chosen
/// at the base point. Errors if the growth vector changes.
pub fn gram_many(sys: &ControlSystem, lambda0: &PhasePoint, times: &[f64], opts: &FlagOptions) -> Result<Vec<SymbolGram>> {
    let complement = geometry::choose_complement(sys, &lambda0.x)?;
    let base = flag::flag_at_point(sys, lambda0, opts)?;
    if !base.ample {
        return Err(Error::NotAmple(base.growth));
    }
    let samples = hamiltonian::flow_many(sys, lambda0, times, opts.tol)?;
    samples
        .into_iter()
        .map(|s| {
            let mut g = gram_at_point(sys, &s.point, &complement, opts)?;
            if g.growth != base.growth {
                return Err(Error::NotEquiregular);
            }
            g.t = s.t;
            Ok(g)
        })
        .collect()
}

pub fn gram_dets(sys: &ControlSystem, lambda0: &PhasePoint, t: f64, opts: &FlagOptions) -> Result<Vec<f64>> {
    Ok(gram_many(sys, lambda0, &[t], opts)?.pop().expect("one sample").dets)
}

/// `g(t) − g(0)` at each time.
pub fn g_rel_many(sys: &ControlSystem, lambda0: &PhasePoint, times: &[f64], opts: &FlagOptions) -> Result<Vec<f64>> {
    let mut all = vec![0.0];
    all.extend_from_slice(times);
    let g: Vec<f64> = gram_many(sys, lambda0, &all, opts)?.iter().map(SymbolGram::log_volume).collect();
    Ok(g[1..].iter().map(|v| v - g[0]).collect())
}

pub fn g_rel(sys: &ControlSystem, lambda0: &PhasePoint, t: f64, opts: &FlagOptions) -> Result<f64> {
    Ok(g_rel_many(sys, lambda0, &[t], opts)?[0])
}

/// `ġ(0)` by central differences at `h` and `h/2` with one Richardson step.
pub fn rho(sys: &ControlSystem, lambda0: &PhasePoint, opts: &RhoOptions) -> Result<f64> {
    let h = opts.step;
    let g = g_rel_many(sys, lambda0, &[-h, h, -h / 2.0, h / 2.0], &opts.flag)?;
    let d1 = (g[1] - g[0]) / (2.0 * h);
    let d2 = (g[3] - g[2]) / h;
    let r = (4.0 * d2 - d1) / 3.0;
    if !r.is_finite() {
        return Err(Error::NonFinite("difference quotient of g"));
    }
    Ok(r)
}

/// `ρ(λ(t))`, re-basing the computation at the flowed covector.
pub fn rho_along(sys: &ControlSystem, lambda0: &PhasePoint, t: f64, opts: &RhoOptions) -> Result<f64> {
    let at = if t == 0.0 { lambda0.clone() } else { hamiltonian::flow(sys, lambda0, t, opts.flag.tol)?.point };
    rho(sys, &at, opts)
}

/// Least-squares fit of `log r(t) − 𝒩 log t` by a polynomial in `t`.
#[derive(Clone, Debug)]
pub struct RhoFlowFit {
    pub rho: f64,
    pub log_c: f64,
    /// Coefficients of `t², t³, …`.
    pub nuisance: Vec<f64>,
    pub residual: f64,
    pub geodesic_dimension: usize,
    pub window: (f64, f64),
    pub samples: usize,
}

pub fn geometric_grid(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let samples = samples.max(2);
    let (a, b) = (math::ln(lo), math::ln(hi));
    (0..samples).map(|i| math::exp(a + (b - a) * i as f64 / (samples - 1) as f64)).collect()
}

/// Polynomial least squares `y ≈ Σ_j c_j t^j`, returning the coefficients
/// and the residual norm.
pub fn poly_fit(ts: &[f64], ys: &[f64], degree: usize, skip_linear: bool) -> Result<(Vec<f64>, f64)> {
    let powers: Vec<usize> = (0..=degree).filter(|&j| !(skip_linear && j == 1)).collect();
    let a = Matrix::from_fn(ts.len(), powers.len(), |i, j| math::powi(ts[i], powers[j] as i32));
    let b = Vector::from_column_slice(ys);
    let x = linalg::least_squares(&a, &b).ok_or_else(|| Error::Fit("singular design matrix".into()))?;
    let residual = (&a * &x - &b).norm();
    let mut coeffs = vec![0.0; degree + 1];
    for (j, &p) in powers.iter().enumerate() {
        coeffs[p] = x[j];
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("fit coefficients"));
    }
    Ok((coeffs, residual))
}

/// Independent estimate of `ρ` from the pulled-back volume alone.
pub fn rho_flow(sys: &ControlSystem, lambda0: &PhasePoint, opts: &RhoOptions) -> Result<RhoFlowFit> {
    let f = flag::flag_at_point(sys, lambda0, &opts.flag)?;
    if !f.ample {
        return Err(Error::NotAmple(f.growth));
    }
    let nn = f.geodesic_dimension();
    let (lo, hi) = opts.flow_window;
    let ts = geometric_grid(lo, hi, opts.flow_samples);
    let r = hamiltonian::volume_ratios(sys, lambda0, &ts, opts.flag.tol)?;
    let ys: Vec<f64> = ts.iter().zip(&r).map(|(t, r)| math::ln(*r) - nn as f64 * math::ln(*t)).collect();
    let (c, residual) = poly_fit(&ts, &ys, opts.flow_degree.max(2), false)?;
    if residual > opts.flow_max_residual {
        return Err(Error::Fit(format!("flow-based fit residual {residual:e} exceeds {:e}", opts.flow_max_residual)));
    }
    Ok(RhoFlowFit {
        rho: c[1],
        log_c: c[0],
        nuisance: c[2..].to_vec(),
        residual,
        geodesic_dimension: nn,
        window: opts.flow_window,
        samples: ts.len(),
    })
}

/// Outcome of the fiber-dilation checks at one factor `c`.
#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub c: f64,
    pub rho: f64,
    pub rho_scaled: f64,
    /// `|ρ(cλ) − cρ(λ)| / max(1, |cρ(λ)|, |ρ(cλ)|)`.
    pub rho_error: f64,
    /// `(t, g_{cλ}(t) − g_{cλ}(0), g_λ(ct) − g_λ(0))`.
    pub g_pairs: Vec<(f64, f64, f64)>,
    pub g_error: f64,
    pub rho_tol: f64,
    pub g_tol: f64,
    pub passed: bool,
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// `ρ(cλ) = cρ(λ)` and `g_{cλ}(t) − g_{cλ}(0) = g_λ(ct) − g_λ(0)` for
/// `t` in `times`. Needs no drift and no potential.
pub fn scaling_checks(sys: &ControlSystem, lambda0: &PhasePoint, c: f64, times: &[f64], opts: &RhoOptions) -> Result<ScalingReport> {
    if !sys.is_sub_riemannian() {
        return Err(Error::Precondition("dilation laws need zero drift and zero potential".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Precondition(format!("dilation factor {c} must be positive")));
    }
    let scaled = lambda0.scaled(c);
    let rho = self::rho(sys, lambda0, opts)?;
    let rho_scaled = self::rho(sys, &scaled, opts)?;
    let lhs = g_rel_many(sys, &scaled, times, &opts.flag)?;
    let stretched: Vec<f64> = times.iter().map(|t| c * t).collect();
    let rhs = g_rel_many(sys, lambda0, &stretched, &opts.flag)?;
    let g_pairs: Vec<(f64, f64, f64)> = times.iter().zip(lhs.iter().zip(&rhs)).map(|(&t, (&a, &b))| (t, a, b)).collect();
    let g_error = g_pairs.iter().map(|&(_, a, b)| rel_gap(a, b)).fold(0.0, f64::max);
    let rho_error = rel_gap(rho_scaled, c * rho);
    let (rho_tol, g_tol) = (1e-6, 1e-5);
    Ok(ScalingReport {
        c,
        rho,
        rho_scaled,
        rho_error,
        g_pairs,
        g_error,
        rho_tol,
        g_tol,
        passed: rho_error <= rho_tol && g_error <= g_tol,
    })
}

/// Both divergences of the extension `Σ u_a X_a` at the base point.
#[derive(Clone, Debug)]
pub struct DivergenceReport {
    pub div_mu: f64,
    pub div_riemannian: f64,
    pub difference: f64,
    pub rho: f64,
    pub error: f64,
    pub passed: bool,
}

/// Symbolic determinant by cofactor expansion along the first row.
fn det_expr(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut terms = Vec::with_capacity(n);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Expr>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, e)| e.clone()).collect()).collect();
        let term = &m[0][j] * &det_expr(&minor);
        terms.push(if j % 2 == 0 { term } else { -term });
    }
    Expr::sum(terms).simplify()
}

fn divergence(f: &VectorField, log_density: &Expr) -> Expr {
    let n = f.dim();
    let flux = Expr::sum((0..n).map(|i| f.component(i).diff(i)));
    (flux + f.apply(log_density)).simplify()
}

/// `div_μ f − div_{vol_g} f` at `x₀` against `ρ` (k = n only).
pub fn riemannian_divergence_check(sys: &ControlSystem, lambda0: &PhasePoint, opts: &RhoOptions) -> Result<DivergenceReport> {
    let (n, k) = (sys.n(), sys.k());
    if k != n {
        return Err(Error::NotRiemannian { n, k });
    }
    let u = hamiltonian::controls(sys, lambda0);
    let mut f = sys.drift().clone();
    for (a, xa) in sys.frame().iter().enumerate() {
        f = f.add(&xa.scaled(&Expr::constant(u[a])));
    }
    // vol_g has density 1/|det F|, so log vol = −½ log det².
    let rows: Vec<Vec<Expr>> = (0..n).map(|i| sys.frame().iter().map(|x| x.component(i).clone()).collect()).collect();
    let det = det_expr(&rows);
    let log_vol = (-(Expr::constant(0.5)) * (&det * &det).ln()).simplify();
    let log_mu = sys.density().ln().simplify();
    let div_mu = divergence(&f, &log_mu).eval(&lambda0.x);
    let div_riemannian = divergence(&f, &log_vol).eval(&lambda0.x);
    let difference = div_mu - div_riemannian;
    let rho = self::rho(sys, lambda0, opts)?;
    let error = (difference - rho).abs();
    Ok(DivergenceReport { div_mu, div_riemannian, difference, rho, error, passed: error <= 1e-5 })
}

/// Contact data at a point: the operator `J` on the frame, normalised so
/// that `Σ_{i<j} dω(X_i, X_j)² = 1`, and the Popp density.
#[derive(Clone, Debug)]
pub struct ContactData {
    pub j: Matrix,
    pub popp_density: f64,
}

pub fn contact_data(sys: &ControlSystem, x: &[f64]) -> Result<ContactData> {
    let (n, k) = (sys.n(), sys.k());
    if k + 1 != n || k % 2 != 0 {
        return Err(Error::NotContact("needs corank one and even rank"));
    }
    sys.check_frame(x)?;
    let frame = sys.frame_matrix(x);
    // ω spans the annihilator of the frame.
    let omega = cofactor_normal(&frame);
    let mut j = Matrix::zeros(k, k);
    for a in 0..k {
        for b in (a + 1)..k {
            let br = sys.bracket_word(&[a + 1, b + 1]).eval(x);
            let v = -omega.dot(&br);
            j[(a, b)] = v;
            j[(b, a)] = -v;
        }
    }
    let scale = math::sqrt(j.iter().map(|v| v * v).sum::<f64>() / 2.0);
    if !(scale > 1e-12) {
        return Err(Error::NotContact("brackets of the frame stay inside the distribution"));
    }
    let j = j / scale;
    if linalg::det(&j).abs() < 1e-10 {
        return Err(Error::NotContact("dω is degenerate on the distribution"));
    }
    let omega = omega / scale;
    let reeb_like = &omega / omega.norm_squared();
    let mut full = Matrix::zeros(n, n);
    full.columns_mut(0, k).copy_from(&frame);
    full.set_column(k, &reeb_like);
    Ok(ContactData { j, popp_density: 1.0 / linalg::det(&full).abs() })
}

fn cofactor_normal(frame: &Matrix) -> Vector {
    let n = frame.nrows();
    Vector::from_fn(n, |i, _| {
        let minor = frame.clone().remove_row(i);
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        s * linalg::det(&minor)
    })
}

/// `‖Jγ̇‖` at the point of `lambda`.
pub fn contact_norm(sys: &ControlSystem, lambda: &PhasePoint) -> Result<f64> {
    let data = contact_data(sys, &lambda.x)?;
    let u = Vector::from_vec(hamiltonian::controls(sys, lambda));
    Ok((&data.j * u).norm())
}

/// One row of the contact comparison.
#[derive(Clone, Debug)]
pub struct ContactSample {
    pub t: f64,
    pub g_rel: f64,
    /// `log(‖Jγ̇(t)‖/‖Jγ̇(0)‖)` corrected by the density against Popp.
    pub oracle: f64,
}

pub fn contact_check(sys: &ControlSystem, lambda0: &PhasePoint, times: &[f64], opts: &FlagOptions) -> Result<Vec<ContactSample>> {
    let g = g_rel_many(sys, lambda0, times, opts)?;
    let log_weight = |point: &PhasePoint| -> Result<f64> {
        let data = contact_data(sys, &point.x)?;
        let m = sys.density_at(&point.x)?;
        let u = Vector::from_vec(hamiltonian::controls(sys, point));
        Ok(math::ln((&data.j * u).norm()) + math::ln(m / data.popp_density))
    };
    let w0 = log_weight(lambda0)?;
    let pts = hamiltonian::flow_many(sys, lambda0, times, opts.tol)?;
    pts.iter()
        .zip(g)
        .map(|(s, g_rel)| Ok(ContactSample { t: s.t, g_rel, oracle: log_weight(&s.point)? - w0 }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;

    fn unit(sys: &ControlSystem, x: Vec<f64>, p: Vec<f64>) -> PhasePoint {
        let l = PhasePoint::new(x, p);
        let h = hamiltonian::energy(sys, &l);
        l.scaled(1.0 / math::sqrt(2.0 * h))
    }

    #[test]
    fn riemannian_gram_is_the_weight() {
        let sys = builtin("euclidean:2:psi=0.3*x1-0.7*x2").unwrap();
        let l = PhasePoint::new(vec![0.2, 0.1], vec![0.6, 0.8]);
        let g = gram_many(&sys, &l, &[0.0], &FlagOptions::default()).unwrap();
        assert_eq!(g[0].dets.len(), 1);
        assert!((g[0].log_volume() - (0.3 * 0.2 - 0.7 * 0.1)).abs() < 1e-12);
        let expected = 0.3 * 0.6 - 0.7 * 0.8;
        assert!((g_rel(&sys, &l, 0.4, &FlagOptions::default()).unwrap() - 0.4 * expected).abs() < 1e-10);
        assert!((rho(&sys, &l, &RhoOptions::default()).unwrap() - expected).abs() < 1e-8);
        let d = riemannian_divergence_check(&sys, &l, &RhoOptions::default()).unwrap();
        assert!(d.passed && (d.difference - expected).abs() < 1e-12, "{d:?}");
    }

    #[test]
    fn heisenberg_volume_is_constant() {
        let sys = builtin("heisenberg3").unwrap();
        let l = unit(&sys, vec![0.0; 3], vec![0.3, -0.9, 1.7]);
        let g = gram_many(&sys, &l, &[0.0, 0.5], &FlagOptions::default()).unwrap();
        for s in &g {
            assert!((s.dets.iter().product::<f64>() - 1.0).abs() < 1e-9, "{:?}", s.dets);
        }
        assert!(rho(&sys, &l, &RhoOptions::default()).unwrap().abs() < 1e-8);
    }

    #[test]
    fn both_rho_paths_agree_with_a_weight() {
        let sys = builtin("heisenberg3").unwrap().with_density(crate::expr::parse("exp(x1+2*x3)", &["x1", "x2", "x3"]).unwrap()).unwrap();
        let l = unit(&sys, vec![0.1, 0.0, -0.2], vec![0.5, 0.4, 0.9]);
        let a = rho(&sys, &l, &RhoOptions::default()).unwrap();
        let b = rho_flow(&sys, &l, &RhoOptions::default()).unwrap();
        assert!((a - b.rho).abs() < 1e-5, "{a} vs {b:?}");
        assert!(a.abs() > 0.1);
    }

    #[test]
    fn contact_oracle_with_weight() {
        let sys = builtin("heisenberg5:1,2").unwrap();
        let sys = sys.with_density(crate::expr::parse("exp(x3)", &["x1", "x2", "x3", "x4", "x5"]).unwrap()).unwrap();
        let l = unit(&sys, vec![0.0; 5], vec![0.5, -0.3, 0.8, 0.1, 1.1]);
        for s in contact_check(&sys, &l, &[0.1, 0.3], &FlagOptions::default()).unwrap() {
            assert!((s.g_rel - s.oracle).abs() < 1e-6, "{s:?}");
            assert!(s.g_rel.abs() > 1e-3);
        }
    }

    #[test]
    fn contact_rejects_engel() {
        assert!(matches!(contact_data(&builtin("engel").unwrap(), &[0.0; 4]), Err(Error::NotContact(_))));
    }

    #[test]
    fn grids_and_fits() {
        let g = geometric_grid(1e-3, 1e-1, 3);
        assert!((g[1] - 1e-2).abs() < 1e-15);
        let ts = [0.1, 0.2, 0.3, 0.5];
        let ys: Vec<f64> = ts.iter().map(|t| 1.0 + 2.0 * t * t).collect();
        let (c, r) = poly_fit(&ts, &ys, 2, true).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && c[1] == 0.0 && (c[2] - 2.0).abs() < 1e-12 && r < 1e-12);
    }
}
