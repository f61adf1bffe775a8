//! Geodesic flag, growth vector, Young diagram and the leading constant.
//!
//! The admissible extension of `γ̇` near `γ(t*)` is
//! `T = X₀ + Σ_b û_b(ℓ(x)) X_b` with `ℓ(x) = ⟨w, x − γ(t*)⟩`. The
//! polynomials `û_b` are chosen so that `T` agrees with `γ̇` along the curve
//! to the requested order: if `s(τ) = ℓ(γ(t*+τ))` then `û_b = u_b ∘ s⁻¹`
//! as truncated series. Brackets `ad_T^j X_a` are built once per system
//! with `γ(t*)`, `w` and the coefficients of `û_b` as extra symbolic
//! parameters, then evaluated numerically.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use spin::Mutex;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::expr::Expr;
use crate::geometry::{ControlSystem, VectorField};
use crate::hamiltonian::{self, PhasePoint, DEFAULT_TOL};
use crate::linalg::{self, Matrix};
use crate::series;

/// How the level function `ℓ` of the extension is oriented.
#[derive(Clone, Debug, PartialEq)]
pub enum TimeFunction {
    /// `w = γ̇(t*)`.
    Tangent,
    /// Any `w` with `⟨w, γ̇(t*)⟩ ≠ 0`.
    Direction(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct FlagOptions {
    pub rank_tol: f64,
    /// Taylor order of the extension; defaults to the chart dimension.
    pub order: Option<usize>,
    pub time_function: TimeFunction,
    /// Integration tolerance used when flowing to `t*`.
    pub tol: f64,
}

impl Default for FlagOptions {
    fn default() -> FlagOptions {
        FlagOptions { rank_tol: 1e-9, order: None, time_function: TimeFunction::Tangent, tol: DEFAULT_TOL }
    }
}

/// Derivatives `D^s f` along the Hamiltonian vector field of the base
/// functions `x_1..x_n, u_1..u_k`.
pub(crate) struct JetCache {
    levels: Mutex<Vec<Vec<Expr>>>,
}

impl JetCache {
    fn upto(&self, sys: &ControlSystem, order: usize) -> Vec<Vec<Expr>> {
        let mut levels = self.levels.lock();
        if levels.is_empty() {
            let sym = hamiltonian::symbolic(sys);
            let mut base: Vec<Expr> = (0..sys.n()).map(Expr::var).collect();
            base.extend(sym.controls.iter().cloned());
            levels.push(base);
        }
        while levels.len() <= order {
            let sym = hamiltonian::symbolic(sys);
            let n = sys.n();
            let next = levels
                .last()
                .expect("base level")
                .iter()
                .map(|f| {
                    Expr::sum((0..n).map(|i| f.diff(i) * &sym.grad[n + i] - f.diff(n + i) * &sym.grad[i])).simplify()
                })
                .collect();
            levels.push(next);
        }
        levels[..=order].to_vec()
    }
}

fn jet_cache(sys: &ControlSystem) -> Arc<JetCache> {
    let mut slot = sys.caches.jets.lock();
    slot.get_or_insert_with(|| Arc::new(JetCache { levels: Mutex::new(Vec::new()) })).clone()
}

/// `[D^s x_i, D^s u_b]` at `lambda` for `s = 0..=order`.
pub fn jet_values(sys: &ControlSystem, lambda: &PhasePoint, order: usize) -> Vec<Vec<f64>> {
    let z = lambda.state();
    jet_cache(sys).upto(sys, order).iter().map(|lvl| lvl.iter().map(|e| e.eval(&z)).collect()).collect()
}

/// Parametric extension and its iterated brackets with the frame.
///
/// Variables: `x` at `0..n`, `w` at `n..2n`, and `y_{b,s}` standing for
/// `û_b^{(s)}(ℓ(x))` at `2n + b(K+2) + s` for `s = 0..=K+1`. The chain rule
/// `∂_i y_{b,s} = y_{b,s+1} w_i` is applied by hand, so powers of `ℓ` are
/// never expanded. `y_{b,K+1}` is evaluated as zero.
pub(crate) struct ExtensionLevels {
    n: usize,
    order: usize,
    field: VectorField,
    levels: Mutex<Vec<Vec<VectorField>>>,
}

impl ExtensionLevels {
    fn build(sys: &ControlSystem, order: usize) -> ExtensionLevels {
        let n = sys.n();
        let mut field = sys.drift().clone();
        for (b, xb) in sys.frame().iter().enumerate() {
            field = field.add(&xb.scaled(&Expr::var(2 * n + b * (order + 2))));
        }
        let field = field.simplify();
        ExtensionLevels { n, order, field, levels: Mutex::new(vec![sys.frame().to_vec()]) }
    }

    /// Total derivative along `x_i`.
    fn d(&self, f: &Expr, i: usize) -> Expr {
        let n = self.n;
        let stride = self.order + 2;
        let mut terms = vec![f.diff(i)];
        let max_var = f.arity();
        let mut v = 2 * n;
        while v < max_var {
            let s = (v - 2 * n) % stride;
            if s + 1 < stride && f.depends_on(v) {
                terms.push(f.diff(v) * Expr::var(v + 1) * Expr::var(n + i));
            }
            v += 1;
        }
        Expr::sum(terms)
    }

    fn bracket(&self, v: &VectorField, w: &VectorField) -> VectorField {
        let n = self.n;
        let comps = (0..n)
            .map(|j| {
                let a = Expr::sum((0..n).map(|i| v.component(i) * &self.d(w.component(j), i)));
                let b = Expr::sum((0..n).map(|i| w.component(i) * &self.d(v.component(j), i)));
                (a - b).simplify()
            })
            .collect();
        VectorField::new(comps)
    }

    fn level(&self, j: usize) -> Vec<VectorField> {
        let mut levels = self.levels.lock();
        while levels.len() <= j {
            let next = levels.last().expect("frame level").iter().map(|x| self.bracket(&self.field, x)).collect();
            levels.push(next);
        }
        levels[j].clone()
    }
}

fn extension_levels(sys: &ControlSystem, order: usize) -> Arc<ExtensionLevels> {
    let mut map = sys.caches.extensions.lock();
    map.entry(order).or_insert_with(|| Arc::new(ExtensionLevels::build(sys, order))).clone()
}

/// Build the symbolic caches needed for flags of the given Taylor order up
/// to bracket depth `depth`, so later parallel work only reads them.
pub fn warm_caches(sys: &ControlSystem, order: usize, depth: usize) {
    let _ = hamiltonian::symbolic(sys);
    let _ = jet_cache(sys).upto(sys, order);
    if sys.k() < sys.n() {
        let _ = extension_levels(sys, order).level(depth);
    }
}

/// A concrete admissible extension at `γ(t*)`.
#[derive(Clone, Debug)]
pub struct Extension {
    pub base: PhasePoint,
    pub order: usize,
    pub velocity: Vec<f64>,
    pub w: Vec<f64>,
    /// `coeffs[b][s]`: coefficient of `ℓ^s` in `û_b`.
    pub coeffs: Vec<Vec<f64>>,
}

impl Extension {
    /// Values in the layout of the parametric extension, at the base point.
    fn values(&self) -> Vec<f64> {
        let mut v = self.base.x.clone();
        v.extend_from_slice(&self.w);
        for c in &self.coeffs {
            let mut fact = 1.0;
            for s in 0..=self.order {
                if s > 0 {
                    fact *= s as f64;
                }
                v.push(c.get(s).copied().unwrap_or(0.0) * fact);
            }
            v.push(0.0);
        }
        v
    }

    fn ell(&self) -> Expr {
        Expr::sum(self.w.iter().enumerate().map(|(i, &wi)| Expr::constant(wi) * (Expr::var(i) - Expr::constant(self.base.x[i]))))
    }

    /// The extension as an ordinary vector field over the chart.
    pub fn field(&self, sys: &ControlSystem) -> VectorField {
        let ell = self.ell();
        let mut field = sys.drift().clone();
        for (b, xb) in sys.frame().iter().enumerate() {
            let coef = Expr::sum(self.coeffs[b].iter().enumerate().map(|(s, &c)| Expr::constant(c) * ell.powi(s as i32)));
            field = field.add(&xb.scaled(&coef));
        }
        field.simplify()
    }

    /// `T(x)` evaluated numerically.
    pub fn eval(&self, sys: &ControlSystem, x: &[f64]) -> Vec<f64> {
        let ell: f64 = self.w.iter().zip(x.iter().zip(&self.base.x)).map(|(w, (a, b))| w * (a - b)).sum();
        let mut out: Vec<f64> = sys.drift().eval(x).iter().copied().collect();
        for (b, xb) in sys.frame().iter().enumerate() {
            let u = series::eval(&self.coeffs[b], ell);
            for (o, v) in out.iter_mut().zip(xb.eval(x).iter()) {
                *o += u * v;
            }
        }
        out
    }

    /// `ad_T^j X_a` at the base point, as the columns of an `n × k` matrix.
    pub fn level_vectors(&self, sys: &ControlSystem, j: usize) -> Matrix {
        let vals = self.values();
        let lvl = extension_levels(sys, self.order).level(j);
        let mut m = Matrix::zeros(sys.n(), sys.k());
        for (a, f) in lvl.iter().enumerate() {
            m.set_column(a, &f.eval(&vals));
        }
        m
    }
}

/// Extension of `γ̇` at `lambda` (taken as `γ(t*)`).
pub fn extension_at(sys: &ControlSystem, lambda: &PhasePoint, order: usize, time: &TimeFunction) -> Result<Extension> {
    let (n, k) = (sys.n(), sys.k());
    let jets = jet_values(sys, lambda, order.max(1));
    let velocity: Vec<f64> = jets[1][..n].to_vec();
    let vnorm = linalg::norm(&velocity);
    if !(vnorm > 1e-14) {
        return Err(Error::ZeroTangent);
    }
    let w = match time {
        TimeFunction::Tangent => velocity.clone(),
        TimeFunction::Direction(d) => {
            if d.len() != n {
                return Err(Error::Dimension("time-function direction has wrong length".into()));
            }
            d.clone()
        }
    };
    let mut fact = 1.0;
    let mut s = vec![0.0; order + 1];
    let mut u = vec![vec![0.0; order + 1]; k];
    for m in 0..=order {
        if m > 0 {
            fact *= m as f64;
        }
        if m > 0 {
            s[m] = (0..n).map(|i| w[i] * jets[m][i]).sum::<f64>() / fact;
        }
        for (b, ub) in u.iter_mut().enumerate() {
            ub[m] = jets[m][n + b] / fact;
        }
    }
    let coeffs = if order == 0 {
        u.iter().map(|ub| vec![ub[0]]).collect()
    } else {
        if !(s[1].abs() > 1e-12 * linalg::norm(&w) * vnorm) {
            return Err(Error::ZeroTangent);
        }
        let tau = series::revert(&s, order).ok_or(Error::ZeroTangent)?;
        u.iter().map(|ub| series::compose(ub, &tau, order)).collect()
    };
    Ok(Extension { base: lambda.clone(), order, velocity, w, coeffs })
}

/// Extension at `γ(t*)` for the geodesic starting at `lambda0`.
pub fn admissible_extension(
    sys: &ControlSystem,
    lambda0: &PhasePoint,
    t_star: f64,
    order: usize,
) -> Result<VectorField> {
    let at = hamiltonian::flow(sys, lambda0, t_star, DEFAULT_TOL)?.point;
    Ok(extension_at(sys, &at, order, &TimeFunction::Tangent)?.field(sys))
}

#[derive(Clone, Debug)]
pub struct GeodesicFlag {
    pub point: PhasePoint,
    /// Orthonormal basis of `𝔉^i` (coordinates), `i = 1..`.
    pub bases: Vec<Matrix>,
    pub growth: Vec<usize>,
    pub increments: Vec<usize>,
    pub ample: bool,
    /// Growth vectors at `rank_tol × {0.1, 1, 10}`.
    pub decades: [Vec<usize>; 3],
    /// `ad_T^j X_a` at the point for each computed level.
    pub level_vectors: Vec<Matrix>,
    pub extension: Option<Extension>,
}

impl GeodesicFlag {
    pub fn steps(&self) -> usize {
        self.growth.len()
    }

    /// `Σ (2i − 1) d_i`.
    pub fn geodesic_dimension(&self) -> usize {
        geodesic_dimension(&self.increments)
    }

    /// `Σ i d_i`.
    pub fn homogeneous_weight(&self) -> usize {
        homogeneous_weight(&self.increments)
    }

    /// `d_1 ≥ d_2 ≥ …`.
    pub fn increments_decrease(&self) -> bool {
        self.increments.windows(2).all(|w| w[0] >= w[1])
    }
}

pub fn increments_of(growth: &[usize]) -> Vec<usize> {
    let mut prev = 0;
    growth
        .iter()
        .map(|&g| {
            let d = g - prev;
            prev = g;
            d
        })
        .collect()
}

pub fn geodesic_dimension(increments: &[usize]) -> usize {
    increments.iter().enumerate().map(|(i, d)| (2 * i + 1) * d).sum()
}

pub fn homogeneous_weight(increments: &[usize]) -> usize {
    increments.iter().enumerate().map(|(i, d)| (i + 1) * d).sum()
}

struct Accumulated {
    growth: Vec<usize>,
    bases: Vec<Matrix>,
}

fn accumulate(n: usize, get: &mut dyn FnMut(usize) -> Result<Matrix>, rank_tol: f64, drop: f64) -> Result<Accumulated> {
    let mut basis = Matrix::zeros(n, 0);
    let mut growth = Vec::new();
    let mut bases = Vec::new();
    let mut stalled = 0;
    for j in 0..n {
        let raw = get(j)?;
        let cols: Vec<_> = raw.column_iter().filter(|c| c.norm() > drop).map(|c| c / c.norm()).collect();
        let mut added = 0;
        if !cols.is_empty() {
            let v = Matrix::from_columns(&cols);
            let smax = linalg::singular_values(&v)[0];
            let r = linalg::project_out(&basis, &v);
            let s = linalg::singular_values(&r);
            added = s.iter().filter(|&&x| x > rank_tol * smax).count();
            added = added.min(n - basis.ncols());
            if added > 0 {
                let extra = linalg::dominant_basis(&r, added);
                let mut next = Matrix::zeros(n, basis.ncols() + added);
                next.columns_mut(0, basis.ncols()).copy_from(&basis);
                next.columns_mut(basis.ncols(), added).copy_from(&extra);
                basis = next;
            }
        }
        growth.push(basis.ncols());
        bases.push(basis.clone());
        if basis.ncols() == n {
            break;
        }
        stalled = if added == 0 { stalled + 1 } else { 0 };
        if stalled == 2 {
            break;
        }
    }
    Ok(Accumulated { growth, bases })
}

/// Flag at the base point of `lambda`.
pub fn flag_at_point(sys: &ControlSystem, lambda: &PhasePoint, opts: &FlagOptions) -> Result<GeodesicFlag> {
    let (n, k) = (sys.n(), sys.k());
    if lambda.n() != n {
        return Err(Error::Dimension("covector dimension differs from the chart".into()));
    }
    sys.check_frame(&lambda.x)?;
    let frame = sys.frame_matrix(&lambda.x);
    let scale = frame.column_iter().map(|c| c.norm()).fold(1.0, f64::max);
    let drop = 1e-13 * scale;
    let extension =
        if k < n { Some(extension_at(sys, lambda, opts.order.unwrap_or(n), &opts.time_function)?) } else { None };

    let mut cache: Vec<Matrix> = vec![frame];
    let mut get = |j: usize| -> Result<Matrix> {
        while cache.len() <= j {
            let ext = extension.as_ref().expect("brackets needed only when k < n");
            let m = ext.level_vectors(sys, cache.len());
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("bracket evaluation"));
            }
            cache.push(m);
        }
        Ok(cache[j].clone())
    };
    let main = accumulate(n, &mut get, opts.rank_tol, drop)?;
    let lo = accumulate(n, &mut get, opts.rank_tol * 0.1, drop)?;
    let hi = accumulate(n, &mut get, opts.rank_tol * 10.0, drop)?;
    if lo.growth != main.growth || hi.growth != main.growth {
        return Err(Error::IllConditioned(vec![lo.growth, main.growth, hi.growth]));
    }
    let ample = main.growth.last() == Some(&n);
    let increments = increments_of(&main.growth);
    let level_vectors = (0..main.growth.len()).map(|j| get(j)).collect::<Result<Vec<_>>>()?;
    Ok(GeodesicFlag {
        point: lambda.clone(),
        bases: main.bases,
        increments,
        ample,
        decades: [lo.growth, main.growth.clone(), hi.growth],
        growth: main.growth,
        level_vectors,
        extension,
    })
}

/// Flag at `γ(t*)` of the geodesic with initial covector `lambda0`.
pub fn flag_at(sys: &ControlSystem, lambda0: &PhasePoint, t_star: f64, opts: &FlagOptions) -> Result<GeodesicFlag> {
    let at = if t_star == 0.0 { lambda0.clone() } else { hamiltonian::flow(sys, lambda0, t_star, opts.tol)?.point };
    flag_at_point(sys, &at, opts)
}

#[derive(Clone, Debug)]
pub struct Equiregularity {
    pub equiregular: bool,
    pub times: Vec<f64>,
    pub growths: Vec<Vec<usize>>,
}

/// Compare growth vectors at `samples` equally spaced times on `[0, window]`.
pub fn equiregular_on(
    sys: &ControlSystem,
    lambda0: &PhasePoint,
    window: f64,
    samples: usize,
    opts: &FlagOptions,
) -> Result<Equiregularity> {
    let samples = samples.max(2);
    let times: Vec<f64> = (0..samples).map(|s| window * s as f64 / (samples - 1) as f64).collect();
    let points = hamiltonian::flow_many(sys, lambda0, &times, opts.tol)?;
    let growths =
        points.iter().map(|s| flag_at_point(sys, &s.point, opts).map(|f| f.growth)).collect::<Result<Vec<_>>>()?;
    let equiregular = growths.windows(2).all(|w| w[0] == w[1]);
    Ok(Equiregularity { equiregular, times, growths })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YoungDiagram {
    /// Row lengths, longest first.
    pub rows: Vec<usize>,
    /// Column heights `d_1, d_2, …`.
    pub columns: Vec<usize>,
}

impl YoungDiagram {
    pub fn from_columns(columns: &[usize]) -> YoungDiagram {
        let height = columns.iter().copied().max().unwrap_or(0);
        let rows = (1..=height).map(|a| columns.iter().filter(|&&d| d >= a).count()).collect();
        YoungDiagram { rows, columns: columns.to_vec() }
    }

    pub fn size(&self) -> usize {
        self.rows.iter().sum()
    }
}

pub fn young_diagram(flag: &GeodesicFlag) -> Result<YoungDiagram> {
    if !flag.ample {
        return Err(Error::NotAmple(flag.growth.clone()));
    }
    Ok(YoungDiagram::from_columns(&flag.increments))
}

/// `C = Π_a Π_{j<n_a} j! / Π_{j=n_a}^{2n_a−1} j!`.
pub fn leading_constant(y: &YoungDiagram) -> Rational {
    exact::leading_constant_exact(&y.rows)
}
