//! Small-time expansion of the pulled-back volume.
//!
//! The fitted quantity is the ratio measured against the fiber volume
//! dual to the canonical frame at `t = 0`,
//! `r̂(t) = r(t)·m(x₀)² / e^{2g(0)}` with `r = m(γ)|det J_v|/m(x₀)`,
//! for which `r̂ = C_λ t^𝒩 e^{g(t)−g(0)}(1 − t² tr ℛ/6 + o(t²))`.
//! With an orthonormal frame and Lebesgue density the two ratios agree.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::flag::{self, YoungDiagram};
use crate::geometry::{self, ControlSystem};
use crate::hamiltonian::{self, PhasePoint};
use crate::math;
use crate::rho::{self, RhoOptions};

#[derive(Clone, Debug)]
pub struct ExpansionOptions {
    pub window: (f64, f64),
    pub samples: usize,
    /// Nodes of the composite Simpson rule for `∫ρ` over `[0, window.1]`;
    /// rounded up to an odd count.
    pub rho_nodes: usize,
    /// Allowed residual norm per sample.
    pub residual_per_sample: f64,
    pub rho: RhoOptions,
}

impl Default for ExpansionOptions {
    fn default() -> ExpansionOptions {
        ExpansionOptions {
            window: (1e-2, 2e-1),
            samples: 24,
            rho_nodes: 33,
            residual_per_sample: 1e-6,
            rho: RhoOptions::default(),
        }
    }
}

/// One row of the `(t, r, h, model)` table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionRow {
    pub t: f64,
    /// Normalised ratio `r̂(t)`.
    pub r: f64,
    /// `log r̂ − 𝒩 log t − ∫₀ᵗρ`.
    pub h: f64,
    pub model: f64,
    pub rho_integral: f64,
}

#[derive(Clone, Debug)]
pub struct ExpansionFit {
    pub geodesic_dimension: usize,
    pub young: YoungDiagram,
    pub exact_c: Rational,
    pub log_c: f64,
    pub c: f64,
    pub tr_r: f64,
    /// Coefficient of `t³`; absorbs the remainder and is never compared.
    pub cubic: f64,
    pub residual: f64,
    /// Set when the residual exceeds its threshold; the rows then carry
    /// the residual profile.
    pub diagnostic: Option<String>,
    pub window: (f64, f64),
    pub samples: usize,
    /// `g(0)` in the auxiliary normalisation.
    pub g0: f64,
    pub rows: Vec<ExpansionRow>,
}

impl ExpansionFit {
    pub fn exact_c_f64(&self) -> f64 {
        exact::to_f64(&self.exact_c)
    }

    /// `|C_fit − C_λ| / C_λ`.
    pub fn c_relative_error(&self) -> f64 {
        let e = self.exact_c_f64();
        (self.c - e).abs() / e
    }
}

/// `g(0)` with the complement chosen at the base point.
pub fn base_log_volume(sys: &ControlSystem, lambda0: &PhasePoint, opts: &RhoOptions) -> Result<f64> {
    let complement = geometry::choose_complement(sys, &lambda0.x)?;
    Ok(rho::gram_at_point(sys, lambda0, &complement, &opts.flag)?.log_volume())
}

/// `r̂(t)` at each time.
pub fn normalized_ratios(sys: &ControlSystem, lambda0: &PhasePoint, times: &[f64], opts: &RhoOptions) -> Result<Vec<f64>> {
    let g0 = base_log_volume(sys, lambda0, opts)?;
    let m0 = sys.density_at(&lambda0.x)?;
    let scale = m0 * m0 * math::exp(-2.0 * g0);
    Ok(hamiltonian::volume_ratios(sys, lambda0, times, opts.flag.tol)?.into_iter().map(|r| r * scale).collect())
}

/// Cumulative integral of samples on a uniform grid (odd count) through
/// the piecewise quadratic interpolant; exact Simpson at panel ends.
pub struct SimpsonCumulative {
    step: f64,
    values: Vec<f64>,
    prefix: Vec<f64>,
}

impl SimpsonCumulative {
    pub fn new(step: f64, values: Vec<f64>) -> SimpsonCumulative {
        assert!(values.len() >= 3 && values.len() % 2 == 1, "need an odd number of nodes");
        let mut prefix = vec![0.0];
        for p in values.windows(3).step_by(2) {
            let last = *prefix.last().expect("seeded");
            prefix.push(last + step * (p[0] + 4.0 * p[1] + p[2]) / 3.0);
        }
        SimpsonCumulative { step, values, prefix }
    }

    pub fn end(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    pub fn integral_to(&self, t: f64) -> f64 {
        let panels = self.prefix.len() - 1;
        let width = 2.0 * self.step;
        let j = ((t / width) as usize).min(panels - 1);
        let (f0, f1, f2) = (self.values[2 * j], self.values[2 * j + 1], self.values[2 * j + 2]);
        let x = (t - j as f64 * width) / self.step;
        let partial = self.step * (f0 * x + (-3.0 * f0 + 4.0 * f1 - f2) * x * x / 4.0 + (f0 - 2.0 * f1 + f2) * x * x * x / 6.0);
        self.prefix[j] + partial
    }
}

/// `ρ(λ(s))` on a uniform grid over `[0, end]`.
pub fn rho_profile(sys: &ControlSystem, lambda0: &PhasePoint, end: f64, nodes: usize, opts: &RhoOptions) -> Result<SimpsonCumulative> {
    let nodes = (nodes.max(3) / 2) * 2 + 1;
    let step = end / (nodes - 1) as f64;
    let times: Vec<f64> = (0..nodes).map(|i| i as f64 * step).collect();
    let points = hamiltonian::flow_many(sys, lambda0, &times, opts.flag.tol)?;
    let values = points.iter().map(|s| rho::rho(sys, &s.point, opts)).collect::<Result<Vec<_>>>()?;
    Ok(SimpsonCumulative::new(step, values))
}

struct Samples {
    nn: usize,
    young: YoungDiagram,
    g0: f64,
    ts: Vec<f64>,
    r: Vec<f64>,
    integral: Vec<f64>,
}

fn samples(sys: &ControlSystem, lambda0: &PhasePoint, opts: &ExpansionOptions) -> Result<Samples> {
    let (lo, hi) = opts.window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Precondition(format!("fit window ({lo}, {hi}) must satisfy 0 < lo < hi")));
    }
    let f = flag::flag_at_point(sys, lambda0, &opts.rho.flag)?;
    let young = flag::young_diagram(&f)?;
    let ts = rho::geometric_grid(lo, hi, opts.samples);
    let g0 = base_log_volume(sys, lambda0, &opts.rho)?;
    let m0 = sys.density_at(&lambda0.x)?;
    let scale = m0 * m0 * math::exp(-2.0 * g0);
    let r: Vec<f64> =
        hamiltonian::volume_ratios(sys, lambda0, &ts, opts.rho.flag.tol)?.into_iter().map(|r| r * scale).collect();
    let profile = rho_profile(sys, lambda0, hi, opts.rho_nodes, &opts.rho)?;
    let integral = ts.iter().map(|&t| profile.integral_to(t)).collect();
    Ok(Samples { nn: f.geodesic_dimension(), young, g0, ts, r, integral })
}

fn fit_samples(s: &Samples, upper: f64, opts: &ExpansionOptions) -> Result<ExpansionFit> {
    let idx: Vec<usize> = (0..s.ts.len()).filter(|&i| s.ts[i] <= upper * (1.0 + 1e-12)).collect();
    if idx.len() < 4 {
        return Err(Error::Fit("fewer than four samples in the window".into()));
    }
    let ts: Vec<f64> = idx.iter().map(|&i| s.ts[i]).collect();
    let hs: Vec<f64> = idx
        .iter()
        .map(|&i| math::ln(s.r[i]) - s.nn as f64 * math::ln(s.ts[i]) - s.integral[i])
        .collect();
    if hs.iter().any(|h| !h.is_finite()) {
        return Err(Error::NonFinite("log of the volume ratio"));
    }
    let (c, residual) = rho::poly_fit(&ts, &hs, 3, true)?;
    let model = |t: f64| c[0] + c[2] * t * t + c[3] * t * t * t;
    let rows: Vec<ExpansionRow> = idx
        .iter()
        .zip(&hs)
        .map(|(&i, &h)| ExpansionRow { t: s.ts[i], r: s.r[i], h, model: model(s.ts[i]), rho_integral: s.integral[i] })
        .collect();
    let allowed = opts.residual_per_sample * ts.len() as f64;
    let diagnostic = (residual > allowed).then(|| {
        let worst = rows.iter().max_by(|a, b| (a.h - a.model).abs().total_cmp(&(b.h - b.model).abs())).expect("rows");
        format!(
            "residual {residual:e} exceeds {allowed:e}; largest deviation {:e} at t = {}",
            worst.h - worst.model,
            worst.t
        )
    });
    let exact_c = flag::leading_constant(&s.young);
    Ok(ExpansionFit {
        geodesic_dimension: s.nn,
        young: s.young.clone(),
        exact_c,
        log_c: c[0],
        c: math::exp(c[0]),
        tr_r: -6.0 * c[2],
        cubic: c[3],
        residual,
        diagnostic,
        window: (opts.window.0, upper),
        samples: ts.len(),
        g0: s.g0,
        rows,
    })
}

/// Fit `h(t) ≈ log C + c₂t² + c₃t³` on the window; `tr ℛ = −6c₂`.
pub fn fit_expansion(sys: &ControlSystem, lambda0: &PhasePoint, opts: &ExpansionOptions) -> Result<ExpansionFit> {
    let s = samples(sys, lambda0, opts)?;
    fit_samples(&s, opts.window.1, opts)
}

/// Fits on the full window and on the window with its upper end halved.
#[derive(Clone, Debug)]
pub struct WindowCheck {
    pub full: ExpansionFit,
    pub half: ExpansionFit,
    pub tr_r_change: f64,
    pub passed: bool,
}

pub fn window_check(sys: &ControlSystem, lambda0: &PhasePoint, opts: &ExpansionOptions) -> Result<WindowCheck> {
    let s = samples(sys, lambda0, opts)?;
    let full = fit_samples(&s, opts.window.1, opts)?;
    let half = fit_samples(&s, opts.window.1 / 2.0, opts)?;
    let tr_r_change = (full.tr_r - half.tr_r).abs();
    Ok(WindowCheck { full, half, tr_r_change, passed: tr_r_change <= 2e-2 })
}

/// Slope of `log r` against `log t` over `[1e-3, 1e-2]`.
pub fn exponent_probe(sys: &ControlSystem, lambda0: &PhasePoint, tol: f64) -> Result<f64> {
    let ts = rho::geometric_grid(1e-3, 1e-2, 12);
    let r = hamiltonian::volume_ratios(sys, lambda0, &ts, tol)?;
    let xs: Vec<f64> = ts.iter().map(|t| math::ln(*t)).collect();
    let ys: Vec<f64> = r.iter().map(|r| math::ln(*r)).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::NonFinite("log of the volume ratio"));
    }
    let (c, _) = rho::poly_fit(&xs, &ys, 1, false)?;
    Ok(c[1])
}

/// Closed-form `Ric(v, v)` for the builtins that have one.
pub fn ricci_oracle(name: &str, sys: &ControlSystem, lambda0: &PhasePoint) -> Option<f64> {
    match name.split(':').next().unwrap_or("") {
        // A weight changes the volume, not the metric.
        "euclidean" => Some(0.0),
        // Curvature 1 in dimension 2: Ric(v, v) = |v|² = 2H.
        "sphere2" => Some(2.0 * hamiltonian::energy(sys, lambda0)),
        _ => None,
    }
}
