//! Dormand–Prince 5(4) with PI step-size control.
//!
//! No dense output: the integrator lands exactly on each requested stop.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Clone, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    /// Per-component absolute tolerance.
    pub atol: Vec<f64>,
    pub max_steps: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Integrate `y' = f(t, y)` from `t0`, returning the state at every time in
/// `stops`. Stops must be monotone in one direction away from `t0`.
pub fn integrate<F>(mut f: F, t0: f64, y0: &[f64], stops: &[f64], tol: &Tolerances) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    assert_eq!(tol.atol.len(), dim, "one absolute tolerance per component");
    let mut out = Vec::with_capacity(stops.len());
    if stops.is_empty() {
        return Ok(out);
    }
    let dir = if stops.iter().any(|&s| s < t0) { -1.0 } else { 1.0 };
    let mut prev = t0;
    for &s in stops {
        if (s - prev) * dir < 0.0 {
            return Err(Error::Precondition("integration stops are not monotone".into()));
        }
        prev = s;
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];
    let mut err_old: f64 = 1e-4;
    f(t, &y, &mut k[0]);
    let mut h = dir * initial_step(&mut f, t, &y, &k[0], dir, tol);
    let mut steps = 0usize;

    for &stop in stops {
        while (stop - t) * dir > 0.0 {
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::Integration { t, reason: "step limit exceeded" });
            }
            let remaining = stop - t;
            let last = h.abs() >= remaining.abs();
            let h_try = if last { remaining } else { h };
            if h_try.abs() <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Integration { t, reason: "step size underflow" });
            }

            stage(&y, h_try, &[(A21, 0)], &k, &mut tmp);
            f(t + C2 * h_try, &tmp, &mut k[1]);
            stage(&y, h_try, &[(A31, 0), (A32, 1)], &k, &mut tmp);
            f(t + C3 * h_try, &tmp, &mut k[2]);
            stage(&y, h_try, &[(A41, 0), (A42, 1), (A43, 2)], &k, &mut tmp);
            f(t + C4 * h_try, &tmp, &mut k[3]);
            stage(&y, h_try, &[(A51, 0), (A52, 1), (A53, 2), (A54, 3)], &k, &mut tmp);
            f(t + C5 * h_try, &tmp, &mut k[4]);
            stage(&y, h_try, &[(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)], &k, &mut tmp);
            f(t + h_try, &tmp, &mut k[5]);
            stage(&y, h_try, &[(A71, 0), (A73, 2), (A74, 3), (A75, 4), (A76, 5)], &k, &mut ynew);
            f(t + h_try, &ynew, &mut k[6]);

            let mut acc = 0.0;
            let mut finite = true;
            for i in 0..dim {
                let e = h_try
                    * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                let sc = tol.atol[i] + tol.rtol * y[i].abs().max(ynew[i].abs());
                let r = e / sc;
                acc += r * r;
                finite &= ynew[i].is_finite();
            }
            let err = math::sqrt(acc / dim.max(1) as f64);
            if !finite || !err.is_finite() {
                if h_try.abs() < 1e-10 * t.abs().max(1.0) {
                    return Err(Error::Integration { t, reason: "non-finite state" });
                }
                h = h_try * 0.25;
                continue;
            }

            let fac11 = libm::pow(err.max(1e-300), EXPO);
            if err <= 1.0 {
                let fac = (fac11 / libm::pow(err_old, BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                err_old = err.max(1e-4);
                t = if last { stop } else { t + h_try };
                core::mem::swap(&mut y, &mut ynew);
                k.swap(0, 6);
                let proposal = h_try / fac;
                // Keep the unclipped step when we only shortened to land on a stop.
                h = if last && h.abs() > proposal.abs() { h } else { proposal };
            } else {
                h = h_try / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn stage(y: &[f64], h: f64, coeffs: &[(f64, usize)], k: &[Vec<f64>], out: &mut [f64]) {
    for i in 0..y.len() {
        let mut s = 0.0;
        for &(a, j) in coeffs {
            s += a * k[j][i];
        }
        out[i] = y[i] + h * s;
    }
}

// Hairer–Nørsett–Wanner starting step.
fn initial_step<F>(f: &mut F, t: f64, y: &[f64], f0: &[f64], dir: f64, tol: &Tolerances) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y.len();
    // Components that start at zero with a tiny absolute tolerance would
    // otherwise force an absurdly small first step; the controller adapts
    // from here anyway.
    let sc = |i: usize, v: f64| tol.atol[i].max(tol.rtol) + tol.rtol * v.abs();
    let rms = |v: &dyn Fn(usize) -> f64| {
        let s: f64 = (0..dim).map(|i| v(i) * v(i)).sum();
        math::sqrt(s / dim.max(1) as f64)
    };
    let d0 = rms(&|i| y[i] / sc(i, y[i]));
    let d1 = rms(&|i| f0[i] / sc(i, y[i]));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = (0..dim).map(|i| y[i] + dir * h0 * f0[i]).collect();
    let mut f1 = vec![0.0; dim];
    f(t + dir * h0, &y1, &mut f1);
    let d2 = rms(&|i| (f1[i] - f0[i]) / sc(i, y[i])) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        libm::pow(0.01 / d1.max(d2), 0.2)
    };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(dim: usize, r: f64) -> Tolerances {
        Tolerances { rtol: r, atol: vec![r; dim], max_steps: 100_000 }
    }

    #[test]
    fn exponential_decay_hits_stops() {
        let stops = [0.1, 0.5, 1.0, 2.0];
        let ys = integrate(|_, y, d| d[0] = -y[0], 0.0, &[1.0], &stops, &tol(1, 1e-12)).unwrap();
        for (s, y) in stops.iter().zip(&ys) {
            assert!((y[0] - libm::exp(-s)).abs() < 1e-11, "{s}");
        }
    }

    #[test]
    fn backward_harmonic_oscillator() {
        let ys = integrate(|_, y, d| {
            d[0] = y[1];
            d[1] = -y[0];
        }, 0.0, &[0.0, 1.0], &[-0.5, -3.0], &tol(2, 1e-12))
        .unwrap();
        assert!((ys[0][0] - libm::sin(-0.5)).abs() < 1e-11);
        assert!((ys[1][1] - libm::cos(-3.0)).abs() < 1e-11);
    }

    #[test]
    fn rejects_non_monotone_stops() {
        assert!(integrate(|_, _, d| d[0] = 1.0, 0.0, &[0.0], &[1.0, 0.5], &tol(1, 1e-10)).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let r = integrate(|_, y, d| d[0] = y[0] * y[0], 0.0, &[1.0], &[2.0], &tol(1, 1e-10));
        assert!(matches!(r, Err(Error::Integration { .. })));
    }
}
