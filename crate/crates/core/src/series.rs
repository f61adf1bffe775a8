//! Truncated power series in one variable, stored as coefficient vectors.

use alloc::vec;
use alloc::vec::Vec;

/// Product truncated after degree `order`.
pub fn mul(a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    for (i, &x) in a.iter().enumerate().take(order + 1) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `f(g(s))` for `g(0) = 0`, by Horner's scheme.
pub fn compose(f: &[f64], g: &[f64], order: usize) -> Vec<f64> {
    debug_assert!(g.first().map_or(true, |&g0| g0 == 0.0), "inner series must vanish at 0");
    let mut out = vec![0.0; order + 1];
    for &c in f.iter().take(order + 1).rev() {
        out = mul(&out, g, order);
        out[0] += c;
    }
    out
}

/// Compositional inverse of `g` with `g(0) = 0`, `g'(0) ≠ 0`.
pub fn revert(g: &[f64], order: usize) -> Option<Vec<f64>> {
    let g1 = *g.get(1)?;
    if g1 == 0.0 || !g1.is_finite() {
        return None;
    }
    let mut phi = vec![0.0; order + 1];
    if order >= 1 {
        phi[1] = 1.0 / g1;
    }
    for m in 2..=order {
        let c = compose(g, &phi, m)[m];
        phi[m] = -c / g1;
    }
    Some(phi)
}

pub fn eval(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * s + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reversion_of_exp_minus_one_is_log() {
        // g = e^s - 1, inverse = log(1 + s) = s - s²/2 + s³/3 - ...
        let g = [0.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0];
        let phi = revert(&g, 5).unwrap();
        let expected = [0.0, 1.0, -0.5, 1.0 / 3.0, -0.25, 0.2];
        for (a, b) in phi.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let id = compose(&g, &phi, 5);
        assert!((id[1] - 1.0).abs() < 1e-14 && id[2..].iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn product_truncates() {
        assert_eq!(mul(&[1.0, 1.0], &[1.0, 1.0], 1), vec![1.0, 2.0]);
        assert_eq!(eval(&[1.0, 2.0, 3.0], 2.0), 17.0);
        assert!(revert(&[0.0, 0.0, 1.0], 3).is_none());
    }
}
