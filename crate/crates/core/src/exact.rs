//! Exact rational arithmetic for the factorial matrices `N̂`, `Ĝ`, the
//! generalized Hilbert matrix and the alternating binomial sums.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(int(num), int(den))
}

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `C(n, k)`, zero outside `0 ≤ k ≤ n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn sign(e: i64) -> BigInt {
    if e.rem_euclid(2) == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> RationalMatrix {
        RationalMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> RationalMatrix {
        let mut m = RationalMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Rational) -> RationalMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        RationalMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Rational::zero(), |acc, l| acc + &self[(i, l)] * &other[(l, j)])
        })
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols)).fold(Rational::zero(), |acc, i| acc + &self[(i, i)])
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        (0..self.rows).map(|i| (0..self.cols).fold(Rational::zero(), |acc, j| acc + &self[(i, j)])).collect()
    }

    /// Integer matrix `D·A` with `D` the diagonal of row denominators' lcms.
    fn cleared(&self) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let mut rows = Vec::with_capacity(self.rows);
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let l = (0..self.cols).fold(BigInt::one(), |acc, j| acc.lcm(self[(i, j)].denom()));
            rows.push((0..self.cols).map(|j| (&self[(i, j)] * Rational::from(l.clone())).to_integer()).collect());
            scales.push(l);
        }
        (rows, scales)
    }

    /// Determinant by Bareiss fraction-free elimination.
    pub fn determinant(&self) -> Rational {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Rational::one();
        }
        let (mut a, scales) = self.cleared();
        let mut prev = BigInt::one();
        let mut negate = false;
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
                return Rational::zero();
            };
            if p != k {
                a.swap(p, k);
                negate = !negate;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                    a[i][j] = exact_div(&v, &prev);
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        let denom = scales.iter().fold(BigInt::one(), |acc, s| acc * s);
        let det = Rational::new(a[n - 1][n - 1].clone(), denom);
        if negate {
            -det
        } else {
            det
        }
    }

    /// Inverse by fraction-free Gauss–Jordan on `[D·A | I]`; every division
    /// is checked to be exact.
    pub fn inverse(&self) -> Option<RationalMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let (b, scales) = self.cleared();
        let mut m: Vec<Vec<BigInt>> = b
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
                row
            })
            .collect();
        let mut prev = BigInt::one();
        for k in 0..n {
            let p = (k..n).find(|&r| !m[r][k].is_zero())?;
            m.swap(p, k);
            let pivot_row = m[k].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i == k {
                    continue;
                }
                let lead = row[k].clone();
                for j in 0..2 * n {
                    let v = &pivot_row[k] * &row[j] - &lead * &pivot_row[j];
                    row[j] = exact_div(&v, &prev);
                }
            }
            prev = pivot_row[k].clone();
        }
        // Every diagonal entry now equals `prev`; the right block is prev·B⁻¹.
        Some(RationalMatrix::from_fn(n, n, |i, j| {
            Rational::new(m[i][n + j].clone() * &scales[j], prev.clone())
        }))
    }

    /// Plain rational Gauss–Jordan, kept as an independent oracle.
    pub fn inverse_gauss_jordan(&self) -> Option<RationalMatrix> {
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RationalMatrix::identity(n);
        for k in 0..n {
            let p = (k..n).find(|&r| !a[(r, k)].is_zero())?;
            a.swap_rows(p, k);
            inv.swap_rows(p, k);
            let piv = a[(k, k)].clone();
            for j in 0..n {
                a[(k, j)] = &a[(k, j)] / &piv;
                inv[(k, j)] = &inv[(k, j)] / &piv;
            }
            for i in 0..n {
                if i == k || a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].clone();
                for j in 0..n {
                    let da = &f * &a[(k, j)];
                    let di = &f * &inv[(k, j)];
                    a[(i, j)] -= da;
                    inv[(i, j)] -= di;
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

fn exact_div(v: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = v.div_rem(d);
    assert!(r.is_zero(), "fraction-free step left a remainder");
    q
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str("; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        f.write_str("]")
    }
}

/// `N̂_ij = (−1)^{j−1}/(i+j−1)!` (1-based).
pub fn nhat(n: usize) -> RationalMatrix {
    RationalMatrix::from_fn(n, n, |i, j| Rational::new(sign(j as i64), factorial((i + j + 1) as u64)))
}

/// `Ĝ_ij = (−1)^{j−1}/(i+j+1)!` (1-based).
pub fn ghat(n: usize) -> RationalMatrix {
    RationalMatrix::from_fn(n, n, |i, j| Rational::new(sign(j as i64), factorial((i + j + 3) as u64)))
}

/// Closed form of `N̂⁻¹`.
pub fn nhat_inverse_closed(n: usize) -> RationalMatrix {
    let nn = n as i64;
    let nf = factorial(n as u64);
    RationalMatrix::from_fn(n, n, |i0, j0| {
        let (i, j) = (i0 as i64 + 1, j0 as i64 + 1);
        let mut acc = Rational::zero();
        for k in j..=nn {
            let num = sign(k - j)
                * binomial(nn + i - 1, i - 1)
                * binomial(nn + k - 1, k - 1)
                * &nf
                * &nf;
            let den = int(i + k - 1)
                * factorial((k - j) as u64)
                * factorial((nn - i) as u64)
                * factorial((nn - k) as u64);
            acc += Rational::new(num, den);
        }
        acc
    })
}

pub fn det_nhat(n: usize) -> Rational {
    nhat(n).determinant()
}

/// `Π_{j<n} j! / Π_{j=n}^{2n−1} j!`.
pub fn det_formula(n: usize) -> Rational {
    let num = (0..n as u64).fold(BigInt::one(), |acc, j| acc * factorial(j));
    let den = (n as u64..2 * n as u64).fold(BigInt::one(), |acc, j| acc * factorial(j));
    Rational::new(num, den)
}

/// `C = Π_a det N̂(n_a)` over the rows of a Young diagram.
pub fn leading_constant_exact(rows: &[usize]) -> Rational {
    rows.iter().fold(Rational::one(), |acc, &r| acc * det_formula(r))
}

/// `(tr(N̂⁻¹Ĝ), n/(2(4n²−1)))`.
pub fn trace_identity(n: usize) -> (Rational, Rational) {
    let inv = nhat(n).inverse().expect("N̂ is invertible");
    let lhs = inv.mul(&ghat(n)).trace();
    let nn = n as i64;
    (lhs, rat(nn, 2 * (4 * nn * nn - 1)))
}

/// `Σ_k (−1)^{n+k}/(n+k−2)·C(2n, n−k)·C(n+k−1, k−1)²`, expected `1/2`.
pub fn comb_identity_a(n: usize) -> Rational {
    let n = n as i64;
    assert!(n >= 2, "identity needs n ≥ 2");
    (1..=n).fold(Rational::zero(), |acc, k| {
        let b = binomial(n + k - 1, k - 1);
        acc + Rational::new(sign(n + k) * binomial(2 * n, n - k) * &b * &b, int(n + k - 2))
    })
}

/// `Σ_k (−1)^{n+k}/((n+k)(n+k−1))·C(2n+1, n−k)·C(n+k, k−1)²`, expected `1/2`.
pub fn comb_identity_b(n: usize) -> Rational {
    let n = n as i64;
    assert!(n >= 2, "identity needs n ≥ 2");
    (1..=n).fold(Rational::zero(), |acc, k| {
        let b = binomial(n + k, k - 1);
        acc + Rational::new(sign(n + k) * binomial(2 * n + 1, n - k) * &b * &b, int((n + k) * (n + k - 1)))
    })
}

/// `(Σ_{j=1}^k (−1)^j C(n+k, n+j), −C(n+k−1, k−1))`.
pub fn b0_identity(n: usize, k: usize) -> (BigInt, BigInt) {
    let (n, k) = (n as i64, k as i64);
    let lhs = (1..=k).fold(BigInt::zero(), |acc, j| acc + sign(j) * binomial(n + k, n + j));
    (lhs, -binomial(n + k - 1, k - 1))
}

fn check_distinct(a: &[Rational], b: &[Rational]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Precondition("parameter lists must be non-empty and of equal length".into()));
    }
    let all: Vec<&Rational> = a.iter().chain(b).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if all[i] == all[j] {
                return Err(Error::Precondition(alloc::format!("repeated parameter {}", all[i])));
            }
        }
    }
    Ok(())
}

/// `H_ij = 1/(a_i − b_j)`.
pub fn hilbert(a: &[Rational], b: &[Rational]) -> Result<RationalMatrix> {
    check_distinct(a, b)?;
    Ok(RationalMatrix::from_fn(a.len(), a.len(), |i, j| (&a[i] - &b[j]).recip()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HilbertInverse {
    pub inverse: RationalMatrix,
    pub row_sums: Vec<Rational>,
}

/// Closed-form inverse of the generalized Hilbert matrix and its row sums.
pub fn hilbert_inverse(a: &[Rational], b: &[Rational]) -> Result<HilbertInverse> {
    check_distinct(a, b)?;
    let n = a.len();
    let prod = |f: &dyn Fn(usize) -> Option<Rational>| (0..n).filter_map(f).fold(Rational::one(), |acc, v| acc * v);
    let inverse = RationalMatrix::from_fn(n, n, |i, j| {
        let num = prod(&|k| Some((&b[i] - &a[k]) * (&a[j] - &b[k])));
        let den = prod(&|k| (k != j).then(|| &a[j] - &a[k])) * prod(&|l| (l != i).then(|| &b[i] - &b[l]));
        num / den / (&b[i] - &a[j])
    });
    let row_sums = (0..n)
        .map(|i| -prod(&|k| Some(&b[i] - &a[k])) / prod(&|k| (k != i).then(|| &b[i] - &b[k])))
        .collect();
    Ok(HilbertInverse { inverse, row_sums })
}

/// Parameters `a_i = i`, `b_j = 1 − j` of the classical case.
pub fn classical_hilbert_params(n: usize) -> (Vec<Rational>, Vec<Rational>) {
    let a = (1..=n as i64).map(|i| rat(i, 1)).collect();
    let b = (1..=n as i64).map(|j| rat(1 - j, 1)).collect();
    (a, b)
}

/// `(2n−1)!/((n−1)!)²`, the last row sum in the classical case.
pub fn eta_one(n: usize) -> Rational {
    let f = factorial(n as u64 - 1);
    Rational::new(factorial(2 * n as u64 - 1), &f * &f)
}

/// Render as `num/den` (or just `num` for integers).
pub fn render(r: &Rational) -> alloc::string::String {
    if r.denom().is_one() {
        alloc::format!("{}", r.numer())
    } else {
        alloc::format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// True if `r` is strictly positive.
pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_matrices() {
        assert_eq!(nhat(1), RationalMatrix::identity(1));
        assert_eq!(ghat(1)[(0, 0)], rat(1, 6));
        let n2 = nhat(2);
        assert_eq!(n2[(0, 1)], rat(-1, 2));
        assert_eq!(n2[(1, 0)], rat(1, 2));
        assert_eq!(n2[(1, 1)], rat(-1, 6));
        assert_eq!(n2.mul(&nhat_inverse_closed(2)), RationalMatrix::identity(2));
    }

    #[test]
    fn determinants() {
        assert_eq!(det_nhat(1), rat(1, 1));
        assert_eq!(det_nhat(2), rat(1, 12));
        assert_eq!(det_nhat(3), rat(1, 8640));
        for n in 1..=6 {
            assert_eq!(det_nhat(n), det_formula(n));
        }
    }

    #[test]
    fn inverse_paths_agree() {
        for n in 1..=5 {
            let m = nhat(n);
            assert_eq!(m.inverse(), m.inverse_gauss_jordan());
            assert_eq!(m.inverse().unwrap(), nhat_inverse_closed(n));
        }
        let singular = RationalMatrix::from_fn(2, 2, |_, _| rat(1, 1));
        assert!(singular.inverse().is_none());
        assert!(singular.determinant().is_zero());
    }

    #[test]
    fn leading_constants() {
        assert_eq!(leading_constant_exact(&[1, 1, 1]), rat(1, 1));
        assert_eq!(leading_constant_exact(&[2, 1]), rat(1, 12));
        assert_eq!(leading_constant_exact(&[3, 1]), rat(1, 8640));
    }

    #[test]
    fn trace_small_cases() {
        let (l, r) = trace_identity(1);
        assert_eq!((l.clone(), r), (rat(1, 6), rat(1, 6)));
        let (l, r) = trace_identity(2);
        assert_eq!(r, rat(1, 15));
        assert_eq!(l, r);
    }

    #[test]
    fn sums_and_b0_identity() {
        assert_eq!(comb_identity_a(2), rat(1, 2));
        assert_eq!(comb_identity_b(2), rat(1, 2));
        assert_eq!(b0_identity(1, 1), (int(-1), int(-1)));
        let (l, r) = b0_identity(3, 2);
        assert_eq!(l, r);
    }

    #[test]
    fn hilbert_cases() {
        let h = hilbert_inverse(&[rat(1, 1)], &[rat(0, 1)]).unwrap();
        assert_eq!(h.inverse, RationalMatrix::identity(1));
        assert_eq!(h.row_sums, vec![rat(1, 1)]);
        assert!(hilbert(&[rat(1, 1), rat(2, 1)], &[rat(2, 1), rat(5, 1)]).is_err());
        let (a, b) = classical_hilbert_params(4);
        assert_eq!(hilbert_inverse(&a, &b).unwrap().row_sums[3], eta_one(4));
        assert_eq!(eta_one(3), rat(30, 1));
    }

    #[test]
    fn rendering() {
        assert_eq!(render(&rat(-2, 4)), "-1/2");
        assert_eq!(render(&rat(6, 3)), "2");
        assert_eq!(to_f64(&rat(1, 8)), 0.125);
    }
}
