//! Small dense helpers on top of nalgebra.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn det(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Singular values in decreasing order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis (as columns) of the dominant `rank`-dimensional
/// column space of `m`.
///
/// The SVD's left vectors drift by ~1e-8 when the kept singular values
/// cluster, so they only seed two steps of subspace iteration.
pub fn dominant_basis(m: &Matrix, rank: usize) -> Matrix {
    let rows = m.nrows();
    if rank == 0 || m.ncols() == 0 {
        return Matrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut q = Matrix::zeros(rows, rank);
    for (j, &src) in order.iter().take(rank).enumerate() {
        q.set_column(j, &u.column(src));
    }
    if rank >= rows {
        return q;
    }
    let mt = m.transpose();
    for _ in 0..2 {
        let z = m * (&mt * &q);
        if z.iter().any(|v| !v.is_finite()) || z.norm() == 0.0 {
            break;
        }
        q = z.qr().q();
    }
    q
}

/// Apply `I - B Bᵀ` to every column of `m`, `B` having orthonormal columns.
pub fn project_out(basis: &Matrix, m: &Matrix) -> Matrix {
    if basis.ncols() == 0 {
        return m.clone();
    }
    m - basis * (basis.transpose() * m)
}

/// Least-squares solution of `a x ≈ b` through the SVD.
pub fn least_squares(a: &Matrix, b: &Vector) -> Option<Vector> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(b, smax * 1e-14).ok()
}

pub fn norm(v: &[f64]) -> f64 {
    crate::math::sqrt(v.iter().map(|x| x * x).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_singular_values() {
        let m = Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -2.0]);
        assert!((det(&m) + 6.0).abs() < 1e-14);
        let s = singular_values(&m);
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn projection_removes_span() {
        let m = Matrix::from_row_slice(3, 2, &[1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let b = dominant_basis(&m.columns(0, 1).into_owned(), 1);
        let r = project_out(&b, &m);
        assert!(r.column(0).norm() < 1e-15);
        assert!((r[(1, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn least_squares_recovers_line() {
        let a = Matrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let b = Vector::from_fn(5, |i, _| 2.0 + 0.5 * i as f64);
        let x = least_squares(&a, &b).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }
}
