//! Small dense helpers shared by the modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Standard structure `J = [[0, -I], [I, 0]]` of size 2m.
pub fn j_matrix(m: usize) -> Mat {
    let mut j = Mat::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(i, m + i)] = -1.0;
        j[(m + i, i)] = 1.0;
    }
    j
}

pub fn to_complex(a: &Mat) -> CMat {
    a.map(|x| Complex64::new(x, 0.0))
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_c(a: &CMat) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

pub fn symmetric_part(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

pub fn asymmetry(a: &Mat) -> f64 {
    max_abs(&(a - a.transpose()))
}

/// Inverse of a symplectic matrix, `-J Mᵀ J`.
pub fn symplectic_inverse(a: &Mat) -> Mat {
    let j = j_matrix(a.nrows() / 2);
    -(&j * a.transpose() * &j)
}

pub fn inverse(a: &Mat) -> Option<Mat> {
    a.clone().lu().try_inverse()
}

pub fn singular_values(a: &Mat) -> DVector<f64> {
    a.clone().singular_values()
}

pub fn spectral_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a).max()
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(a: &Mat) -> f64 {
    let sv = singular_values(a);
    let lo = sv.min();
    if lo == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / lo
    }
}

/// Singular values (descending) and right singular vectors as columns.
pub fn complex_svd(a: &CMat) -> (Vec<f64>, CMat) {
    let svd = SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let n = a.ncols();
    let mut v = CMat::zeros(n, order.len());
    let mut sv = Vec::with_capacity(order.len());
    for (col, &k) in order.iter().enumerate() {
        sv.push(svd.singular_values[k]);
        for r in 0..n {
            v[(r, col)] = v_t[(k, r)].conj();
        }
    }
    (sv, v)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a real symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetric_part(a))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Signature (positive minus negative count) of a Hermitian matrix with a relative threshold.
pub fn hermitian_signature(h: &CMat, rel_tol: f64) -> (i64, usize) {
    let ev = hermitian_eigenvalues(h);
    let scale = ev.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let tau = rel_tol * scale;
    let pos = ev.iter().filter(|&&x| x > tau).count() as i64;
    let neg = ev.iter().filter(|&&x| x < -tau).count() as i64;
    (pos - neg, ev.len() - (pos + neg) as usize)
}

/// Extracts the m×m block at block position (bi, bj) of a 2m×2m matrix.
pub fn block(a: &Mat, bi: usize, bj: usize) -> Mat {
    let m = a.nrows() / 2;
    a.view((bi * m, bj * m), (m, m)).into_owned()
}

/// Assembles a 2m×2m matrix from four m×m blocks.
pub fn from_blocks(a11: &Mat, a12: &Mat, a21: &Mat, a22: &Mat) -> Mat {
    let m = a11.nrows();
    let mut out = Mat::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(a11);
    out.view_mut((0, m), (m, m)).copy_from(a12);
    out.view_mut((m, 0), (m, m)).copy_from(a21);
    out.view_mut((m, m), (m, m)).copy_from(a22);
    out
}
