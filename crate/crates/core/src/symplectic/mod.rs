//! Symplectic linear algebra: the structure J, symplecticity checks,
//! the ⋄-product, the determinant function D_ω and kernel dimensions.

mod normal;
mod standard;

pub use normal::{hyperbolic, k_matrix, rotation, NormalForm};
pub use standard::{standard_path, StandardPath};

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complex_svd, max_abs, to_complex, CMat, Mat};

/// Default tolerance for `‖MᵀJM − J‖_max`.
pub const TOL_SYMPL: f64 = 1e-10;
/// Default relative threshold for zero singular values and eigenvalues.
pub const TOL_ZERO: f64 = 1e-8;

pub use crate::linalg::j_matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    m: usize,
    entries: Mat,
}

impl SymplecticMatrix {
    pub fn new(entries: Mat, tol: f64) -> Result<Self> {
        let residual = symplectic_residual(&entries)?;
        if residual > tol {
            return Err(Error::NotSymplectic { residual, tol });
        }
        Ok(Self {
            m: entries.nrows() / 2,
            entries,
        })
    }

    /// Wraps a matrix already known to be symplectic (e.g. built from exact formulas).
    pub fn new_unchecked(entries: Mat) -> Self {
        debug_assert!(entries.nrows().is_multiple_of(2) && entries.is_square());
        Self {
            m: entries.nrows() / 2,
            entries,
        }
    }

    pub fn identity(m: usize) -> Self {
        Self {
            m,
            entries: Mat::identity(2 * m, 2 * m),
        }
    }

    pub fn dim_half(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &Mat {
        &self.entries
    }

    pub fn into_matrix(self) -> Mat {
        self.entries
    }

    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.entries).unwrap_or(f64::INFINITY)
    }

    pub fn inverse(&self) -> Self {
        Self::new_unchecked(crate::linalg::symplectic_inverse(&self.entries))
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        Self::new_unchecked(&self.entries * &rhs.entries)
    }
}

/// Point ω = e^{iα} of the unit circle, stored by its angle in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCircleParam {
    angle: f64,
}

impl UnitCircleParam {
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        Self { angle: a }
    }

    pub fn one() -> Self {
        Self { angle: 0.0 }
    }

    pub fn minus_one() -> Self {
        Self {
            angle: std::f64::consts::PI,
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn value(&self) -> Complex64 {
        if self.angle == 0.0 {
            Complex64::new(1.0, 0.0)
        } else if self.angle == std::f64::consts::PI {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, self.angle)
        }
    }

    /// ω·e^{iθ}.
    pub fn rotated(&self, theta: f64) -> Self {
        Self::new(self.angle + theta)
    }

    /// True for ω = ±1, where all forms stay real.
    pub fn is_real(&self) -> bool {
        self.angle == 0.0 || self.angle == std::f64::consts::PI
    }
}

fn check_even_square(a: &Mat) -> Result<usize> {
    if !a.is_square() || !a.nrows().is_multiple_of(2) || a.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "expected a nonempty square matrix of even size, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows() / 2)
}

/// `‖MᵀJM − J‖_max`.
pub fn symplectic_residual(a: &Mat) -> Result<f64> {
    let m = check_even_square(a)?;
    let j = j_matrix(m);
    Ok(max_abs(&(a.transpose() * &j * a - &j)))
}

pub fn check_symplectic(a: &Mat, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(a)? <= tol)
}

/// Block interleave of a 2m1- and a 2m2-dimensional matrix.
pub fn diamond(m1: &Mat, m2: &Mat) -> Mat {
    let a = m1.nrows() / 2;
    let b = m2.nrows() / 2;
    let n = a + b;
    let mut out = Mat::zeros(2 * n, 2 * n);
    // index maps: x-part of m1 → 0..a, x-part of m2 → a..n, y-parts shifted by n
    let map1 = |i: usize| if i < a { i } else { n + (i - a) };
    let map2 = |i: usize| if i < b { a + i } else { n + a + (i - b) };
    for r in 0..2 * a {
        for c in 0..2 * a {
            out[(map1(r), map1(c))] = m1[(r, c)];
        }
    }
    for r in 0..2 * b {
        for c in 0..2 * b {
            out[(map2(r), map2(c))] = m2[(r, c)];
        }
    }
    out
}

pub fn diamond_product(m1: &SymplecticMatrix, m2: &SymplecticMatrix) -> SymplecticMatrix {
    SymplecticMatrix::new_unchecked(diamond(m1.matrix(), m2.matrix()))
}

/// `M ⋄ M ⋄ … ⋄ M` with k factors.
pub fn diamond_power(a: &Mat, k: usize) -> Mat {
    assert!(k >= 1);
    let mut out = a.clone();
    for _ in 1..k {
        out = diamond(&out, a);
    }
    out
}

/// Complex value of `(−1)^{m−1} ω̄^m det(M − ωI)`.
pub fn d_omega_complex(a: &Mat, omega: UnitCircleParam) -> Result<Complex64> {
    let m = check_even_square(a)?;
    let w = omega.value();
    let shifted = to_complex(a) - CMat::identity(2 * m, 2 * m) * w;
    let det = shifted.determinant();
    let sign = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(det * w.conj().powu(m as u32) * sign)
}

/// Magnitude scale used for the reality check of D_ω.
pub fn d_omega_scale(a: &Mat, omega: UnitCircleParam) -> f64 {
    let m = a.nrows() / 2;
    let shifted = to_complex(a) - CMat::identity(2 * m, 2 * m) * omega.value();
    let (sv, _) = complex_svd(&shifted);
    sv.iter().map(|s| s.max(1.0)).product()
}

/// D_ω(M). Real for real symplectic M; an imaginary part above
/// `tol·Π max(1, σ_i(M − ωI))` is reported as an error.
pub fn d_omega_with_tol(a: &Mat, omega: UnitCircleParam, tol: f64) -> Result<f64> {
    let d = d_omega_complex(a, omega)?;
    if d.im.abs() > tol * d_omega_scale(a, omega) {
        return Err(Error::ComplexDeterminant { imag: d.im });
    }
    Ok(d.re)
}

pub fn d_omega(a: &SymplecticMatrix, omega: UnitCircleParam) -> Result<f64> {
    d_omega_with_tol(a.matrix(), omega, TOL_SYMPL)
}

/// Singular values of `M − ωI` in descending order with right singular vectors.
pub fn shifted_svd(a: &Mat, omega: UnitCircleParam) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let shifted = to_complex(a) - CMat::identity(n, n) * omega.value();
    complex_svd(&shifted)
}

/// Threshold below which a singular value of `M − ωI` counts as zero.
pub fn kernel_threshold(a: &Mat, sv: &[f64], tol_zero: f64) -> f64 {
    let top = sv.first().copied().unwrap_or(0.0);
    let norm = crate::linalg::spectral_norm(a);
    tol_zero * top.max(norm).max(1.0)
}

/// dim_ℂ ker(M − ωI) with a relative threshold.
pub fn nullity_with_tol(a: &Mat, omega: UnitCircleParam, tol_zero: f64) -> usize {
    let (sv, _) = shifted_svd(a, omega);
    let tau = kernel_threshold(a, &sv, tol_zero);
    sv.iter().filter(|&&s| s <= tau).count()
}

pub fn nullity(a: &SymplecticMatrix, omega: UnitCircleParam) -> usize {
    nullity_with_tol(a.matrix(), omega, TOL_ZERO)
}

/// Orthonormal basis of ker(M − ωI) as matrix columns.
pub fn kernel_basis(a: &Mat, omega: UnitCircleParam, tol_zero: f64) -> CMat {
    let (sv, v) = shifted_svd(a, omega);
    let tau = kernel_threshold(a, &sv, tol_zero);
    let k = sv.iter().filter(|&&s| s <= tau).count();
    let n = v.ncols();
    v.columns(n - k, k).into_owned()
}

/// Random symmetric matrix with entries uniform in [−amp, amp], symmetrized as (M + Mᵀ)/2.
pub fn random_symmetric<R: Rng + ?Sized>(n: usize, amp: f64, rng: &mut R) -> Mat {
    let raw = Mat::from_fn(n, n, |_, _| rng.gen_range(-amp..=amp));
    (&raw + raw.transpose()) * 0.5
}

/// Product of 1–4 exponentials exp(J S_k) with random symmetric S_k.
pub fn random_symplectic<R: Rng + ?Sized>(m: usize, rng: &mut R) -> SymplecticMatrix {
    let j = j_matrix(m);
    let factors = rng.gen_range(1..=4);
    let mut out = Mat::identity(2 * m, 2 * m);
    for _ in 0..factors {
        let s = random_symmetric(2 * m, 1.0, rng);
        out *= (&j * s).exp();
    }
    SymplecticMatrix::new_unchecked(out)
}
