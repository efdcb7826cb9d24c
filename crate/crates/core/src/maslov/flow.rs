//! Local spectral-flow counting through Sp⁰_ω.
//!
//! A symplectic M is mapped to a unitary W(M) = U(ωI)*·U(M), with
//! U(M) = Y(M)X(M)⁻¹ built from the ±i eigenspaces of J, such that
//! dim ker(W − I) = dim ker(M − ωI). Eigenvalues of W crossing 1 are counted
//! from the lifted phase of det W and the principal angles at the ends.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, to_complex, CMat, Mat};
use crate::symplectic::UnitCircleParam;

/// Orientation that makes the positive direction M·e^{tεJ} count +1.
const ORIENTATION: f64 = 1.0;

const MAX_PHASE_STEP: f64 = PI / 4.0;
const MAX_REFINE_DEPTH: usize = 40;

pub(crate) struct Frame {
    m: usize,
    pi_plus: CMat,
    pi_minus: CMat,
    u_omega_adj: CMat,
}

impl Frame {
    pub fn new(m: usize, omega: UnitCircleParam) -> Self {
        let s = 1.0 / 2f64.sqrt();
        let mut pi_plus = CMat::zeros(2 * m, m);
        let mut pi_minus = CMat::zeros(2 * m, m);
        for i in 0..m {
            pi_plus[(i, i)] = Complex64::new(s, 0.0);
            pi_plus[(m + i, i)] = Complex64::new(0.0, s);
            pi_minus[(i, i)] = Complex64::new(s, 0.0);
            pi_minus[(m + i, i)] = Complex64::new(0.0, -s);
        }
        let mut frame = Self {
            m,
            pi_plus,
            pi_minus,
            u_omega_adj: CMat::identity(2 * m, 2 * m),
        };
        let w = omega.value();
        let wi = CMat::identity(2 * m, 2 * m) * w;
        frame.u_omega_adj = frame.unitary_c(&wi).adjoint();
        frame
    }

    fn unitary_c(&self, a: &CMat) -> CMat {
        let m = self.m;
        let mut x = CMat::zeros(2 * m, 2 * m);
        let mut y = CMat::zeros(2 * m, 2 * m);
        x.view_mut((0, 0), (m, 2 * m)).copy_from(&self.pi_minus.adjoint());
        x.view_mut((m, 0), (m, 2 * m)).copy_from(&(self.pi_plus.adjoint() * a));
        y.view_mut((0, 0), (m, 2 * m)).copy_from(&self.pi_plus.adjoint());
        y.view_mut((m, 0), (m, 2 * m)).copy_from(&(self.pi_minus.adjoint() * a));
        let xi = x.lu().try_inverse().expect("X(M) is invertible for symplectic M");
        y * xi
    }

    /// W(M) = U(ωI)*·U(M).
    pub fn w(&self, a: &Mat) -> CMat {
        &self.u_omega_adj * self.unitary_c(&to_complex(a))
    }
}

/// Sum of principal angles in (0, 2π) of a unitary W without eigenvalue 1.
fn angle_sum(w: &CMat) -> Result<f64> {
    let n = w.nrows();
    let id = CMat::identity(n, n);
    let inv = (&id - w)
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::FlowResolution("window end lies on Sp⁰_ω".into()))?;
    // Cayley transform: e^{iθ} ↦ −cot(θ/2)
    let k = (&id + w) * inv * Complex64::new(0.0, 1.0);
    Ok(hermitian_eigenvalues(&k)
        .into_iter()
        .map(|kappa| PI + 2.0 * kappa.atan())
        .sum())
}

fn phase(w: &CMat) -> Complex64 {
    let d = w.determinant();
    d / d.norm()
}

/// Signed count of crossings of `f(u)` through Sp⁰_ω for u between the
/// first and last grid point. Both ends must be off Sp⁰_ω.
pub(crate) fn flow_count(frame: &Frame, f: &dyn Fn(f64) -> Mat, grid: &[f64]) -> Result<i64> {
    assert!(grid.len() >= 2);
    let wa = frame.w(&f(grid[0]));
    let wb = frame.w(&f(*grid.last().expect("nonempty")));
    let mut total_phase = 0.0;
    let mut prev = phase(&wa);
    let mut prev_u = grid[0];
    for &u in &grid[1..] {
        let next = phase(&frame.w(&f(u)));
        total_phase += lifted_step(frame, f, prev_u, prev, u, next, 0)?;
        prev = next;
        prev_u = u;
    }
    let raw = (total_phase - (angle_sum(&wb)? - angle_sum(&wa)?)) / TAU;
    let count = raw.round();
    if (raw - count).abs() > 1e-6 {
        return Err(Error::FlowResolution(format!("non-integral count {raw}")));
    }
    Ok((ORIENTATION * count) as i64)
}

fn lifted_step(
    frame: &Frame,
    f: &dyn Fn(f64) -> Mat,
    ua: f64,
    pa: Complex64,
    ub: f64,
    pb: Complex64,
    depth: usize,
) -> Result<f64> {
    let step = (pb / pa).arg();
    if step.abs() <= MAX_PHASE_STEP {
        return Ok(step);
    }
    if depth >= MAX_REFINE_DEPTH {
        return Err(Error::FlowResolution(format!(
            "phase of det W jumps by {step:.3} on [{ua}, {ub}]"
        )));
    }
    let um = 0.5 * (ua + ub);
    let pm = phase(&frame.w(&f(um)));
    Ok(lifted_step(frame, f, ua, pa, um, pm, depth + 1)?
        + lifted_step(frame, f, um, pm, ub, pb, depth + 1)?)
}

/// Dimension of the eigenspace of W(M) at 1, for consistency checks.
#[cfg(test)]
pub(crate) fn unit_multiplicity(frame: &Frame, a: &Mat, tol: f64) -> usize {
    let w = frame.w(a);
    let n = w.nrows();
    let (sv, _) = crate::linalg::complex_svd(&(w - CMat::identity(n, n)));
    sv.iter().filter(|&&s| s <= tol).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{hyperbolic, nullity_with_tol, random_symplectic, rotation, TOL_ZERO};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn w_is_unitary_and_detects_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 1..4 {
            let frame = Frame::new(m, UnitCircleParam::new(0.8));
            for _ in 0..10 {
                let a = random_symplectic(m, &mut rng).into_matrix();
                let w = frame.w(&a);
                let err = (w.adjoint() * &w - CMat::identity(2 * m, 2 * m)).camax();
                assert!(err < 1e-8 * a.norm().powi(2).max(1.0));
            }
        }
        for th in [0.3, 2.0, 4.0] {
            let w = UnitCircleParam::new(th);
            let frame = Frame::new(1, w);
            assert_eq!(unit_multiplicity(&frame, &rotation(th), 1e-10), 1);
            assert_eq!(nullity_with_tol(&rotation(th), w, TOL_ZERO), 1);
            assert_eq!(unit_multiplicity(&frame, &hyperbolic(2.0), 1e-10), 0);
        }
        let frame = Frame::new(2, UnitCircleParam::one());
        assert_eq!(unit_multiplicity(&frame, &Mat::identity(4, 4), 1e-10), 4);
    }

    #[test]
    fn positive_rotation_counts_plus_one() {
        // R(ct) crosses −1 at t = π/c in the positive direction, kernel dim 2
        let frame = Frame::new(1, UnitCircleParam::minus_one());
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let n = flow_count(&frame, &|t| rotation(4.0 * t), &grid).unwrap();
        assert_eq!(n, 2);
        let n = flow_count(&frame, &|t| rotation(-4.0 * t), &grid).unwrap();
        assert_eq!(n, -2);
        // R(ct) at ω = e^{iθ}: simple crossing
        let frame = Frame::new(1, UnitCircleParam::new(1.0));
        assert_eq!(flow_count(&frame, &|t| rotation(0.5 + t), &grid).unwrap(), 1);
        assert_eq!(flow_count(&frame, &|t| rotation(1.5 - t), &grid).unwrap(), -1);
    }
}
