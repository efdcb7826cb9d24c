//! The Hermitian action form on the ω-boundary space, its inertia, the
//! signature and the discrete splitting numbers.

use std::io::Write;
use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::discrete::{fundamental_solution, CoefficientSequence};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, max_abs_c, symmetric_eigenvalues, CMat, Mat};
use crate::symplectic::{nullity_with_tol, UnitCircleParam};

#[derive(Debug, Clone)]
pub enum HessianMatrix {
    Real(Mat),
    Complex(CMat),
}

/// Matrix H with ⟨Hz̃, w̃⟩ = Σ_n (−J(z_{n+1} − z_n)/h − B_n z̃_n, w̃_n).
/// Coordinates are grouped per node, z̃_n = (x_{n+1}, y_n), n = 0..N−1.
#[derive(Debug, Clone)]
pub struct HessianForm {
    pub m: usize,
    pub n: usize,
    pub h: f64,
    pub omega: UnitCircleParam,
    pub matrix: HessianMatrix,
}

impl HessianForm {
    pub fn dim(&self) -> usize {
        2 * self.m * self.n
    }

    pub fn to_complex(&self) -> CMat {
        match &self.matrix {
            HessianMatrix::Real(a) => crate::linalg::to_complex(a),
            HessianMatrix::Complex(a) => a.clone(),
        }
    }

    pub fn hermitian_residual(&self) -> f64 {
        let c = self.to_complex();
        max_abs_c(&(&c - c.adjoint()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match &self.matrix {
            HessianMatrix::Real(a) => symmetric_eigenvalues(a),
            HessianMatrix::Complex(a) => hermitian_eigenvalues(a),
        }
    }

    pub fn apply(&self, z: &DVector<Complex64>) -> DVector<Complex64> {
        self.to_complex() * z
    }

    /// ⟨Hz, w⟩ = w*Hz.
    pub fn form(&self, z: &DVector<Complex64>, w: &DVector<Complex64>) -> Complex64 {
        w.dotc(&self.apply(z))
    }

    /// Dense dump: magic "SHDX", u32 rows, u32 cols (little endian), then
    /// column-major f64 pairs (re, im).
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let c = self.to_complex();
        let mut buf = Vec::with_capacity(12 + 16 * c.len());
        buf.extend_from_slice(b"SHDX");
        buf.extend_from_slice(&(c.nrows() as u32).to_le_bytes());
        buf.extend_from_slice(&(c.ncols() as u32).to_le_bytes());
        for z in c.iter() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        let mut f = std::fs::File::create(path).map_err(io)?;
        f.write_all(&buf).map_err(io)
    }
}

/// Reads a dump written by [`HessianForm::write_binary`].
pub fn read_binary(path: &Path) -> Result<CMat> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.len() < 12 || &bytes[..4] != b"SHDX" {
        return Err(Error::Input("not a SHDX dump".into()));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    if bytes.len() != 12 + 16 * rows * cols {
        return Err(Error::Input("truncated SHDX dump".into()));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[12 + 8 * k..20 + 8 * k].try_into().expect("8 bytes"));
    Ok(CMat::from_iterator(
        rows,
        cols,
        (0..rows * cols).map(|k| Complex64::new(f(2 * k), f(2 * k + 1))),
    ))
}

pub fn assemble_hessian(sys: &CoefficientSequence, omega: UnitCircleParam) -> Result<HessianForm> {
    let m = sys.dim_half();
    let n = sys.period();
    let h = sys.h();
    let dim = 2 * m * n;
    let w = omega.value();
    let p = |k: usize| 2 * m * k;
    let q = |k: usize| 2 * m * k + m;
    let mut hm = CMat::zeros(dim, dim);
    let inv_h = Complex64::new(1.0 / h, 0.0);
    for k in 0..n {
        let (a, c, d) = (sys.a(k), sys.c(k), sys.d(k));
        for i in 0..m {
            for j in 0..m {
                hm[(p(k) + i, p(k) + j)] -= a[(i, j)];
                hm[(q(k) + i, q(k) + j)] -= d[(i, j)];
                hm[(p(k) + i, q(k) + j)] -= c[(i, j)];
                hm[(q(k) + i, p(k) + j)] -= c[(j, i)];
            }
            hm[(p(k) + i, q(k) + i)] -= inv_h;
            hm[(q(k) + i, p(k) + i)] -= inv_h;
            // first component: (y_{k+1} − y_k)/h, with y_N = ω y_0
            let (col, coef) = if k + 1 == n { (q(0), w) } else { (q(k + 1), Complex64::new(1.0, 0.0)) };
            hm[(p(k) + i, col + i)] += coef * inv_h;
            // second component: −(x_{k+1} − x_k)/h, with x_0 = ω̄ x_N
            let (col, coef) = if k == 0 { (p(n - 1), w.conj()) } else { (p(k - 1), Complex64::new(1.0, 0.0)) };
            hm[(q(k) + i, col + i)] += coef * inv_h;
        }
    }
    let residual = max_abs_c(&(&hm - hm.adjoint()));
    if residual > 1e-12 {
        return Err(Error::NotHermitian { residual });
    }
    let matrix = if omega.is_real() {
        HessianMatrix::Real(hm.map(|z| z.re))
    } else {
        HessianMatrix::Complex(hm)
    };
    Ok(HessianForm {
        m,
        n,
        h,
        omega,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MorseTriple {
    pub m_minus: usize,
    pub m_zero: usize,
    pub m_plus: usize,
}

impl MorseTriple {
    pub fn total(&self) -> usize {
        self.m_minus + self.m_zero + self.m_plus
    }

    pub fn signature(&self) -> i64 {
        self.m_minus as i64 - self.m_plus as i64
    }
}

/// Counts eigenvalues below −τ, in [−τ, τ] and above τ, τ = tol_zero·max|λ|.
pub fn inertia_of(eigenvalues: &[f64], tol_zero: f64) -> MorseTriple {
    let scale = eigenvalues.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let tau = tol_zero * scale;
    let m_minus = eigenvalues.iter().filter(|&&x| x < -tau).count();
    let m_plus = eigenvalues.iter().filter(|&&x| x > tau).count();
    MorseTriple {
        m_minus,
        m_zero: eigenvalues.len() - m_minus - m_plus,
        m_plus,
    }
}

pub fn inertia(form: &HessianForm, tol_zero: f64) -> MorseTriple {
    inertia_of(&form.eigenvalues(), tol_zero)
}

/// Inertia of the action form, cross-checked against the Floquet nullity of γ_N.
pub fn morse_indices(
    sys: &CoefficientSequence,
    omega: UnitCircleParam,
    tol_zero: f64,
) -> Result<MorseTriple> {
    let form = assemble_hessian(sys, omega)?;
    let ev = form.eigenvalues();
    let triple = inertia_of(&ev, tol_zero);
    let sol = fundamental_solution(sys)?;
    let nu = nullity_with_tol(sol.monodromy().matrix(), omega, tol_zero);
    if nu != triple.m_zero {
        let scale = ev.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let smallest = ev.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
        return Err(Error::FloquetMismatch {
            m_zero: triple.m_zero,
            nu,
            smallest,
            threshold: tol_zero * scale,
        });
    }
    Ok(triple)
}

/// m⁻ − m⁺.
pub fn signature(sys: &CoefficientSequence, omega: UnitCircleParam, tol_zero: f64) -> Result<i64> {
    Ok(morse_indices(sys, omega, tol_zero)?.signature())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingPair {
    pub s_plus: i64,
    pub s_minus: i64,
    pub theta_probe: f64,
}

fn m_minus(sys: &CoefficientSequence, omega: UnitCircleParam, tol_zero: f64) -> Result<i64> {
    Ok(inertia(&assemble_hessian(sys, omega)?, tol_zero).m_minus as i64)
}

/// Probe scales tried in order as multiples of θ; each is checked against
/// a second scale eight times finer.
const PROBE_LADDER: [f64; 3] = [1.0, 8.0, 0.125];

/// First probe θ on the ladder at which the one-sided jumps agree at θ and
/// θ/8. Near a Jordan block σ_min(M − ωe^{iθ}) ~ θ², so the finer scale can
/// fall under the nullity threshold; near a second eigenvalue the coarser one
/// can cross it.
pub fn stabilized_probe(theta_probe: f64, jumps: impl Fn(f64) -> Result<(i64, i64)>) -> Result<SplittingPair> {
    let mut first = None;
    for k in PROBE_LADDER {
        let theta = theta_probe * k;
        let coarse = jumps(theta)?;
        let fine = jumps(theta / 8.0)?;
        if coarse == fine {
            return Ok(SplittingPair {
                s_plus: fine.0,
                s_minus: fine.1,
                theta_probe: theta,
            });
        }
        first.get_or_insert((coarse, fine));
    }
    let (coarse, fine) = first.expect("ladder is nonempty");
    Err(Error::ProbeTooLarge {
        theta: theta_probe,
        coarse,
        fine,
    })
}

/// One-sided jumps of m⁻ at ω·e^{±iθ}.
pub fn splitting_discrete(
    sys: &CoefficientSequence,
    omega: UnitCircleParam,
    theta_probe: f64,
    tol_zero: f64,
) -> Result<SplittingPair> {
    let base = m_minus(sys, omega, tol_zero)?;
    stabilized_probe(theta_probe, |theta| {
        Ok((
            m_minus(sys, omega.rotated(theta), tol_zero)? - base,
            m_minus(sys, omega.rotated(-theta), tol_zero)? - base,
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{free_eigenvectors, free_spectrum};
    use crate::symplectic::{random_symmetric, TOL_ZERO};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn free_examples() {
        let sys = CoefficientSequence::zero(1, 2);
        let form = assemble_hessian(&sys, UnitCircleParam::one()).unwrap();
        assert!(matches!(form.matrix, HessianMatrix::Real(_)));
        let ev = form.eigenvalues();
        for (x, y) in ev.iter().zip([-4.0, 0.0, 0.0, 4.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-13);
        }
        assert_eq!(inertia(&form, TOL_ZERO), MorseTriple { m_minus: 1, m_zero: 2, m_plus: 1 });
        let form = assemble_hessian(&sys, UnitCircleParam::minus_one()).unwrap();
        let r = 2.0 * 2f64.sqrt();
        for (x, y) in form.eigenvalues().iter().zip([-r, -r, r, r]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn probe_ladder() {
        // finer scales look degenerate below 1e-3: the ladder moves up to 8θ
        let jumps = |t: f64| Ok(if t >= 1e-3 { (1, 1) } else { (0, 0) });
        let sp = stabilized_probe(1e-3, jumps).unwrap();
        assert_eq!((sp.s_plus, sp.s_minus, sp.theta_probe), (1, 1, 8e-3));
        let sp = stabilized_probe(1e-3, |_| Ok((0, 1))).unwrap();
        assert_eq!(sp.theta_probe, 1e-3);
        let alternating = |t: f64| Ok(((t.log2().round() as i64).rem_euclid(2), 0));
        assert!(matches!(stabilized_probe(1.0, alternating), Err(Error::ProbeTooLarge { .. })));
    }

    #[test]
    fn inertia_examples() {
        assert_eq!(inertia_of(&[0.0; 5], TOL_ZERO), MorseTriple { m_minus: 0, m_zero: 5, m_plus: 0 });
        assert_eq!(inertia_of(&[1.0, -2.0, 0.0], TOL_ZERO), MorseTriple { m_minus: 1, m_zero: 1, m_plus: 1 });
    }

    #[test]
    fn free_hessian_matches_closed_form() {
        for m in 1..4 {
            for n in [2, 5, 8] {
                for a in [0.0, 0.9, PI, 4.4] {
                    let w = UnitCircleParam::new(a);
                    let h = 1.0 / n as f64;
                    let form = assemble_hessian(&CoefficientSequence::zero(m, n), w).unwrap();
                    let ev = form.eigenvalues();
                    let oracle = free_spectrum(m, n, h, w).unwrap().eigenvalues();
                    for (x, y) in ev.iter().zip(&oracle) {
                        assert!((x - y).abs() <= 1e-9);
                    }
                    for v in free_eigenvectors(m, n, h, w).unwrap() {
                        let z = v.flatten();
                        let r = form.apply(&z) - &z * Complex64::new(v.eigenvalue, 0.0);
                        assert!(r.camax() <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn sesquilinear_and_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let blocks = (0..5).map(|_| random_symmetric(4, 2.0, &mut rng)).collect();
        let sys = CoefficientSequence::new(2, blocks, None).unwrap();
        let form = assemble_hessian(&sys, UnitCircleParam::new(1.7)).unwrap();
        assert!(form.hermitian_residual() <= 1e-12);
        let rand_vec = |rng: &mut ChaCha8Rng| {
            DVector::from_fn(form.dim(), |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        };
        let z = rand_vec(&mut rng);
        let w = rand_vec(&mut rng);
        let a = Complex64::new(0.3, -1.2);
        let lhs = form.form(&(&z * a), &w);
        let rhs = form.form(&z, &w) * a;
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn free_indices_at_one() {
        for m in 1..3 {
            let n = 8;
            let t = morse_indices(&CoefficientSequence::zero(m, n), UnitCircleParam::one(), TOL_ZERO).unwrap();
            assert_eq!(t, MorseTriple { m_minus: m * n - m, m_zero: 2 * m, m_plus: m * n - m });
        }
    }

    #[test]
    fn rotation_system_examples() {
        let b1 = CoefficientSequence::constant(&(Mat::identity(2, 2) * PI), 8, None).unwrap();
        let t = morse_indices(&b1, UnitCircleParam::one(), TOL_ZERO).unwrap();
        assert_eq!(t, MorseTriple { m_minus: 9, m_zero: 0, m_plus: 7 });
        assert_eq!(signature(&b1, UnitCircleParam::one(), TOL_ZERO).unwrap(), 2);
        let b3 = CoefficientSequence::constant(&(Mat::identity(2, 2) * 3.0 * PI), 32, None).unwrap();
        let t = morse_indices(&b3, UnitCircleParam::one(), TOL_ZERO).unwrap();
        assert_eq!(t.m_plus, 29);
        assert_eq!(t.signature(), 6);
    }

    #[test]
    fn splitting_examples() {
        for m in 1..3 {
            let sys = CoefficientSequence::zero(m, 8);
            let s = splitting_discrete(&sys, UnitCircleParam::one(), 1e-3, TOL_ZERO).unwrap();
            assert_eq!((s.s_plus, s.s_minus), (m as i64, m as i64));
            let s = splitting_discrete(&sys, UnitCircleParam::minus_one(), 1e-3, TOL_ZERO).unwrap();
            assert_eq!((s.s_plus, s.s_minus), (0, 0));
        }
        let b1 = CoefficientSequence::constant(&(Mat::identity(2, 2) * PI), 8, None).unwrap();
        let s = splitting_discrete(&b1, UnitCircleParam::one(), 1e-3, TOL_ZERO).unwrap();
        assert_eq!((s.s_plus, s.s_minus), (0, 0));
    }

    #[test]
    fn binary_dump_roundtrip() {
        let sys = CoefficientSequence::zero(1, 3);
        let form = assemble_hessian(&sys, UnitCircleParam::new(0.4)).unwrap();
        let dir = std::env::temp_dir().join(format!("shdx-dump-{}", std::process::id()));
        form.write_binary(&dir).unwrap();
        let back = read_binary(&dir).unwrap();
        std::fs::remove_file(&dir).ok();
        assert_eq!(back, form.to_complex());
    }
}
