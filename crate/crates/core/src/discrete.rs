//! Discrete linear Hamiltonian systems: coefficient sequences, transfer
//! matrices, coefficient extraction, fundamental solutions and the
//! interpolated joint path.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, block, condition_number, from_blocks, inverse, max_abs, Mat};
use crate::path::{PiecewisePath, Segment};
use crate::symplectic::SymplecticMatrix;

/// Largest admissible condition number of I + hCᵀ.
pub const MAX_COND: f64 = 1e6;
/// Largest admissible ‖hB_n‖_max.
pub const MAX_STEP_NORM: f64 = 0.5;

/// N-periodic sequence of symmetric blocks B_n = [[A_n, C_n], [C_nᵀ, D_n]].
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    m: usize,
    h: f64,
    blocks: Vec<Mat>,
}

impl CoefficientSequence {
    /// Validates shapes, symmetry and the step-size gates. `h` defaults to 1/N.
    pub fn new(m: usize, blocks: Vec<Mat>, h: Option<f64>) -> Result<Self> {
        if m == 0 || blocks.is_empty() {
            return Err(Error::Dimension("need m ≥ 1 and N ≥ 1".into()));
        }
        let mut sym = Vec::with_capacity(blocks.len());
        for (n, b) in blocks.into_iter().enumerate() {
            if b.nrows() != 2 * m || b.ncols() != 2 * m {
                return Err(Error::Dimension(format!(
                    "block {n} is {}x{}, expected {}x{}",
                    b.nrows(),
                    b.ncols(),
                    2 * m,
                    2 * m
                )));
            }
            let residual = asymmetry(&b);
            if residual > 1e-14 * max_abs(&b).max(1.0) {
                return Err(Error::NotSymmetric { residual });
            }
            sym.push(crate::linalg::symmetric_part(&b));
        }
        let h = h.unwrap_or(1.0 / sym.len() as f64);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Input(format!("step size must be positive, got {h}")));
        }
        let seq = Self { m, h, blocks: sym };
        seq.check_gates()?;
        Ok(seq)
    }

    pub fn constant(b: &Mat, n: usize, h: Option<f64>) -> Result<Self> {
        Self::new(b.nrows() / 2, vec![b.clone(); n], h)
    }

    pub fn zero(m: usize, n: usize) -> Self {
        Self {
            m,
            h: 1.0 / n as f64,
            blocks: vec![Mat::zeros(2 * m, 2 * m); n],
        }
    }

    /// Node sampling B_n = B(n/N) of a coefficient function on [0, 1].
    pub fn sample(m: usize, n: usize, f: impl Fn(f64) -> Mat) -> Result<Self> {
        let blocks = (0..n).map(|k| f(k as f64 / n as f64)).collect();
        Self::new(m, blocks, None)
    }

    fn check_gates(&self) -> Result<()> {
        let m = self.m;
        for (n, b) in self.blocks.iter().enumerate() {
            let norm = self.h * max_abs(b);
            if norm > MAX_STEP_NORM {
                return Err(Error::StepTooLarge {
                    n,
                    reason: format!("‖hB‖_max = {norm:.3} exceeds {MAX_STEP_NORM}"),
                });
            }
            let hct = block(b, 0, 1).transpose() * self.h;
            let cond = condition_number(&(Mat::identity(m, m) + &hct));
            if cond > MAX_COND {
                return Err(Error::StepTooLarge {
                    n,
                    reason: format!("cond(I + hCᵀ) = {cond:.3e} exceeds {MAX_COND:.0e}"),
                });
            }
            // I + s·hCᵀ must stay invertible on the whole interpolation segment
            let bad = hct
                .complex_eigenvalues()
                .iter()
                .any(|ev| ev.im.abs() < 1e-12 && ev.re <= -1.0);
            if bad {
                return Err(Error::StepTooLarge {
                    n,
                    reason: "I + shCᵀ singular for some s in (0, 1]".into(),
                });
            }
        }
        Ok(())
    }

    pub fn dim_half(&self) -> usize {
        self.m
    }

    pub fn period(&self) -> usize {
        self.blocks.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    /// B_n with periodic indexing.
    pub fn block(&self, n: usize) -> &Mat {
        &self.blocks[n % self.blocks.len()]
    }

    pub fn a(&self, n: usize) -> Mat {
        block(self.block(n), 0, 0)
    }

    pub fn c(&self, n: usize) -> Mat {
        block(self.block(n), 0, 1)
    }

    pub fn d(&self, n: usize) -> Mat {
        block(self.block(n), 1, 1)
    }

    /// The family member B_{s,n} = s·B_n.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.m, self.blocks.iter().map(|b| b * s).collect(), Some(self.h))
    }
}

/// Transfer matrix built from a general (possibly non-symmetric) block
/// [[A, C], [F, D]]; `None` if I + hF is singular.
pub fn transfer_matrix_general(b: &Mat, h: f64) -> Option<Mat> {
    let m = b.nrows() / 2;
    let (a, c, f, d) = (block(b, 0, 0), block(b, 0, 1), block(b, 1, 0), block(b, 1, 1));
    let g = inverse(&(Mat::identity(m, m) + f * h))?;
    let s11 = g.clone();
    let s12 = -(&g * &d) * h;
    let s21 = &a * &g * h;
    let s22 = -(&a * &g * &d) * (h * h) + Mat::identity(m, m) + c * h;
    Some(from_blocks(&s11, &s12, &s21, &s22))
}

/// One-step propagator S_{n,h} for a symmetric block.
pub fn transfer_matrix(b: &Mat, h: f64) -> Result<SymplecticMatrix> {
    transfer_matrix_general(b, h)
        .map(SymplecticMatrix::new_unchecked)
        .ok_or_else(|| Error::StepTooLarge {
            n: 0,
            reason: "I + hCᵀ is singular".into(),
        })
}

/// d/ds of S_{n,s,h}, the transfer matrix with step sh.
pub fn transfer_derivative(b: &Mat, h: f64, s: f64) -> Option<Mat> {
    let m = b.nrows() / 2;
    let (a, c, d) = (block(b, 0, 0), block(b, 0, 1), block(b, 1, 1));
    let ct = c.transpose();
    let g = inverse(&(Mat::identity(m, m) + &ct * (s * h)))?;
    let gp = -(&g * &ct * &g) * h;
    let sh = s * h;
    let d11 = gp.clone();
    let d12 = -(&g * &d) * h - &gp * &d * sh;
    let d21 = &a * &g * h + &a * &gp * sh;
    let d22 = -(&a * &g * &d) * (2.0 * s * h * h) - &a * &gp * &d * (sh * sh) + c * h;
    Some(from_blocks(&d11, &d12, &d21, &d22))
}

/// Recovers the symmetric block B with transfer_matrix(B, h) = X.
pub fn extract_coefficients(x: &Mat, h: f64) -> Result<Mat> {
    let m = x.nrows() / 2;
    let x11 = block(x, 0, 0);
    let g = inverse(&x11).ok_or_else(|| Error::Extraction("X₁₁ is singular".into()))?;
    // I + hCᵀ = X₁₁⁻¹
    let hc = (&g - Mat::identity(m, m)).transpose();
    let ha = block(x, 1, 0) * &g;
    let hd = -(&g * block(x, 0, 1));
    let b = from_blocks(&ha, &hc, &hc.transpose(), &hd) / h;
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Extraction("recovered block is not finite".into()));
    }
    let residual = asymmetry(&b);
    if residual > 1e-10 * max_abs(&b).max(1.0) {
        return Err(Error::NotSymplectic { residual, tol: 1e-10 });
    }
    Ok(crate::linalg::symmetric_part(&b))
}

/// γ_0, …, γ_N together with the transfer matrices that produced them.
#[derive(Debug, Clone)]
pub struct DiscreteFundamentalSolution {
    system: CoefficientSequence,
    transfers: Vec<Mat>,
    gammas: Vec<Mat>,
}

pub fn fundamental_solution(system: &CoefficientSequence) -> Result<DiscreteFundamentalSolution> {
    let m = system.dim_half();
    let mut gammas = Vec::with_capacity(system.period() + 1);
    let mut transfers = Vec::with_capacity(system.period());
    gammas.push(Mat::identity(2 * m, 2 * m));
    for (n, b) in system.blocks().iter().enumerate() {
        let s = transfer_matrix_general(b, system.h()).ok_or_else(|| Error::StepTooLarge {
            n,
            reason: "I + hCᵀ is singular".into(),
        })?;
        let next = &s * gammas.last().expect("nonempty");
        transfers.push(s);
        gammas.push(next);
    }
    Ok(DiscreteFundamentalSolution {
        system: system.clone(),
        transfers,
        gammas,
    })
}

impl DiscreteFundamentalSolution {
    pub fn system(&self) -> &CoefficientSequence {
        &self.system
    }

    pub fn period(&self) -> usize {
        self.transfers.len()
    }

    /// γ_n for 0 ≤ n ≤ N.
    pub fn gamma(&self, n: usize) -> &Mat {
        &self.gammas[n]
    }

    pub fn gammas(&self) -> &[Mat] {
        &self.gammas
    }

    pub fn transfer(&self, n: usize) -> &Mat {
        &self.transfers[n]
    }

    /// γ_N = γ_{d,h,N}(1).
    pub fn monodromy(&self) -> SymplecticMatrix {
        SymplecticMatrix::new_unchecked(self.gammas[self.period()].clone())
    }

    /// Periodically extended solution γ_n for any n ≥ 0, by recursion.
    pub fn extended(&self, n: usize) -> Mat {
        let big_n = self.period();
        if n <= big_n {
            return self.gammas[n].clone();
        }
        let mut g = self.gammas[big_n].clone();
        for k in big_n..n {
            g = &self.transfers[k % big_n] * g;
        }
        g
    }

    /// Largest ‖γ_{n+N} − γ_n γ_N‖_max for 0 ≤ n ≤ N.
    pub fn floquet_residual(&self) -> f64 {
        let big_n = self.period();
        let mono = &self.gammas[big_n];
        (0..=big_n)
            .map(|n| max_abs(&(self.extended(n + big_n) - &self.gammas[n] * mono)))
            .fold(0.0, f64::max)
    }
}

/// S_{n,s,h}·γ_n.
pub fn interpolation_segment(b: &Mat, gamma_n: &Mat, h: f64, s: f64) -> Result<Mat> {
    let sm = transfer_matrix_general(b, s * h).ok_or_else(|| Error::StepTooLarge {
        n: 0,
        reason: format!("I + shCᵀ singular at s = {s}"),
    })?;
    Ok(sm * gamma_n)
}

/// Joint path: segment n is s ↦ S_{n,s,h}γ_n on [n/N, (n+1)/N].
pub fn joint_path(sol: &DiscreteFundamentalSolution) -> PiecewisePath {
    let big_n = sol.period();
    let h = sol.system.h();
    let m = sol.system.dim_half();
    let segments = (0..big_n)
        .map(|n| {
            let b = Arc::new(sol.system.block(n).clone());
            let g = Arc::new(sol.gammas[n].clone());
            let (b1, g1) = (b.clone(), g.clone());
            Segment::new(
                n as f64 / big_n as f64,
                (n + 1) as f64 / big_n as f64,
                Arc::new(move |s| {
                    transfer_matrix_general(&b1, s * h).expect("gated step") * g1.as_ref()
                }),
                Arc::new(move |s| transfer_derivative(&b, h, s).expect("gated step") * g.as_ref()),
            )
        })
        .collect();
    PiecewisePath::new(m, segments).expect("uniform segments")
}

/// Discretization that interpolates a continuous path exactly at t_n = n/N.
pub fn discretize_continuous(
    gamma: &dyn Fn(f64) -> Mat,
    m: usize,
    big_n: usize,
) -> Result<(CoefficientSequence, DiscreteFundamentalSolution)> {
    let h = 1.0 / big_n as f64;
    let nodes: Vec<Mat> = (0..=big_n).map(|n| gamma(n as f64 * h)).collect();
    let mut blocks = Vec::with_capacity(big_n);
    for n in 0..big_n {
        let step = &nodes[n + 1] * crate::linalg::symplectic_inverse(&nodes[n]);
        let b = extract_coefficients(&step, h).map_err(|e| Error::RefineN {
            n,
            reason: e.to_string(),
        })?;
        blocks.push(b);
    }
    let seq = CoefficientSequence::new(m, blocks, Some(h)).map_err(|e| match e {
        Error::StepTooLarge { n, reason } => Error::RefineN { n, reason },
        other => other,
    })?;
    let sol = fundamental_solution(&seq)?;
    Ok((seq, sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{check_symplectic, k_matrix, random_symmetric, rotation, TOL_SYMPL};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn transfer_examples() {
        assert_eq!(transfer_matrix(&Mat::zeros(4, 4), 0.3).unwrap().matrix(), &Mat::identity(4, 4));
        let b = nalgebra::dmatrix![1.0, 0.0; 0.0, 1.0];
        let s = transfer_matrix(&b, 0.5).unwrap();
        assert_abs_diff_eq!(s.matrix(), &nalgebra::dmatrix![1.0, -0.5; 0.5, 0.75], epsilon = 1e-15);
        assert_abs_diff_eq!(s.matrix().determinant(), 1.0, epsilon = 1e-15);
        let h = 0.2;
        let s = transfer_matrix(&(k_matrix() * LN_2), h).unwrap();
        let e = nalgebra::dmatrix![1.0 / (1.0 + h * LN_2), 0.0; 0.0, 1.0 + h * LN_2];
        assert_abs_diff_eq!(s.matrix(), &e, epsilon = 1e-15);
    }

    #[test]
    fn extraction_examples() {
        assert_eq!(extract_coefficients(&Mat::identity(2, 2), 0.1).unwrap(), Mat::zeros(2, 2));
        let x = nalgebra::dmatrix![1.0, -0.5; 0.5, 0.75];
        let b = extract_coefficients(&x, 0.5).unwrap();
        assert_abs_diff_eq!(b, Mat::identity(2, 2), epsilon = 1e-15);
    }

    #[test]
    fn extraction_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let m = rng.gen_range(1..4);
            let h = 0.05;
            let mut b = random_symmetric(2 * m, 1.0, &mut rng);
            let scale = 0.1 / (h * max_abs(&b));
            if scale < 1.0 {
                b *= scale;
            }
            let x = transfer_matrix(&b, h).unwrap();
            let back = extract_coefficients(x.matrix(), h).unwrap();
            assert!(max_abs(&(back - &b)) <= 1e-12);
        }
    }

    #[test]
    fn interpolation_examples() {
        let b = k_matrix() * LN_2;
        let g = Mat::identity(2, 2);
        assert_eq!(interpolation_segment(&b, &g, 0.125, 0.0).unwrap(), g);
        let half = interpolation_segment(&b, &g, 0.125, 0.5).unwrap();
        let c = 1.0 + LN_2 / 16.0;
        assert_abs_diff_eq!(half, nalgebra::dmatrix![1.0 / c, 0.0; 0.0, c], epsilon = 1e-15);
        let one = interpolation_segment(&b, &g, 0.125, 1.0).unwrap();
        assert_abs_diff_eq!(one, transfer_matrix(&b, 0.125).unwrap().into_matrix(), epsilon = 1e-15);
    }

    #[test]
    fn gates_reject_large_steps() {
        let b = Mat::identity(2, 2) * 10.0;
        assert!(matches!(
            CoefficientSequence::constant(&b, 8, None),
            Err(Error::StepTooLarge { n: 0, .. })
        ));
        assert!(CoefficientSequence::constant(&b, 32, None).is_ok());
    }

    #[test]
    fn fundamental_solution_tracks_rk4() {
        // oracle: classical RK4 for ż = JπI z
        let j = crate::linalg::j_matrix(1);
        let f = |z: &Mat| &j * z * PI;
        let mut z = Mat::identity(2, 2);
        let steps = 4000;
        let dt = 1.0 / steps as f64;
        for _ in 0..steps {
            let k1 = f(&z);
            let k2 = f(&(&z + &k1 * (dt / 2.0)));
            let k3 = f(&(&z + &k2 * (dt / 2.0)));
            let k4 = f(&(&z + &k3 * dt));
            z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        assert!(max_abs(&(&z - rotation(PI))) < 1e-10);
        let mut prev = f64::INFINITY;
        for big_n in [64, 128, 256, 512] {
            let seq = CoefficientSequence::constant(&(Mat::identity(2, 2) * PI), big_n, None).unwrap();
            let sol = fundamental_solution(&seq).unwrap();
            let err = max_abs(&(sol.monodromy().into_matrix() - &z));
            if big_n == 64 {
                assert!(err <= 0.2, "err {err}");
            }
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn floquet_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let blocks = (0..8).map(|_| random_symmetric(4, 2.0, &mut rng)).collect();
        let seq = CoefficientSequence::new(2, blocks, None).unwrap();
        let sol = fundamental_solution(&seq).unwrap();
        assert!(sol.floquet_residual() < 1e-12);
        for g in sol.gammas() {
            assert!(check_symplectic(g, TOL_SYMPL).unwrap());
        }
    }

    #[test]
    fn joint_path_nodes_and_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let blocks = (0..6).map(|_| random_symmetric(4, 2.5, &mut rng)).collect();
        let seq = CoefficientSequence::new(2, blocks, None).unwrap();
        let sol = fundamental_solution(&seq).unwrap();
        let path = joint_path(&sol);
        assert!(path.joint_discontinuity() <= 1e-12);
        for n in 0..=6 {
            assert!(max_abs(&(path.value(n as f64 / 6.0) - sol.gamma(n))) <= 1e-12);
        }
        for _ in 0..100 {
            let t: f64 = rng.gen_range(0.001..0.999);
            let seg = (t * 6.0).floor();
            let local = t * 6.0 - seg;
            if !(0.01..0.99).contains(&local) {
                continue;
            }
            let d = 1e-5;
            let fd = (path.value(t + d) - path.value(t - d)) / (2.0 * d);
            assert!(max_abs(&(fd - path.derivative(t))) < 1e-6);
        }
    }

    #[test]
    fn discretize_examples() {
        let (seq, _) = discretize_continuous(&|_| Mat::identity(2, 2), 1, 8).unwrap();
        assert!(seq.blocks().iter().all(|b| max_abs(b) == 0.0));
        let (_, sol) = discretize_continuous(&|t| rotation(PI * t), 1, 16).unwrap();
        for n in 0..=16 {
            assert!(max_abs(&(sol.gamma(n) - rotation(PI * n as f64 / 16.0))) <= 1e-12);
        }
        let jb = crate::linalg::j_matrix(1) * k_matrix() * LN_2;
        let (seq, _) = discretize_continuous(&|t| (&jb * t).exp(), 1, 32).unwrap();
        for b in seq.blocks() {
            assert!(max_abs(&(b - k_matrix() * LN_2)) <= 5.0 / 32.0);
        }
    }
}
