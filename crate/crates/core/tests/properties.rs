use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shdx::discrete::{extract_coefficients, fundamental_solution, joint_path, transfer_matrix_general, CoefficientSequence};
use shdx::harness::theorem_check;
use shdx::harness::RunOptions;
use shdx::linalg::{inverse, max_abs, Mat};
use shdx::morse::splitting_discrete;
use shdx::symplectic::{
    d_omega_complex, d_omega_scale, d_omega_with_tol, diamond, nullity_with_tol, random_symmetric, random_symplectic, rotation,
    shifted_svd, symplectic_residual, UnitCircleParam, TOL_SYMPL, TOL_ZERO,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// P·(R(θ) ⋄ Q)·P⁻¹: symplectic with e^{iθ} in its spectrum.
fn with_eigenvalue(m: usize, theta: f64, r: &mut ChaCha8Rng) -> Mat {
    let p = random_symplectic(m, r).into_matrix();
    let core = if m == 1 {
        rotation(theta)
    } else {
        diamond(&rotation(theta), random_symplectic(m - 1, r).matrix())
    };
    &p * core * inverse(&p).expect("symplectic is invertible")
}

/// Block scaled so that max|hB| stays inside the step gate.
fn gated_block(m: usize, h: f64, r: &mut ChaCha8Rng) -> Mat {
    let s = random_symmetric(2 * m, 1.0, r);
    &s * (0.45 / h / max_abs(&s).max(1e-12) * r.gen_range(0.05..=1.0))
}

#[test]
fn d_omega_is_real_on_random_symplectic_matrices() {
    let mut r = rng(1000);
    let omegas: Vec<UnitCircleParam> = (0..16).map(|_| UnitCircleParam::new(r.gen_range(0.0..std::f64::consts::TAU))).collect();
    for _ in 0..1000 {
        let m = r.gen_range(1..=3);
        let a = random_symplectic(m, &mut r).into_matrix();
        assert!(symplectic_residual(&a).unwrap() <= TOL_SYMPL);
        for &w in &omegas {
            let d = d_omega_complex(&a, w).unwrap();
            assert!(d.im.abs() <= 1e-10 * d_omega_scale(&a, w), "Im D = {:e}", d.im);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn nullity_matches_vanishing_determinant(seed in any::<u64>(), m in 1usize..=3, theta in 0.05f64..3.1, degenerate in any::<bool>()) {
        let mut r = rng(seed);
        let w = UnitCircleParam::new(theta);
        let a = if degenerate { with_eigenvalue(m, theta, &mut r) } else { random_symplectic(m, &mut r).into_matrix() };
        let nu = nullity_with_tol(&a, w, TOL_ZERO);
        // |D_ω| = Π σ_i, so a vanishing smallest singular value shows up as
        // |D_ω| below the threshold times the remaining singular values
        let (sv, _) = shifted_svd(&a, w);
        let tau = TOL_ZERO * sv[0].max(shdx::linalg::spectral_norm(&a)).max(1.0);
        let rest: f64 = sv[..sv.len() - 1].iter().product();
        let d = d_omega_complex(&a, w).unwrap().norm();
        prop_assert_eq!(nu > 0, d <= tau * rest * (1.0 + 1e-6));
        if degenerate {
            prop_assert!(nu >= 1);
        }
    }

    #[test]
    fn diamond_adds_nullities(seed in any::<u64>(), m1 in 1usize..=2, m2 in 1usize..=2, theta in 0.05f64..3.1) {
        let mut r = rng(seed);
        let w = UnitCircleParam::new(theta);
        let a = if r.gen_bool(0.5) { with_eigenvalue(m1, theta, &mut r) } else { random_symplectic(m1, &mut r).into_matrix() };
        let b = if r.gen_bool(0.5) { with_eigenvalue(m2, theta, &mut r) } else { random_symplectic(m2, &mut r).into_matrix() };
        let ab = diamond(&a, &b);
        prop_assert!(symplectic_residual(&ab).unwrap() <= TOL_SYMPL);
        prop_assert_eq!(nullity_with_tol(&ab, w, TOL_ZERO), nullity_with_tol(&a, w, TOL_ZERO) + nullity_with_tol(&b, w, TOL_ZERO));
        let d = d_omega_with_tol(&ab, w, TOL_SYMPL).unwrap();
        // the (−1)^{m−1} prefactor makes D_ω anti-multiplicative under ⋄
        let prod = -d_omega_with_tol(&a, w, TOL_SYMPL).unwrap() * d_omega_with_tol(&b, w, TOL_SYMPL).unwrap();
        prop_assert!((d - prod).abs() <= 1e-9 * prod.abs().max(1.0));
    }

    #[test]
    fn transfer_is_symplectic_iff_block_is_symmetric(seed in any::<u64>(), m in 1usize..=3, n in prop::sample::select(vec![8usize, 16, 32])) {
        let mut r = rng(seed);
        let h = 1.0 / n as f64;
        let b = gated_block(m, h, &mut r);
        let x = transfer_matrix_general(&b, h).unwrap();
        prop_assert!(symplectic_residual(&x).unwrap() <= TOL_SYMPL);
        let back = extract_coefficients(&x, h).unwrap();
        prop_assert!(max_abs(&(back - &b)) <= 1e-12);
        let mut a = b.clone();
        let i = r.gen_range(0..2 * m);
        let j = (i + r.gen_range(1..2 * m)) % (2 * m);
        a[(i, j)] += r.gen_range(0.1..1.0) / h;
        if let Some(y) = transfer_matrix_general(&a, h) {
            prop_assert!(symplectic_residual(&y).unwrap() > TOL_SYMPL);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn index_identities_on_random_systems(seed in any::<u64>(), m in 1usize..=2, n in prop::sample::select(vec![4usize, 6, 8]), angle in 0.0f64..std::f64::consts::TAU) {
        let mut r = rng(seed);
        let h = 1.0 / n as f64;
        let blocks = (0..n).map(|_| gated_block(m, h, &mut r)).collect();
        let sys = CoefficientSequence::new(m, blocks, None).unwrap();
        let w = UnitCircleParam::new(angle);
        let c = theorem_check(&sys, w, &RunOptions::default()).unwrap();
        prop_assert_eq!(c.residuals, [0, 0, 0]);
        prop_assert_eq!(c.triple.m_zero, c.nu);
        if c.nu == 0 {
            prop_assert_eq!(c.triple.signature(), 2 * c.i);
        }
        let sp = splitting_discrete(&sys, w, 1e-3, TOL_ZERO).unwrap();
        prop_assert!(sp.s_plus >= 0 && sp.s_minus >= 0);
        prop_assert!(sp.s_plus as usize <= c.nu && sp.s_minus as usize <= c.nu);
    }

    #[test]
    fn fundamental_solution_and_joint_path(seed in any::<u64>(), m in 1usize..=3, n in 2usize..=12) {
        let mut r = rng(seed);
        let h = 1.0 / n as f64;
        let blocks: Vec<Mat> = (0..n).map(|_| gated_block(m, h, &mut r)).collect();
        let sys = CoefficientSequence::new(m, blocks, None).unwrap();
        let sol = fundamental_solution(&sys).unwrap();
        prop_assert_eq!(sol.gamma(0), &Mat::identity(2 * m, 2 * m));
        for k in 0..n {
            let step = sol.transfer(k) * sol.gamma(k);
            prop_assert!(max_abs(&(step - sol.gamma(k + 1))) <= 1e-12 * max_abs(sol.gamma(k + 1)).max(1.0));
            prop_assert!(symplectic_residual(sol.gamma(k + 1)).unwrap() <= TOL_SYMPL * max_abs(sol.gamma(k + 1)).powi(2).max(1.0));
        }
        let path = joint_path(&sol);
        prop_assert!(path.joint_discontinuity() <= 1e-12 * max_abs(sol.gamma(n)).max(1.0));
        for k in 0..=n {
            prop_assert!(max_abs(&(path.value(k as f64 / n as f64) - sol.gamma(k))) <= 1e-12 * max_abs(sol.gamma(k)).max(1.0));
        }
    }
}
