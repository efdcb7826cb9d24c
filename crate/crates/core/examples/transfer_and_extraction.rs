//! One-step transfer matrices and recovering the coefficient block from them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use shdx::discrete::{extract_coefficients, fundamental_solution, transfer_matrix, transfer_matrix_general, CoefficientSequence};
use shdx::linalg::max_abs;
use shdx::symplectic::{random_symmetric, symplectic_residual};

fn main() -> shdx::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1.0 / 16.0;
    let b = random_symmetric(4, 3.0, &mut rng);
    let s = transfer_matrix(&b, h)?;
    println!("S_h residual {:.2e}", s.residual());
    let back = extract_coefficients(s.matrix(), h)?;
    println!("roundtrip error {:.2e}", max_abs(&(back - &b)));

    let mut skew = b.clone();
    skew[(0, 3)] += 1.0;
    let x = transfer_matrix_general(&skew, h).expect("invertible");
    println!("non-symmetric block: residual {:.2e}", symplectic_residual(&x)?);

    let sys = CoefficientSequence::new(2, (0..16).map(|_| random_symmetric(4, 3.0, &mut rng)).collect(), None)?;
    let sol = fundamental_solution(&sys)?;
    println!("γ_N =\n{}", sol.monodromy().matrix());
    println!("Floquet residual {:.2e}", sol.floquet_residual());
    Ok(())
}
