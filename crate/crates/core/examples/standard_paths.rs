//! Standard paths β̂_j and their coefficients B̂_j.

use shdx::linalg::max_abs;
use shdx::symplectic::{standard_path, symplectic_residual};

fn main() -> shdx::Result<()> {
    for (m, j) in [(1, 0), (1, 3), (1, 2), (1, -2), (2, 1), (2, 2), (3, -1)] {
        let p = standard_path(m, j)?;
        let worst = (0..=16)
            .map(|k| symplectic_residual(&p.value(k as f64 / 16.0)).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        println!(
            "m {m} j {j:+}: constant coefficient {}, max|B̂| at t=1/4 {:.4}, symplectic residual {worst:.1e}",
            p.is_constant(),
            max_abs(&p.coefficient(0.25)),
        );
    }
    println!("β̂_3(1) =\n{}", standard_path(1, 3)?.value(1.0));
    Ok(())
}
