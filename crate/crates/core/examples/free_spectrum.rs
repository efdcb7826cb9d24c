//! Eigenvalues of the free action form against the closed form.

use std::f64::consts::PI;

use shdx::discrete::CoefficientSequence;
use shdx::morse::assemble_hessian;
use shdx::spectral::{free_eigenvectors, free_spectrum, recursion_residual};
use shdx::symplectic::UnitCircleParam;

fn main() -> shdx::Result<()> {
    let (m, n) = (2, 6);
    let h = 1.0 / n as f64;
    for alpha in [0.0, PI / 3.0, PI] {
        let w = UnitCircleParam::new(alpha);
        let spec = free_spectrum(m, n, h, w)?;
        let mut closed = spec.eigenvalues();
        closed.sort_by(f64::total_cmp);
        let mut assembled = assemble_hessian(&CoefficientSequence::zero(m, n), w)?.eigenvalues();
        assembled.sort_by(f64::total_cmp);
        let dev = closed.iter().zip(&assembled).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("α = {alpha:.4}: distinct eigenvalues with multiplicity {:?}", spec.entries);
        println!("  max deviation from the assembled form {dev:.2e}");
        let worst = free_eigenvectors(m, n, h, w)?
            .iter()
            .map(|v| recursion_residual(v, h, w))
            .fold(0.0, f64::max);
        println!("  eigenvector recursion residual {worst:.2e}");
    }
    Ok(())
}
