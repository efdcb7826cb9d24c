//! Inertia of the discrete action form and the binary Hessian dump.

use std::f64::consts::PI;

use shdx::discrete::CoefficientSequence;
use shdx::morse::{assemble_hessian, morse_indices, read_binary};
use shdx::symplectic::{standard_path, UnitCircleParam, TOL_ZERO};

fn main() -> shdx::Result<()> {
    let p = standard_path(1, 2)?;
    let sys = CoefficientSequence::sample(1, 64, |t| p.coefficient(t))?;
    for w in [UnitCircleParam::one(), UnitCircleParam::minus_one(), UnitCircleParam::new(PI / 3.0)] {
        let t = morse_indices(&sys, w, TOL_ZERO)?;
        println!("α = {:.4}: m⁻ {} m⁰ {} m⁺ {} signature {}", w.angle(), t.m_minus, t.m_zero, t.m_plus, t.signature());
    }
    let form = assemble_hessian(&sys, UnitCircleParam::new(1.0))?;
    let path = std::env::temp_dir().join("shdx-hessian.bin");
    form.write_binary(&path)?;
    let back = read_binary(&path)?;
    println!("dumped {}×{} Hessian, hermitian residual {:.1e}", back.nrows(), back.ncols(), form.hermitian_residual());
    std::fs::remove_file(&path).ok();
    Ok(())
}
