//! Splitting numbers from the action form and from the endpoint of the path.

use shdx::discrete::{fundamental_solution, joint_path, CoefficientSequence};
use shdx::maslov::{splitting_endpoint, ScanConfig};
use shdx::morse::splitting_discrete;
use shdx::symplectic::{UnitCircleParam, TOL_ZERO};

fn main() -> shdx::Result<()> {
    for m in 1..=3 {
        let sys = CoefficientSequence::zero(m, 8);
        let path = joint_path(&fundamental_solution(&sys)?);
        let w = UnitCircleParam::one();
        let a = splitting_discrete(&sys, w, 1e-3, TOL_ZERO)?;
        let b = splitting_endpoint(&path, w, 1e-3, &ScanConfig::default())?;
        println!("B = 0, m = {m}: action form ({}, {}), endpoint ({}, {})", a.s_plus, a.s_minus, b.s_plus, b.s_minus);
    }
    Ok(())
}
