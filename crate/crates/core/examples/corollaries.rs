//! Signature, splitting and step-size checks for a continuous coefficient.

use shdx::continuous::Generator;
use shdx::harness::{run_corollaries, Coefficients, Discretization, OmegaItem, OmegaSpec, RunOptions, SystemDefinition};

fn main() -> shdx::Result<()> {
    let def = SystemDefinition {
        m: 1,
        n: 16,
        h: None,
        omega: OmegaSpec::Many(vec![OmegaItem::Angle(0.0), OmegaItem::Angle(2.0)]),
        coefficients: Coefficients::Continuous(Generator::Standard { j: 1 }),
        discretization: Discretization::default(),
    };
    let r = run_corollaries(&def, 3, &RunOptions::default())?;
    for c in &r.checks {
        println!("{:5} {} α {:.3} N {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.omega_angle, c.n, c.detail);
    }
    Ok(())
}
