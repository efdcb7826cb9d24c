//! Node error of the discretization against the reference integrator.

use shdx::continuous::{Generator, TrigTerm};
use shdx::harness::run_convergence;

fn main() -> shdx::Result<()> {
    let g = Generator::Trig {
        base: vec![vec![1.0, 0.2], vec![0.2, 2.0]],
        terms: vec![TrigTerm {
            amp: vec![vec![0.5, 0.0], vec![0.0, -0.5]],
            freq: 2.0,
            phase: 0.0,
        }],
    };
    let r = run_convergence(&g, 1, &[8, 16, 32, 64, 128])?;
    for row in &r.rows {
        println!("N {:4} ε {:.3e} order {}", row.n, row.eps, row.order_estimate.map_or("-".into(), |p| format!("{p:.3}")));
    }
    println!("monotone {}", r.monotone);
    for u in &r.s_uniformity {
        println!("N {}: max over s {:.3e} vs s = 1 {:.3e} ({})", u.n, u.max_eps, u.eps_s1, u.passed);
    }
    Ok(())
}
