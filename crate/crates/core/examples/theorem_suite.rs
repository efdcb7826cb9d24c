//! A small randomized run of the index identities, including tuned degenerate systems.

use shdx::harness::{run_theorem_suite, RunOptions, SuiteConfig};

fn main() -> shdx::Result<()> {
    let cfg = SuiteConfig {
        trials: 12,
        degenerate: 4,
        ..SuiteConfig::default()
    };
    let s = run_theorem_suite(&cfg, &RunOptions::default())?;
    println!("{} systems, {} checks, {} failures, {} perturbed", s.systems, s.checks, s.failures, s.perturbed);
    for r in s.rows.iter().filter(|r| r.degenerate) {
        println!(
            "degenerate m {} N {} α {:.3}: i {} ν {} (m⁻ {}, m⁰ {}, m⁺ {})",
            r.m, r.n, r.omega_angle, r.i_omega, r.nu_omega, r.m_minus, r.m_zero, r.m_plus
        );
    }
    Ok(())
}
