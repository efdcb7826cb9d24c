//! Index pairs of symplectic paths and their crossing records.

use std::f64::consts::PI;
use std::sync::Arc;

use shdx::linalg::j_matrix;
use shdx::maslov::{maslov_index, maslov_index_detailed, write_crossings_csv, ScanConfig};
use shdx::path::PiecewisePath;
use shdx::symplectic::{rotation, standard_path, UnitCircleParam};

fn main() -> shdx::Result<()> {
    let spin = PiecewisePath::smooth(1, Arc::new(|t| rotation(8.0 * t)), Arc::new(|t| j_matrix(1) * rotation(8.0 * t) * 8.0));
    let w = UnitCircleParam::new(1.0);
    let d = maslov_index_detailed(&spin, w, &ScanConfig::default())?;
    println!("R(8t) at ω = e^i: {:?}", d.pair);
    write_crossings_csv(&d.crossings, std::io::stdout())?;

    for j in -2..=3 {
        let p = standard_path(2, j)?.to_path();
        println!("β̂_{j} (m = 2) at ω = 1: {:?}", maslov_index(&p, UnitCircleParam::one())?);
    }
    let full = PiecewisePath::smooth(1, Arc::new(|t| rotation(2.0 * PI * t)), Arc::new(|t| j_matrix(1) * rotation(2.0 * PI * t) * (2.0 * PI)));
    let d = maslov_index_detailed(&full, UnitCircleParam::one(), &ScanConfig::default())?;
    println!("R(2πt) at ω = 1: {:?}, perturbation {:?}", d.pair, d.perturbation);
    Ok(())
}
