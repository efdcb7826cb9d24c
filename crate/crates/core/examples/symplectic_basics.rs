//! Normal forms, the ⋄-product, D_ω and nullity.

use std::f64::consts::PI;

use shdx::symplectic::{check_symplectic, d_omega, diamond_product, nullity, NormalForm, SymplecticMatrix, UnitCircleParam, TOL_SYMPL};

fn main() -> shdx::Result<()> {
    let forms = [
        NormalForm::Hyperbolic { lambda: 2.0 },
        NormalForm::Jordan { lambda: 1.0, b: 1.0 },
        NormalForm::Rotation { theta: PI / 3.0 },
        NormalForm::Jordan2 {
            theta: PI / 4.0,
            b1: 1.0,
            b2: 0.0,
            b3: 1.0,
        },
    ];
    let omegas = [UnitCircleParam::one(), UnitCircleParam::minus_one(), UnitCircleParam::new(PI / 3.0)];
    for f in &forms {
        let a = f.matrix()?;
        let m = SymplecticMatrix::new(a.clone(), TOL_SYMPL)?;
        print!("{f:?}\n  symplectic {}", check_symplectic(&a, TOL_SYMPL)?);
        for w in omegas {
            print!("  D_ω(α={:.3}) = {:+.4} ν = {}", w.angle(), d_omega(&m, w)?, nullity(&m, w));
        }
        println!();
    }
    let r = SymplecticMatrix::new(NormalForm::Rotation { theta: PI / 3.0 }.matrix()?, TOL_SYMPL)?;
    let d = SymplecticMatrix::new(NormalForm::Hyperbolic { lambda: 2.0 }.matrix()?, TOL_SYMPL)?;
    let rd = diamond_product(&r, &d);
    let rr = diamond_product(&r, &r);
    let w = UnitCircleParam::new(PI / 3.0);
    println!("R(π/3) ⋄ D(2):\n{}", rd.matrix());
    println!("ν at e^(iπ/3): R⋄D {} R⋄R {}", nullity(&rd, w), nullity(&rr, w));
    Ok(())
}
