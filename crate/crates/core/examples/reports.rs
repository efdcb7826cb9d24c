//! Loading a system definition and rendering index reports as JSON and CSV.

use shdx::harness::{render, run_index, Format, RunOptions, SystemDefinition};

fn main() -> shdx::Result<()> {
    let def = SystemDefinition::from_json(
        r#"{"m": 1, "N": 32,
            "omega": [0.0, 3.141592653589793, {"angle": 2.0}],
            "coefficients": {"continuous": {"trig": {
                "base": [[3.0, 0.0], [0.0, 3.0]],
                "terms": [{"amp": [[1.0, 0.5], [0.5, -1.0]], "freq": 1.0}]}}}}"#,
    )?;
    let run = run_index(&def, &RunOptions::default())?;
    println!("{}", String::from_utf8_lossy(&render(&run, Format::Csv)?));
    println!("{}", String::from_utf8_lossy(&render(&run, Format::Json)?));
    Ok(())
}
