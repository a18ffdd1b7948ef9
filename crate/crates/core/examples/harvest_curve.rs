//! Tabulates the nonlinear harvester and the input needed for each target.

use swipt_ac::model::{eh_dc, eh_dc_inverse, EhCurve};

fn main() -> swipt_ac::Result<()> {
    let curve = EhCurve::default();
    println!("{:>12}  {:>12}", "input_mw", "harvested_mw");
    for k in 0..=12 {
        let x = 0.001 * 2f64.powi(k);
        println!("{x:>12.4e}  {:>12.6e}", eh_dc(x, &curve)?);
    }

    println!();
    println!("{:>12}  {:>14}", "target_mw", "required_in_mw");
    for target in [1e-4, 1e-3, 0.01, 0.1, 0.2, 1.0, 2.0, 3.5, 3.89] {
        println!("{target:>12.4e}  {:>14.6e}", eh_dc_inverse(target, &curve)?);
    }

    match eh_dc_inverse(curve.m_eh_mw, &curve) {
        Err(e) => println!("\n{e}"),
        Ok(x) => println!("\nunexpected: saturation reached at {x}"),
    }
    Ok(())
}
