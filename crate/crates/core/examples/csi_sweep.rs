//! Worst-case rate against radiated power for several channel error factors.

use swipt_ac::experiments::{csi_impact_sweep, InfeasiblePolicy};
use swipt_ac::SystemConfig;

fn main() -> swipt_ac::Result<()> {
    let config = SystemConfig::default();
    let p0: Vec<f64> = (0..=20).step_by(4).map(f64::from).collect();
    let psis = [0.0, 0.01, 0.05, 0.1];
    let result = csi_impact_sweep(&config, &p0, &psis, 5000, 1, InfeasiblePolicy::Exclude)?;

    print!("{:>7}", "p0_dbm");
    for psi in psis {
        print!("  {:>12}", format!("psi={psi}"));
    }
    println!();
    for &p in &p0 {
        print!("{p:>7}");
        for psi in psis {
            let mean = result
                .row(p, &psi.to_string())
                .and_then(|r| r.stats.mean_rate_bpshz);
            print!("  {:>12}", mean.map_or("-".into(), |m| format!("{m:.4e}")));
        }
        println!();
    }
    Ok(())
}
