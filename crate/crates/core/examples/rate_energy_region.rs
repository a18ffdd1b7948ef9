//! Rate-energy trade-off for AC versus DC powered computing.
//!
//! Writes `region.csv`, `region.svg` and a manifest into the directory given
//! as the first argument (default `out/region`).

use std::path::PathBuf;

use swipt_ac::experiments::run_region;
use swipt_ac::report::{write_sweep, SweepKind};
use swipt_ac::ScenarioFile;

fn main() -> swipt_ac::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out/region".into())
        .into();
    let mut scenario = ScenarioFile::default();
    scenario.experiments.realizations = 2000;

    let result = run_region(&scenario.system, &scenario.experiments)?;
    let ac = result.series("AC");
    let dc = result.series("DC");
    println!("{:>10}  {:>14}  {:>14}", "eps_mw", "AC_bpshz", "DC_bpshz");
    for (a, d) in ac.iter().zip(&dc).step_by(4) {
        let fmt = |m: Option<f64>| m.map_or("infeasible".to_string(), |v| format!("{v:.6e}"));
        println!(
            "{:>10.4e}  {:>14}  {:>14}",
            a.axis,
            fmt(a.stats.mean_rate_bpshz),
            fmt(d.stats.mean_rate_bpshz)
        );
    }
    let manifest = write_sweep(&out, SweepKind::Region, &scenario, &result, true)?;
    println!("wrote {}", manifest.display());
    Ok(())
}
