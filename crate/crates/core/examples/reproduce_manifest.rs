//! Runs a small CSI sweep, then rebuilds it from the written manifest and
//! confirms the checksums match.

use swipt_ac::experiments::run_csi_sweep;
use swipt_ac::report::{write_sweep, SweepKind};
use swipt_ac::ScenarioFile;

fn main() -> swipt_ac::Result<()> {
    let base = std::env::temp_dir().join(format!("swipt-replay-{}", std::process::id()));
    let (first, second) = (base.join("first"), base.join("second"));

    let mut scenario = ScenarioFile::default();
    scenario.experiments.realizations = 500;
    scenario.experiments.seed = 42;
    let result = run_csi_sweep(&scenario.system, &scenario.experiments)?;
    let manifest_path = write_sweep(&first, SweepKind::CsiSweep, &scenario, &result, false)?;

    let loaded = ScenarioFile::load(&manifest_path)?;
    let manifest = loaded.from_manifest.expect("a manifest");
    let replay = run_csi_sweep(&loaded.scenario.system, &loaded.scenario.experiments)?;
    write_sweep(
        &second,
        SweepKind::CsiSweep,
        &loaded.scenario,
        &replay,
        false,
    )?;

    for out in &manifest.outputs {
        println!("{}  {}", out.sha256, out.file);
    }
    let mismatches = manifest.mismatches(&second);
    println!("replay mismatches: {mismatches:?}");
    std::fs::remove_dir_all(&base).ok();
    assert!(mismatches.is_empty());
    Ok(())
}
