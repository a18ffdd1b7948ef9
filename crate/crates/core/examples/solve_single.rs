//! Solve the robust design for one seeded channel and print every quantity.
//!
//! `cargo run --example solve_single -- [seed] [psi]`

use swipt_ac::channel::{realization_rng, sample_channel};
use swipt_ac::report::SolveRecord;
use swipt_ac::solver::{solve, SystemConfig};

fn main() -> swipt_ac::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let psi: f64 = args.next().map_or(0.0, |s| s.parse().expect("psi"));

    let config = SystemConfig {
        psi,
        ..SystemConfig::default()
    };
    let h = sample_channel(
        &config.fading,
        config.antennas,
        &mut realization_rng(seed, 0),
    )?;
    println!(
        "|h_hat|^2 = {:.6e} mW/mW over {} antennas",
        h.norm_sq(),
        h.antennas()
    );

    let sol = solve(&config, &h)?;
    print!("{}", SolveRecord::from(&sol).render());
    Ok(())
}
