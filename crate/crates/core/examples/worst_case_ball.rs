//! Checks the worst-case received power of the maximum-ratio beamformer
//! against random channel errors drawn uniformly from the uncertainty ball.

use swipt_ac::channel::{
    realization_rng, sample_channel, worst_case_error, worst_case_gain_aligned,
};
use swipt_ac::oracle::{gain_under_error, sampled_worst_case_check};
use swipt_ac::solver::{optimal_beamformer, SystemConfig};

fn main() -> swipt_ac::Result<()> {
    let config = SystemConfig::default();
    let h = sample_channel(&config.fading, config.antennas, &mut realization_rng(11, 0))?;
    let w = optimal_beamformer(&h, config.radiated_mw())?;
    let nominal = h.project(&w).norm_sqr();

    println!(
        "{:>6}  {:>12}  {:>12}  {:>14}  {:>10}",
        "psi", "bound_mw", "sampled_min", "at_-sqrt(psi)h", "gap"
    );
    for psi in [0.0, 0.001, 0.01, 0.05, 0.09, 0.25] {
        let bound = worst_case_gain_aligned(&h, &w, psi)?;
        let mut rng = realization_rng(12, (psi * 1e6) as u64);
        let sampled = sampled_worst_case_check(&h, &w, psi, 100_000, &mut rng)?;
        let attained = gain_under_error(&h, &worst_case_error(&h, psi)?, &w);
        println!(
            "{psi:>6}  {bound:>12.6e}  {sampled:>12.6e}  {attained:>14.6e}  {:>9.3}%",
            100.0 * (sampled - bound) / nominal
        );
    }
    Ok(())
}
