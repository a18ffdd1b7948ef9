//! Runs the oracle suite twice: once with the closed-form split rule and once
//! with a rule whose power split is off by 1%, which the grid check catches.

use swipt_ac::oracle::{run_validation, ValidationLevel};
use swipt_ac::solver::optimal_splits;
use swipt_ac::{Result, SplitPair, SystemConfig};

fn skewed(gamma: f64, theta: f64, eps_bar: f64) -> Result<SplitPair> {
    let s = optimal_splits(gamma, theta, eps_bar)?;
    SplitPair::new(s.rho(), s.phi() * 1.01)
}

fn main() -> Result<()> {
    let config = SystemConfig::default();
    for (label, rule) in [
        ("closed form", optimal_splits as swipt_ac::solver::SplitRule),
        ("phi * 1.01", skewed),
    ] {
        let report = run_validation(&config, ValidationLevel::Fast, 1, rule)?;
        println!(
            "{label}: {}",
            if report.passed {
                "all checks pass"
            } else {
                "FAILED"
            }
        );
        for c in &report.checks {
            println!(
                "  {:<4} {:<26} {}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
    }
    Ok(())
}
