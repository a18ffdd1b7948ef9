//! Monte Carlo sweeps over channel realizations.
//!
//! Realization `k` always uses the channel drawn from
//! `realization_rng(seed, k)`, whatever cell is being evaluated, so every
//! scenario in a sweep is compared on the same channels. Per-realization
//! results are gathered into a table indexed by `k` and reduced with a fixed
//! pairwise summation tree, which makes the output independent of thread
//! scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{realization_rng, sample_channel, ChannelEstimate};
use crate::error::{Error, Result};
use crate::solver::{solve, SystemConfig, THETA_AC_MW, THETA_DC_MW};

/// How infeasible realizations enter the rate mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasiblePolicy {
    /// Average over feasible realizations only.
    #[default]
    Exclude,
    /// Count infeasible realizations as zero rate.
    ZeroRate,
}

/// Sweep grids and Monte Carlo settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    pub theta_ac_mw: f64,
    pub theta_dc_mw: f64,
    pub epsilon_grid_mw: Vec<f64>,
    pub p0_grid_dbm: Vec<f64>,
    pub psi_list: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub infeasible_policy: InfeasiblePolicy,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            theta_ac_mw: THETA_AC_MW,
            theta_dc_mw: THETA_DC_MW,
            epsilon_grid_mw: log_space(1e-3, 3.5, 40),
            p0_grid_dbm: (0..=10).map(|k| 2.0 * k as f64).collect(),
            psi_list: vec![0.0, 0.01, 0.05, 0.1],
            realizations: 10_000,
            seed: 1,
            infeasible_policy: InfeasiblePolicy::Exclude,
        }
    }
}

impl ExperimentSettings {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::config("realizations", "must be at least 1"));
        }
        for (field, t) in [
            ("theta_ac_mw", self.theta_ac_mw),
            ("theta_dc_mw", self.theta_dc_mw),
        ] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::config(field, format!("{t} must be >= 0")));
            }
        }
        if self
            .epsilon_grid_mw
            .iter()
            .any(|e| !(e.is_finite() && *e >= 0.0))
        {
            return Err(Error::config(
                "epsilon_grid_mw",
                "values must be finite and >= 0",
            ));
        }
        if self.p0_grid_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::config("p0_grid_dbm", "values must be finite"));
        }
        if self.psi_list.iter().any(|p| !(0.0..1.0).contains(p)) {
            return Err(Error::config("psi_list", "values must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// `n` points log-spaced over `[lo, hi]`, endpoints included.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| match k {
                0 => lo,
                k if k == n - 1 => hi,
                _ => {
                    let t = k as f64 / (n - 1) as f64;
                    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                }
            })
            .collect(),
    }
}

/// Aggregate statistics for one cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStats {
    pub n_total: usize,
    pub n_feasible: usize,
    pub feasible_frac: f64,
    /// `None` when no realization contributes to the mean.
    pub mean_rate_bpshz: Option<f64>,
    pub stderr_rate: Option<f64>,
    pub mean_eh_mw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// Grid value: epsilon in mW for the region sweep, P0 in dBm for the CSI sweep.
    pub axis: f64,
    /// "AC", "DC", or the psi value as text.
    pub scenario: String,
    pub psi: f64,
    pub theta_mw: f64,
    pub stats: CellStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis_name: &'static str,
    pub rows: Vec<SweepRow>,
    pub realizations: usize,
    pub seed: u64,
    pub policy: InfeasiblePolicy,
    /// Worst-case rate of every realization, per row; `None` where infeasible.
    #[serde(skip)]
    pub realization_rates: Vec<Vec<Option<f64>>>,
}

impl SweepResult {
    pub fn row(&self, axis: f64, scenario: &str) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.axis == axis && r.scenario == scenario)
    }

    pub fn series(&self, scenario: &str) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.scenario == scenario)
            .collect()
    }
}

struct Cell {
    axis: f64,
    scenario: String,
    config: SystemConfig,
}

/// Rate-energy trade-off: for each harvest target and each computing
/// threshold (AC and DC), the mean worst-case rate over channel realizations.
pub fn rate_energy_region(
    config: &SystemConfig,
    epsilon_grid_mw: &[f64],
    theta_ac_mw: f64,
    theta_dc_mw: f64,
    n_realizations: usize,
    seed: u64,
    policy: InfeasiblePolicy,
) -> Result<SweepResult> {
    if epsilon_grid_mw.is_empty() {
        return Err(Error::config("epsilon_grid_mw", "grid is empty"));
    }
    let mut cells = Vec::with_capacity(2 * epsilon_grid_mw.len());
    for &eps in epsilon_grid_mw {
        for (label, theta) in [("AC", theta_ac_mw), ("DC", theta_dc_mw)] {
            cells.push(Cell {
                axis: eps,
                scenario: label.to_string(),
                config: SystemConfig {
                    epsilon_mw: eps,
                    theta_mw: theta,
                    ..config.clone()
                },
            });
        }
    }
    run_cells("epsilon_mw", config, cells, n_realizations, seed, policy)
}

/// Impact of channel uncertainty: mean worst-case rate over a grid of
/// radiated powers and error factors.
pub fn csi_impact_sweep(
    config: &SystemConfig,
    p0_grid_dbm: &[f64],
    psi_list: &[f64],
    n_realizations: usize,
    seed: u64,
    policy: InfeasiblePolicy,
) -> Result<SweepResult> {
    if p0_grid_dbm.is_empty() || psi_list.is_empty() {
        return Err(Error::config("p0_grid_dbm/psi_list", "grid is empty"));
    }
    let mut cells = Vec::with_capacity(p0_grid_dbm.len() * psi_list.len());
    for &p0 in p0_grid_dbm {
        for &psi in psi_list {
            cells.push(Cell {
                axis: p0,
                scenario: format!("{psi}"),
                config: SystemConfig {
                    psi,
                    ..config.with_radiated_dbm(p0)
                },
            });
        }
    }
    run_cells("p0_dbm", config, cells, n_realizations, seed, policy)
}

/// [`rate_energy_region`] driven by a settings block.
pub fn run_region(config: &SystemConfig, s: &ExperimentSettings) -> Result<SweepResult> {
    s.validate()?;
    rate_energy_region(
        config,
        &s.epsilon_grid_mw,
        s.theta_ac_mw,
        s.theta_dc_mw,
        s.realizations,
        s.seed,
        s.infeasible_policy,
    )
}

/// [`csi_impact_sweep`] driven by a settings block.
pub fn run_csi_sweep(config: &SystemConfig, s: &ExperimentSettings) -> Result<SweepResult> {
    s.validate()?;
    csi_impact_sweep(
        config,
        &s.p0_grid_dbm,
        &s.psi_list,
        s.realizations,
        s.seed,
        s.infeasible_policy,
    )
}

/// Channel for realization `k`.
pub fn realization_channel(config: &SystemConfig, seed: u64, k: usize) -> Result<ChannelEstimate> {
    sample_channel(
        &config.fading,
        config.antennas,
        &mut realization_rng(seed, k as u64),
    )
}

fn run_cells(
    axis_name: &'static str,
    base: &SystemConfig,
    cells: Vec<Cell>,
    n: usize,
    seed: u64,
    policy: InfeasiblePolicy,
) -> Result<SweepResult> {
    if n == 0 {
        return Err(Error::config("realizations", "must be at least 1"));
    }
    base.validate()?;

    // outcomes[k][c] = (rate, harvested) for realization k, cell c
    let outcomes: Vec<Vec<Option<(f64, f64)>>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let h = realization_channel(base, seed, k)?;
            cells
                .iter()
                .map(|cell| {
                    let sol = solve(&cell.config, &h)?;
                    Ok(sol.metrics.map(|m| (m.rate_bpshz, m.eh_dc_mw)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(cells.len());
    let mut realization_rates = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let column: Vec<Option<(f64, f64)>> = outcomes.iter().map(|row| row[c]).collect();
        rows.push(SweepRow {
            axis: cell.axis,
            scenario: cell.scenario.clone(),
            psi: cell.config.psi,
            theta_mw: cell.config.theta_mw,
            stats: cell_stats(&column, policy),
        });
        realization_rates.push(column.iter().map(|o| o.map(|(r, _)| r)).collect());
    }

    Ok(SweepResult {
        axis_name,
        rows,
        realizations: n,
        seed,
        policy,
        realization_rates,
    })
}

fn cell_stats(column: &[Option<(f64, f64)>], policy: InfeasiblePolicy) -> CellStats {
    let n_total = column.len();
    let feasible: Vec<(f64, f64)> = column.iter().flatten().copied().collect();
    let n_feasible = feasible.len();
    let rates: Vec<f64> = match policy {
        InfeasiblePolicy::Exclude => feasible.iter().map(|(r, _)| *r).collect(),
        InfeasiblePolicy::ZeroRate => column.iter().map(|o| o.map_or(0.0, |(r, _)| r)).collect(),
    };
    let harvested: Vec<f64> = feasible.iter().map(|(_, e)| *e).collect();
    let (mean_rate_bpshz, stderr_rate) = mean_and_stderr(&rates);
    CellStats {
        n_total,
        n_feasible,
        feasible_frac: n_feasible as f64 / n_total as f64,
        mean_rate_bpshz,
        stderr_rate,
        mean_eh_mw: mean_and_stderr(&harvested).0,
    }
}

fn mean_and_stderr(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

/// Summation over a fixed binary tree (blocks of 8 summed left to right).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
