//! Brute-force certification of the closed-form design.
//!
//! Nothing in here calls [`crate::solver::optimal_splits`] or
//! [`crate::solver::gamma`]: the grid uses the exact ball minimum for the
//! worst-case gain and enumerates `(rho, phi)` directly, the error ball and
//! the beamformer are sampled, and the inverse harvest curve is checked
//! against bisection on the forward curve.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    inner, norm_sq, realization_rng, sample_channel, worst_case_error, worst_case_gain_ball,
    ChannelEstimate,
};
use crate::error::{Error, Result};
use crate::model::{self, dbm_to_mw, eh_dc, eh_dc_inverse, mw_to_dbm, EhCurve, NoiseModel};
use crate::solver::{optimal_beamformer, optimal_splits, solve_with, SplitRule, SystemConfig};

pub const GRID_EDGE: f64 = 1e-6;

/// Uniform `(rho, phi)` grid, both axes inside `[GRID_EDGE, 1 - GRID_EDGE]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub resolution: usize,
    pub rho_range: (f64, f64),
    pub phi_range: (f64, f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::square(1000)
    }
}

impl GridSpec {
    pub fn square(resolution: usize) -> Self {
        let full = (GRID_EDGE, 1.0 - GRID_EDGE);
        GridSpec {
            resolution,
            rho_range: full,
            phi_range: full,
        }
    }

    /// Clamps the ranges into the open unit interval and checks resolution.
    pub fn normalized(self) -> Result<Self> {
        if self.resolution < 2 {
            return Err(Error::Domain {
                name: "resolution",
                value: self.resolution as f64,
                expected: ">= 2",
            });
        }
        let clamp = |(lo, hi): (f64, f64), name| {
            let (lo, hi) = (lo.max(GRID_EDGE), hi.min(1.0 - GRID_EDGE));
            if lo < hi {
                Ok((lo, hi))
            } else {
                Err(Error::Domain {
                    name,
                    value: lo,
                    expected: "a non-empty range inside (0, 1)",
                })
            }
        };
        Ok(GridSpec {
            resolution: self.resolution,
            rho_range: clamp(self.rho_range, "rho_range")?,
            phi_range: clamp(self.phi_range, "phi_range")?,
        })
    }

    pub fn rho_step(&self) -> f64 {
        (self.rho_range.1 - self.rho_range.0) / (self.resolution - 1) as f64
    }

    pub fn phi_step(&self) -> f64 {
        (self.phi_range.1 - self.phi_range.0) / (self.resolution - 1) as f64
    }

    fn rho_at(&self, i: usize) -> f64 {
        self.rho_range.0 + i as f64 * self.rho_step()
    }

    fn phi_at(&self, j: usize) -> f64 {
        self.phi_range.0 + j as f64 * self.phi_step()
    }
}

/// Best feasible grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridOptimum {
    pub rho: f64,
    pub phi: f64,
    pub rate_bpshz: f64,
    pub rho_index: usize,
    pub phi_index: usize,
    /// Worst-case gain used by the grid, from the exact ball minimum.
    pub gamma_mw: f64,
    pub epsilon_bar_mw: f64,
}

#[derive(Clone, Copy)]
struct Candidate {
    rate: f64,
    /// max of the two per-constraint rho requirements at this phi
    requirement: f64,
    i: usize,
    j: usize,
}

impl Candidate {
    /// Higher rate wins; on an exact rate tie the smaller rho requirement
    /// (the more balanced phi) wins; then the lower index.
    fn beats(&self, other: &Candidate) -> bool {
        if self.rate != other.rate {
            return self.rate > other.rate;
        }
        if self.requirement != other.requirement {
            return self.requirement < other.requirement;
        }
        (self.j, self.i) < (other.j, other.i)
    }
}

/// Exhaustive search of the worst-case rate over the split grid, using the
/// maximum-ratio beamformer at full radiated power.
///
/// Returns `Ok(None)` when no grid point satisfies both energy constraints.
pub fn grid_search_splits(
    config: &SystemConfig,
    estimate: &ChannelEstimate,
    grid: GridSpec,
) -> Result<Option<GridOptimum>> {
    let grid = grid.normalized()?;
    let w = optimal_beamformer(estimate, config.radiated_mw())?;
    let gamma_mw = worst_case_gain_ball(estimate, &w, config.psi)?;
    let epsilon_bar_mw = match eh_dc_inverse(config.epsilon_mw, &config.eh_curve) {
        Ok(v) => v,
        Err(Error::InfeasibleTarget { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let theta = config.theta_mw;
    let noise = config.noise();

    let rows: Vec<Option<Candidate>> = (0..grid.resolution)
        .into_par_iter()
        .map(|j| {
            let phi = grid.phi_at(j);
            let requirement =
                (theta / (gamma_mw * (1.0 - phi))).max(epsilon_bar_mw / (gamma_mw * phi));
            let mut best: Option<Candidate> = None;
            for i in 0..grid.resolution {
                let rho = grid.rho_at(i);
                let ac_ok = rho * (1.0 - phi) * gamma_mw >= theta;
                let dc_ok = rho * phi * gamma_mw >= epsilon_bar_mw;
                if !(ac_ok && dc_ok) {
                    continue;
                }
                let cand = Candidate {
                    rate: worst_case_rate(gamma_mw, rho, &noise),
                    requirement,
                    i,
                    j,
                };
                if best.is_none_or(|b| cand.beats(&b)) {
                    best = Some(cand);
                }
            }
            best
        })
        .collect();

    let best = rows
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<Candidate>, c| match acc {
            Some(b) if !c.beats(&b) => Some(b),
            _ => Some(c),
        });

    Ok(best.map(|c| GridOptimum {
        rho: grid.rho_at(c.i),
        phi: grid.phi_at(c.j),
        rate_bpshz: c.rate,
        rho_index: c.i,
        phi_index: c.j,
        gamma_mw,
        epsilon_bar_mw,
    }))
}

fn worst_case_rate(gamma_mw: f64, rho: f64, noise: &NoiseModel) -> f64 {
    let denom = noise.sigma0_sq_mw + noise.sigma1_sq_mw / (1.0 - rho);
    (gamma_mw / denom).ln_1p() / std::f64::consts::LN_2
}

/// Upper bound on `|dR/drho|` over `[rho_lo, rho_hi]`.
///
/// `dR/drho = -Γ σ1² / (ln2 (1-ρ)² D (D + Γ))` with `D = σ0² + σ1²/(1-ρ)`;
/// the numerator grows and `D` grows with `rho`, so pairing the largest
/// numerator with the smallest denominator bounds it.
pub fn rate_lipschitz(gamma_mw: f64, noise: &NoiseModel, rho_lo: f64, rho_hi: f64) -> f64 {
    let d_lo = noise.sigma0_sq_mw + noise.sigma1_sq_mw / (1.0 - rho_lo);
    let num = gamma_mw * noise.sigma1_sq_mw / (1.0 - rho_hi).powi(2);
    num / (std::f64::consts::LN_2 * d_lo * (d_lo + gamma_mw))
}

/// Outcome of comparing one closed-form solution to the grid.
#[derive(Debug, Clone, Serialize)]
pub struct GridComparison {
    pub closed_rho: f64,
    pub closed_phi: f64,
    pub closed_rate_bpshz: f64,
    pub grid: Option<GridOptimum>,
    /// `grid rate - closed rate`; must not exceed the excess tolerance.
    pub rate_excess: f64,
    /// `closed rate - grid rate`, and the Lipschitz allowance for it.
    pub rate_deficit: f64,
    pub deficit_allowance: f64,
    /// Grid argmax distance from the closed form, in grid steps.
    pub rho_steps: f64,
    pub phi_steps: f64,
    /// Largest relative violation of the AC or DC constraint at the closed form.
    pub constraint_violation: f64,
    pub feasibility_agrees: bool,
}

pub const RATE_EXCESS_TOL: f64 = 1e-12;
pub const ARGMAX_MAX_STEPS: f64 = 2.0;
pub const TIGHTNESS_TOL: f64 = 1e-9;

impl GridComparison {
    pub fn passed(&self) -> bool {
        if !self.feasibility_agrees {
            return false;
        }
        if self.grid.is_none() {
            return true;
        }
        self.rate_excess <= RATE_EXCESS_TOL
            && self.rate_deficit <= self.deficit_allowance
            && self.rho_steps <= ARGMAX_MAX_STEPS
            && self.phi_steps <= ARGMAX_MAX_STEPS
            && self.constraint_violation <= TIGHTNESS_TOL
    }
}

/// Solves with `rule` and checks the result against an exhaustive grid.
pub fn compare_with_grid(
    config: &SystemConfig,
    estimate: &ChannelEstimate,
    grid: GridSpec,
    rule: SplitRule,
) -> Result<GridComparison> {
    let grid = grid.normalized()?;
    let sol = solve_with(config, estimate, rule)?;
    let found = grid_search_splits(config, estimate, grid)?;
    let noise = config.noise();

    let mut cmp = GridComparison {
        closed_rho: sol.rho,
        closed_phi: sol.phi,
        closed_rate_bpshz: sol.rate().unwrap_or(f64::NAN),
        grid: found,
        rate_excess: 0.0,
        rate_deficit: 0.0,
        deficit_allowance: 0.0,
        rho_steps: 0.0,
        phi_steps: 0.0,
        constraint_violation: 0.0,
        feasibility_agrees: sol.feasible || found.is_none(),
    };
    let (Some(g), true) = (found, sol.feasible) else {
        return Ok(cmp);
    };

    // closed-form rate re-evaluated on the oracle's own worst-case gain
    let closed_rate = worst_case_rate(g.gamma_mw, sol.rho, &noise);
    cmp.closed_rate_bpshz = closed_rate;
    cmp.rate_excess = g.rate_bpshz - closed_rate;
    cmp.rate_deficit = closed_rate - g.rate_bpshz;
    let reach = ARGMAX_MAX_STEPS * grid.rho_step();
    cmp.deficit_allowance = rate_lipschitz(
        g.gamma_mw,
        &noise,
        sol.rho,
        (sol.rho + reach).min(1.0 - GRID_EDGE),
    ) * reach
        + RATE_EXCESS_TOL;
    cmp.rho_steps = (g.rho - sol.rho).abs() / grid.rho_step();
    cmp.phi_steps = (g.phi - sol.phi).abs() / grid.phi_step();

    let ac = sol.rho * (1.0 - sol.phi) * g.gamma_mw;
    let harvested = eh_dc(sol.rho * sol.phi * g.gamma_mw, &config.eh_curve)?;
    let theta_short = (config.theta_mw - ac) / config.theta_mw.max(f64::MIN_POSITIVE);
    let eps_short = (config.epsilon_mw - harvested) / config.epsilon_mw.max(f64::MIN_POSITIVE);
    cmp.constraint_violation = theta_short.max(eps_short).max(0.0);
    Ok(cmp)
}

/// Uniform sample from the ball `|e|^2 <= psi |h_hat|^2` in `C^M`.
pub fn sample_error_in_ball<R: Rng + ?Sized>(
    estimate: &ChannelEstimate,
    psi: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let m = estimate.antennas();
    let radius = (psi * estimate.norm_sq()).sqrt();
    let dir = random_direction(m, rng);
    // radius density ∝ r^(2M-1) in 2M real dimensions
    let r = radius * rng.random::<f64>().powf(1.0 / (2 * m) as f64);
    dir.into_iter().map(|z| z * r).collect()
}

fn random_direction<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = norm_sq(&v).sqrt();
        if n > 1e-300 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// `|(h_hat + e)^H w|^2`.
pub fn gain_under_error(estimate: &ChannelEstimate, e: &[Complex64], w: &[Complex64]) -> f64 {
    let actual: Vec<Complex64> = estimate.h_hat().iter().zip(e).map(|(h, d)| h + d).collect();
    inner(&actual, w).norm_sqr()
}

/// Minimum received power over `n` errors drawn uniformly from the ball.
pub fn sampled_worst_case_check<R: Rng + ?Sized>(
    estimate: &ChannelEstimate,
    w: &[Complex64],
    psi: f64,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    crate::channel::check_psi(psi)?;
    if n == 0 {
        return Err(Error::Domain {
            name: "n",
            value: 0.0,
            expected: ">= 1",
        });
    }
    Ok((0..n)
        .map(|_| gain_under_error(estimate, &sample_error_in_ball(estimate, psi, rng), w))
        .fold(f64::INFINITY, f64::min))
}

/// Largest `|h_hat^H (sqrt(p) u)|^2` over `n` random unit vectors `u`.
pub fn sampled_beamformer_check<R: Rng + ?Sized>(
    estimate: &ChannelEstimate,
    p_mw: f64,
    n: usize,
    rng: &mut R,
) -> f64 {
    let scale = p_mw.sqrt();
    (0..n)
        .map(|_| {
            let u = random_direction(estimate.antennas(), rng);
            let w: Vec<Complex64> = u.into_iter().map(|z| z * scale).collect();
            estimate.project(&w).norm_sqr()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationOutcome {
    pub delta: f64,
    pub objective_up: f64,
    pub objective_down: f64,
    /// Objective increase over the balanced value, each direction.
    pub margin_up: f64,
    pub margin_down: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub phi_star: f64,
    pub balanced_objective: f64,
    pub outcomes: Vec<PerturbationOutcome>,
}

impl PerturbationReport {
    /// True when every shift in either direction strictly raised the objective.
    pub fn passed(&self) -> bool {
        self.outcomes
            .iter()
            .all(|o| o.margin_up > 0.0 && o.margin_down > 0.0)
    }

    pub fn min_margin(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.margin_up.min(o.margin_down))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Objective of the single-variable split problem,
/// `max(theta / ((1 - phi) gamma), eps_bar / (phi gamma))`.
pub fn split_objective(gamma_mw: f64, theta_mw: f64, epsilon_bar_mw: f64, phi: f64) -> f64 {
    (theta_mw / ((1.0 - phi) * gamma_mw)).max(epsilon_bar_mw / (phi * gamma_mw))
}

/// Shifts the balanced `phi` up and down by each offset and confirms the
/// objective strictly increases both ways.
pub fn perturbation_test_split_balance(
    gamma_mw: f64,
    theta_mw: f64,
    epsilon_bar_mw: f64,
    deltas: &[f64],
) -> Result<PerturbationReport> {
    model::positive("gamma_mw", gamma_mw)?;
    model::positive("theta_mw", theta_mw)?;
    model::positive("epsilon_bar_mw", epsilon_bar_mw)?;
    let phi_star = epsilon_bar_mw / (theta_mw + epsilon_bar_mw);
    let balanced = (theta_mw + epsilon_bar_mw) / gamma_mw;
    let mut outcomes = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let up = phi_star + delta;
        let down = phi_star - delta;
        if !(delta > 0.0 && up < 1.0 && down > 0.0) {
            return Err(Error::Domain {
                name: "delta",
                value: delta,
                expected: "> 0 with phi* + delta < 1 and phi* - delta > 0",
            });
        }
        let objective_up = split_objective(gamma_mw, theta_mw, epsilon_bar_mw, up);
        let objective_down = split_objective(gamma_mw, theta_mw, epsilon_bar_mw, down);
        outcomes.push(PerturbationOutcome {
            delta,
            objective_up,
            objective_down,
            margin_up: objective_up - balanced,
            margin_down: objective_down - balanced,
        });
    }
    Ok(PerturbationReport {
        phi_star,
        balanced_objective: balanced,
        outcomes,
    })
}

/// Range of target splits used when drawing random feasible instances.
///
/// With `rho* <= 2 min(phi*, 1 - phi*)`, the minimal feasible grid `rho` is
/// provably within two grid steps of `rho*`; outside that regime the grid
/// needs `phi`-resolution finer than `rho`-resolution to land that close.
pub const INSTANCE_RHO_RANGE: (f64, f64) = (0.02, 0.45);
pub const INSTANCE_PHI_RANGE: (f64, f64) = (0.25, 0.75);
/// Radiated power range for random instances, dBm. Keeps the rectifier
/// input below saturation so harvest targets stay invertible.
pub const INSTANCE_P0_RANGE_DBM: (f64, f64) = (-30.0, -10.0);

/// A random feasible scenario derived from `base`.
///
/// The channel and radiated power are random, which makes the worst-case
/// gain random; the thresholds are then drawn so that the optimum splits fall
/// in [`INSTANCE_RHO_RANGE`] x [`INSTANCE_PHI_RANGE`].
pub fn random_instance<R: Rng + ?Sized>(
    base: &SystemConfig,
    rng: &mut R,
) -> Result<(SystemConfig, ChannelEstimate)> {
    let curve: &EhCurve = &base.eh_curve;
    loop {
        let estimate = sample_channel(&base.fading, base.antennas, rng)?;
        let p0_dbm = uniform(rng, INSTANCE_P0_RANGE_DBM);
        let margin = 1.0 - base.psi.sqrt();
        let gamma = margin * margin * dbm_to_mw(p0_dbm) * estimate.norm_sq();
        let rho = uniform(rng, INSTANCE_RHO_RANGE);
        let phi = uniform(rng, INSTANCE_PHI_RANGE);
        let eps_bar = rho * phi * gamma;
        let theta = rho * (1.0 - phi) * gamma;
        let epsilon = eh_dc(eps_bar, curve)?;
        if !(epsilon > 0.0 && epsilon < 0.999 * curve.m_eh_mw) {
            continue;
        }
        let config = SystemConfig {
            theta_mw: theta,
            epsilon_mw: epsilon,
            ..base.with_radiated_dbm(p0_dbm)
        };
        return Ok((config, estimate));
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationLevel {
    Fast,
    Full,
}

impl ValidationLevel {
    fn grid_instances(self) -> usize {
        match self {
            ValidationLevel::Fast => 12,
            ValidationLevel::Full => 200,
        }
    }

    fn sample_instances(self) -> usize {
        match self {
            ValidationLevel::Fast => 3,
            ValidationLevel::Full => 10,
        }
    }

    fn samples(self) -> usize {
        match self {
            ValidationLevel::Fast => 20_000,
            ValidationLevel::Full => 100_000,
        }
    }

    fn perturbation_triples(self) -> usize {
        match self {
            ValidationLevel::Fast => 20,
            ValidationLevel::Full => 100,
        }
    }

    fn round_trip_points(self) -> usize {
        match self {
            ValidationLevel::Fast => 200,
            ValidationLevel::Full => 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Human-readable tolerance the check was held to.
    pub tolerance: String,
    /// Worst observed value of the quantity compared against the tolerance.
    pub observed: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub level: ValidationLevel,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// Runs every oracle against `config`, using `rule` for the splits.
pub fn run_validation(
    config: &SystemConfig,
    level: ValidationLevel,
    seed: u64,
    rule: SplitRule,
) -> Result<ValidationReport> {
    config.validate()?;
    let checks = vec![
        check_eh_round_trip(&config.eh_curve, level.round_trip_points())?,
        check_grid_equivalence(config, level, seed, rule)?,
        check_beamformer(config, level, seed)?,
        check_error_ball(config, level, seed)?,
        check_perturbation(config, level, seed)?,
    ];
    Ok(ValidationReport {
        level,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Default validation with the real split rule.
pub fn validate(
    config: &SystemConfig,
    level: ValidationLevel,
    seed: u64,
) -> Result<ValidationReport> {
    run_validation(config, level, seed, optimal_splits)
}

/// Bisection on the forward harvest curve to `tol`.
pub fn bisect_eh_inverse(target_mw: f64, curve: &EhCurve, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, curve.b_mw.max(1e-12));
    while eh_dc(hi, curve)? < target_mw {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::InfeasibleTarget {
                target_mw,
                saturation_mw: curve.m_eh_mw,
            });
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eh_dc(mid, curve)? < target_mw {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub const ROUND_TRIP_REL_TOL: f64 = 1e-9;
pub const BISECTION_AGREEMENT_TOL_MW: f64 = 1e-10;

/// Log-spaced harvest targets in `[1e-4, min(3.8, 0.999 M)]`.
pub fn round_trip_targets(curve: &EhCurve, n: usize) -> Vec<f64> {
    let lo: f64 = 1e-4;
    let hi = 3.8f64.min(0.999 * curve.m_eh_mw);
    (0..n)
        .map(|k| {
            if k == 0 {
                return lo;
            }
            if k + 1 == n {
                return hi;
            }
            let t = k as f64 / (n - 1) as f64;
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        })
        .collect()
}

fn check_eh_round_trip(curve: &EhCurve, n: usize) -> Result<CheckResult> {
    let mut worst_round_trip: f64 = 0.0;
    let mut worst_bisect: f64 = 0.0;
    for eps in round_trip_targets(curve, n) {
        let x = eh_dc_inverse(eps, curve)?;
        worst_round_trip = worst_round_trip.max((eh_dc(x, curve)? - eps).abs());
        let oracle = bisect_eh_inverse(eps, curve, 1e-14)?;
        worst_bisect = worst_bisect.max((x - oracle).abs());
    }
    let tol = ROUND_TRIP_REL_TOL * curve.m_eh_mw;
    Ok(CheckResult {
        name: "eh_round_trip",
        passed: worst_round_trip <= tol && worst_bisect <= BISECTION_AGREEMENT_TOL_MW,
        tolerance: format!(
            "|eh(inv(eps)) - eps| <= {tol:e} mW; |inv - bisection| <= {BISECTION_AGREEMENT_TOL_MW:e} mW"
        ),
        observed: worst_round_trip,
        detail: format!(
            "{n} targets; worst round trip {worst_round_trip:e} mW, worst bisection gap {worst_bisect:e} mW"
        ),
    })
}

fn check_grid_equivalence(
    config: &SystemConfig,
    level: ValidationLevel,
    seed: u64,
    rule: SplitRule,
) -> Result<CheckResult> {
    let grid = GridSpec::default();
    let mut comparisons = Vec::new();
    // the configured scenario itself, on one seeded channel
    let own = sample_channel(
        &config.fading,
        config.antennas,
        &mut realization_rng(seed, 0),
    )?;
    comparisons.push(compare_with_grid(config, &own, grid, rule)?);
    for k in 1..level.grid_instances() {
        let (cfg, est) = random_instance(config, &mut realization_rng(seed, k as u64))?;
        comparisons.push(compare_with_grid(&cfg, &est, grid, rule)?);
    }
    let failures = comparisons.iter().filter(|c| !c.passed()).count();
    let worst_excess = comparisons
        .iter()
        .map(|c| c.rate_excess)
        .fold(f64::MIN, f64::max);
    let worst_steps = comparisons
        .iter()
        .filter(|c| c.grid.is_some())
        .map(|c| c.rho_steps.max(c.phi_steps))
        .fold(0.0, f64::max);
    let worst_violation = comparisons
        .iter()
        .map(|c| c.constraint_violation)
        .fold(0.0, f64::max);
    Ok(CheckResult {
        name: "grid_equivalence",
        passed: failures == 0,
        tolerance: format!(
            "grid rate <= closed + {RATE_EXCESS_TOL:e}; argmax within {ARGMAX_MAX_STEPS} steps; constraints tight to {TIGHTNESS_TOL:e}"
        ),
        observed: worst_steps,
        detail: format!(
            "{} instances on a {res}x{res} grid, {failures} failed; worst excess {worst_excess:e}, worst argmax distance {worst_steps:.3} steps, worst constraint shortfall {worst_violation:e}",
            comparisons.len(),
            res = grid.resolution,
        ),
    })
}

pub const BEAMFORMER_TOL_MW: f64 = 1e-12;
pub const BALL_TOL_MW: f64 = 1e-12;

fn sample_instances(
    config: &SystemConfig,
    level: ValidationLevel,
    seed: u64,
) -> Result<Vec<ChannelEstimate>> {
    (0..level.sample_instances())
        .map(|k| {
            sample_channel(
                &config.fading,
                config.antennas,
                &mut realization_rng(seed ^ 0x5eed_0001, k as u64),
            )
        })
        .collect()
}

fn check_beamformer(
    config: &SystemConfig,
    level: ValidationLevel,
    seed: u64,
) -> Result<CheckResult> {
    let p = config.radiated_mw();
    let mut worst_excess = f64::MIN;
    for (k, est) in sample_instances(config, level, seed)?.iter().enumerate() {
        let bound = p * est.norm_sq();
        let mut rng = realization_rng(seed ^ 0x5eed_0002, k as u64);
        let best = sampled_beamformer_check(est, p, level.samples(), &mut rng);
        worst_excess = worst_excess.max(best - bound);
    }
    Ok(CheckResult {
        name: "beamformer_optimality",
        passed: worst_excess <= BEAMFORMER_TOL_MW,
        tolerance: format!("sampled gain <= p |h|^2 + {BEAMFORMER_TOL_MW:e} mW"),
        observed: worst_excess,
        detail: format!(
            "{} channels x {} random unit beamformers; largest excess {worst_excess:e} mW",
            level.sample_instances(),
            level.samples()
        ),
    })
}

fn check_error_ball(
    config: &SystemConfig,
    level: ValidationLevel,
    seed: u64,
) -> Result<CheckResult> {
    let p = config.radiated_mw();
    let psi = config.psi;
    let mut worst_shortfall = f64::MIN;
    let mut worst_attain: f64 = 0.0;
    for (k, est) in sample_instances(config, level, seed)?.iter().enumerate() {
        let w = optimal_beamformer(est, p)?;
        let margin = 1.0 - psi.sqrt();
        let bound = margin * margin * p * est.norm_sq();
        let mut rng = realization_rng(seed ^ 0x5eed_0003, k as u64);
        let sampled_min = sampled_worst_case_check(est, &w, psi, level.samples(), &mut rng)?;
        worst_shortfall = worst_shortfall.max(bound - sampled_min);
        let attained = gain_under_error(est, &worst_case_error(est, psi)?, &w);
        worst_attain = worst_attain.max((attained - bound).abs());
    }
    let exact = psi == 0.0;
    let passed = worst_shortfall <= BALL_TOL_MW
        && worst_attain <= BALL_TOL_MW
        && (!exact || worst_shortfall.abs() <= BALL_TOL_MW);
    Ok(CheckResult {
        name: "worst_case_ball",
        passed,
        tolerance: if exact {
            format!("psi = 0: every sample equals |h^H w|^2 within {BALL_TOL_MW:e} mW")
        } else {
            format!("samples >= (1-sqrt(psi))^2 p |h|^2 - {BALL_TOL_MW:e} mW; minimiser attains it within {BALL_TOL_MW:e}")
        },
        observed: worst_shortfall,
        detail: format!(
            "{} channels x {} errors at psi = {psi}; worst shortfall {worst_shortfall:e} mW, minimiser gap {worst_attain:e} mW",
            level.sample_instances(),
            level.samples()
        ),
    })
}

/// Relative offsets (times `min(phi*, 1 - phi*)`) used for the perturbation test.
pub const PERTURBATION_SCALES: [f64; 3] = [1e-3, 1e-2, 0.1];

fn check_perturbation(
    config: &SystemConfig,
    level: ValidationLevel,
    seed: u64,
) -> Result<CheckResult> {
    let mut failures = 0;
    let mut min_margin = f64::INFINITY;
    for k in 0..level.perturbation_triples() {
        let (cfg, est) =
            random_instance(config, &mut realization_rng(seed ^ 0x5eed_0004, k as u64))?;
        let margin = 1.0 - cfg.psi.sqrt();
        let gamma = margin * margin * cfg.radiated_mw() * est.norm_sq();
        let eps_bar = eh_dc_inverse(cfg.epsilon_mw, &cfg.eh_curve)?;
        let phi_star = eps_bar / (cfg.theta_mw + eps_bar);
        let room = phi_star.min(1.0 - phi_star);
        let deltas: Vec<f64> = PERTURBATION_SCALES.iter().map(|s| s * room).collect();
        let report = perturbation_test_split_balance(gamma, cfg.theta_mw, eps_bar, &deltas)?;
        if !report.passed() {
            failures += 1;
        }
        min_margin = min_margin.min(report.min_margin() / report.balanced_objective);
    }
    Ok(CheckResult {
        name: "split_balance_perturbation",
        passed: failures == 0,
        tolerance: "objective at phi* +/- delta strictly above the balanced value".into(),
        observed: min_margin,
        detail: format!(
            "{} triples x deltas {:?} * min(phi*, 1-phi*); {failures} failed; smallest relative margin {min_margin:e}",
            level.perturbation_triples(),
            PERTURBATION_SCALES
        ),
    })
}

/// One-line summary of a scenario's budget and thresholds.
pub fn describe_instance(config: &SystemConfig) -> String {
    format!(
        "P0 = {:.2} dBm, theta = {:.3e} mW, eps = {:.3e} mW, psi = {}",
        mw_to_dbm(config.radiated_mw()),
        config.theta_mw,
        config.epsilon_mw,
        config.psi
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::worst_case_gain_aligned;
    use crate::model::SplitPair;
    use crate::solver::{solve, THETA_AC_MW};

    fn reference_channel(seed: u64) -> ChannelEstimate {
        sample_channel(
            &crate::channel::FadingParams::default(),
            4,
            &mut realization_rng(seed, 0),
        )
        .unwrap()
    }

    #[test]
    fn grid_never_beats_closed_form_on_default_scenario() {
        let cfg = SystemConfig::default();
        let h = reference_channel(11);
        let cmp = compare_with_grid(&cfg, &h, GridSpec::default(), optimal_splits).unwrap();
        assert!(cmp.passed(), "{cmp:?}");
        assert!(cmp.rate_excess <= RATE_EXCESS_TOL);
        assert!(cmp.rate_deficit >= -RATE_EXCESS_TOL);
    }

    #[test]
    fn grid_on_random_instances_matches_closed_form() {
        let base = SystemConfig::default();
        for k in 0..10 {
            let (cfg, h) = random_instance(&base, &mut realization_rng(77, k)).unwrap();
            let cmp = compare_with_grid(&cfg, &h, GridSpec::default(), optimal_splits).unwrap();
            assert!(
                cmp.passed(),
                "instance {k}: {} {cmp:?}",
                describe_instance(&cfg)
            );
        }
    }

    #[test]
    fn grid_is_empty_when_closed_form_is_infeasible() {
        let cfg = SystemConfig {
            theta_mw: 5.0,
            ..SystemConfig::default()
        };
        let h = reference_channel(12);
        assert!(!solve(&cfg, &h).unwrap().feasible);
        assert!(grid_search_splits(&cfg, &h, GridSpec::square(200))
            .unwrap()
            .is_none());
        let cmp = compare_with_grid(&cfg, &h, GridSpec::square(200), optimal_splits).unwrap();
        assert!(cmp.feasibility_agrees && cmp.passed());
    }

    #[test]
    fn symmetric_thresholds_put_grid_argmin_at_half() {
        // theta = eps_bar and gamma = 4 (theta + eps_bar): minimise the split
        // objective over the phi axis alone
        let grid = GridSpec::default().normalized().unwrap();
        let (t, e) = (0.01, 0.01);
        let g = 4.0 * (t + e);
        let (mut best_j, mut best) = (0, f64::INFINITY);
        for j in 0..grid.resolution {
            let v = split_objective(g, t, e, grid.phi_at(j));
            if v < best {
                best = v;
                best_j = j;
            }
        }
        assert!((grid.phi_at(best_j) - 0.5).abs() <= grid.phi_step());
    }

    #[test]
    fn grid_respects_lipschitz_lower_bound() {
        let base = SystemConfig::default();
        let (cfg, h) = random_instance(&base, &mut realization_rng(5, 5)).unwrap();
        let cmp = compare_with_grid(&cfg, &h, GridSpec::square(300), optimal_splits).unwrap();
        assert!(cmp.rate_deficit <= cmp.deficit_allowance, "{cmp:?}");
    }

    #[test]
    fn doubling_resolution_keeps_argmax_near_closed_form() {
        let base = SystemConfig::default();
        let (cfg, h) = random_instance(&base, &mut realization_rng(8, 1)).unwrap();
        let sol = solve(&cfg, &h).unwrap();
        let coarse = GridSpec::square(250);
        let fine = GridSpec::square(499);
        let a = grid_search_splits(&cfg, &h, coarse).unwrap().unwrap();
        let b = grid_search_splits(&cfg, &h, fine).unwrap().unwrap();
        let step = coarse.normalized().unwrap().rho_step();
        assert!((b.rho - sol.rho).abs() <= (a.rho - sol.rho).abs().max(step) + 1e-15);
        assert!((b.phi - sol.phi).abs() <= (a.phi - sol.phi).abs().max(step) + 1e-15);
    }

    #[test]
    fn faulty_split_rule_is_caught() {
        fn skewed(g: f64, t: f64, e: f64) -> Result<SplitPair> {
            let s = optimal_splits(g, t, e)?;
            SplitPair::new(s.rho(), s.phi() * 1.01)
        }
        let base = SystemConfig::default();
        let (cfg, h) = random_instance(&base, &mut realization_rng(3, 3)).unwrap();
        let cmp = compare_with_grid(&cfg, &h, GridSpec::default(), skewed).unwrap();
        assert!(!cmp.passed());
    }

    #[test]
    fn ball_samples_stay_inside_and_above_bound() {
        let h = reference_channel(13);
        let psi = 0.09;
        let mut rng = realization_rng(13, 1);
        for _ in 0..1000 {
            let e = sample_error_in_ball(&h, psi, &mut rng);
            assert!(norm_sq(&e) <= psi * h.norm_sq() * (1.0 + 1e-12));
        }
        let w = optimal_beamformer(&h, 10.0).unwrap();
        let bound = worst_case_gain_aligned(&h, &w, psi).unwrap();
        let min = sampled_worst_case_check(&h, &w, psi, 100_000, &mut rng).unwrap();
        assert!(min >= bound - 1e-12);
        let at_minimiser = gain_under_error(&h, &worst_case_error(&h, psi).unwrap(), &w);
        assert!((at_minimiser - bound).abs() < 1e-12);
    }

    #[test]
    fn sampled_minimum_approaches_bound_when_the_cap_is_reachable() {
        // Uniform samples only reach the minimising cap often enough when the
        // ball is low-dimensional or thin: one antenna at psi = 0.09, and four
        // antennas at psi = 0.001.
        let one = ChannelEstimate::new(vec![Complex64::new(0.1, -0.05)]).unwrap();
        let four = reference_channel(16);
        for (h, psi) in [(one, 0.09), (four, 0.001)] {
            let w = optimal_beamformer(&h, 10.0).unwrap();
            let bound = worst_case_gain_aligned(&h, &w, psi).unwrap();
            let mut rng = realization_rng(16, h.antennas() as u64);
            let min = sampled_worst_case_check(&h, &w, psi, 100_000, &mut rng).unwrap();
            assert!(min >= bound - 1e-12);
            assert!(
                (min - bound) / bound < 0.01,
                "M={} psi={psi}: {min} vs {bound}",
                h.antennas()
            );
        }
    }

    #[test]
    fn ball_check_with_zero_radius_is_exact() {
        let h = reference_channel(14);
        let w = optimal_beamformer(&h, 10.0).unwrap();
        let exact = h.project(&w).norm_sqr();
        let min = sampled_worst_case_check(&h, &w, 0.0, 500, &mut realization_rng(1, 1)).unwrap();
        assert_eq!(min, exact);
        assert!(sampled_worst_case_check(&h, &w, 0.1, 0, &mut realization_rng(1, 1)).is_err());
    }

    #[test]
    fn random_beamformers_never_beat_mrt() {
        let h = reference_channel(15);
        let best = sampled_beamformer_check(&h, 10.0, 100_000, &mut realization_rng(15, 2));
        assert!(best <= 10.0 * h.norm_sq() + 1e-12);
        let w = optimal_beamformer(&h, 10.0).unwrap();
        assert!((h.project(&w).norm_sqr() - 10.0 * h.norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn perturbation_examples() {
        let (g, t, e) = (2.0, 0.1, 0.3);
        let phi = e / (t + e);
        let r = perturbation_test_split_balance(g, t, e, &[phi / 2.0 * 0.5]).unwrap();
        assert!(r.passed());
        let tiny = perturbation_test_split_balance(g, t, e, &[1e-9]).unwrap();
        assert!(tiny.passed());
        assert!(tiny.min_margin() < 1e-8);

        // symmetric thresholds: both directions move the objective equally
        let sym = perturbation_test_split_balance(1.0, 0.2, 0.2, &[0.05, 0.2]).unwrap();
        for o in &sym.outcomes {
            assert!((o.margin_up - o.margin_down).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_rejects_out_of_window_deltas() {
        assert!(perturbation_test_split_balance(1.0, 0.2, 0.2, &[0.0]).is_err());
        assert!(perturbation_test_split_balance(1.0, 0.2, 0.2, &[0.5]).is_err());
        assert!(perturbation_test_split_balance(1.0, 0.2, 0.2, &[-0.1]).is_err());
    }

    #[test]
    fn round_trip_targets_span_requested_range() {
        let t = round_trip_targets(&EhCurve::default(), 1000);
        assert_eq!(t.len(), 1000);
        assert!((t[0] - 1e-4).abs() < 1e-18);
        assert!((t[999] - 3.8).abs() < 1e-12);
    }

    #[test]
    fn bisection_oracle_agrees_with_closed_inverse() {
        let c = EhCurve::default();
        let a = bisect_eh_inverse(0.2, &c, 1e-14).unwrap();
        let b = eh_dc_inverse(0.2, &c).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn fast_validation_passes_on_defaults() {
        let report = validate(&SystemConfig::default(), ValidationLevel::Fast, 1).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(report.passed);
    }

    #[test]
    fn random_instances_are_feasible_and_in_regime() {
        let base = SystemConfig {
            psi: 0.05,
            theta_mw: THETA_AC_MW,
            ..SystemConfig::default()
        };
        for k in 0..50 {
            let (cfg, h) = random_instance(&base, &mut realization_rng(21, k)).unwrap();
            let sol = solve(&cfg, &h).unwrap();
            assert!(sol.feasible);
            assert!(
                sol.rho <= INSTANCE_RHO_RANGE.1 + 1e-9 && sol.rho >= INSTANCE_RHO_RANGE.0 - 1e-9
            );
        }
    }
}
