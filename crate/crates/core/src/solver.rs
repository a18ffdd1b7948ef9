//! Closed-form robust design.
//!
//! The joint problem over `(w, rho, phi)` separates. The beamformer that
//! maximises worst-case received power does not depend on the splits, so it is
//! fixed first (maximum-ratio transmission at full radiated power). With the
//! worst-case gain `gamma` known, the rate only depends on `rho`, and the two
//! energy constraints become `rho >= theta / (gamma (1 - phi))` and
//! `rho >= eps_bar / (gamma phi)`. The smallest feasible `rho` is where those
//! two bounds meet, which gives
//!
//! ```text
//! phi* = eps_bar / (theta + eps_bar)
//! rho* = (theta + eps_bar) / gamma
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{check_psi, ChannelEstimate, FadingParams};
use crate::error::{Error, Result};
use crate::model::{
    self, dbm_to_mw, eh_dc, eh_dc_inverse, mw_to_dbm, EhCurve, NoiseModel, SplitPair,
};

/// `rho*` at or above `1 - FEASIBILITY_GUARD` counts as infeasible.
pub const FEASIBILITY_GUARD: f64 = 1e-12;

/// Default floor substituted for a zero AC or DC threshold.
pub const DEFAULT_THRESHOLD_FLOOR_MW: f64 = 1e-12;

/// Every scalar describing one link scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Transmit antennas.
    pub antennas: usize,
    /// Total transmit budget P in dBm.
    pub p_dbm: f64,
    /// Circuit power P_circ in dBm; the radiated budget is P - P_circ.
    pub p_circ_dbm: f64,
    /// Antenna noise variance in dBm.
    pub sigma0_sq_dbm: f64,
    /// Decoder noise variance in dBm.
    pub sigma1_sq_dbm: f64,
    /// Channel error factor: `|e|^2 <= psi |h_hat|^2`.
    pub psi: f64,
    /// Minimum power for the AC computational logic, mW.
    pub theta_mw: f64,
    /// Minimum harvested DC power, mW.
    pub epsilon_mw: f64,
    pub eh_curve: EhCurve,
    pub fading: FadingParams,
    /// Value substituted for a zero threshold so the splits stay inside (0, 1).
    #[serde(default = "default_floor")]
    pub threshold_floor_mw: f64,
}

fn default_floor() -> f64 {
    DEFAULT_THRESHOLD_FLOOR_MW
}

/// AC computing logic supply threshold.
pub const THETA_AC_MW: f64 = 0.00027;
/// Conventional (rectified) DC computing supply threshold.
pub const THETA_DC_MW: f64 = 0.04764;

impl Default for SystemConfig {
    /// Four antennas at 4 m, 10 dBm radiated, AC computing, 0.2 mW harvest.
    fn default() -> Self {
        let p_circ_dbm = 0.0;
        SystemConfig {
            antennas: 4,
            p_dbm: mw_to_dbm(dbm_to_mw(10.0) + dbm_to_mw(p_circ_dbm)),
            p_circ_dbm,
            sigma0_sq_dbm: -111.0,
            sigma1_sq_dbm: 35.0,
            psi: 0.0,
            theta_mw: THETA_AC_MW,
            epsilon_mw: 0.2,
            eh_curve: EhCurve::default(),
            fading: FadingParams::default(),
            threshold_floor_mw: DEFAULT_THRESHOLD_FLOOR_MW,
        }
    }
}

impl SystemConfig {
    /// Checks every invariant, reporting the first offending field.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        if self.epsilon_mw >= self.eh_curve.m_eh_mw {
            return Err(Error::InfeasibleTarget {
                target_mw: self.epsilon_mw,
                saturation_mw: self.eh_curve.m_eh_mw,
            });
        }
        Ok(())
    }

    /// All invariants except harvester saturation, which `solve` reports as
    /// an infeasible outcome rather than an error.
    fn validate_structure(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::config("antennas", "must be at least 1"));
        }
        for (field, v) in [
            ("p_dbm", self.p_dbm),
            ("p_circ_dbm", self.p_circ_dbm),
            ("sigma0_sq_dbm", self.sigma0_sq_dbm),
            ("sigma1_sq_dbm", self.sigma1_sq_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::config(field, format!("{v} is not finite")));
            }
        }
        if self.radiated_mw() <= 0.0 {
            return Err(Error::config(
                "p_dbm",
                format!(
                    "budget {} dBm must exceed circuit power p_circ_dbm = {} dBm",
                    self.p_dbm, self.p_circ_dbm
                ),
            ));
        }
        check_psi(self.psi)
            .map_err(|_| Error::config("psi", format!("{} must lie in [0, 1)", self.psi)))?;
        if !(self.theta_mw.is_finite() && self.theta_mw >= 0.0) {
            return Err(Error::config(
                "theta_mw",
                format!("{} must be >= 0", self.theta_mw),
            ));
        }
        if !(self.epsilon_mw.is_finite() && self.epsilon_mw >= 0.0) {
            return Err(Error::config(
                "epsilon_mw",
                format!("{} must be >= 0", self.epsilon_mw),
            ));
        }
        if !(self.threshold_floor_mw.is_finite() && self.threshold_floor_mw > 0.0) {
            return Err(Error::config("threshold_floor_mw", "must be > 0"));
        }
        self.eh_curve
            .validate()
            .map_err(|e| Error::config("eh_curve", e.to_string()))?;
        self.fading
            .validate()
            .map_err(|e| Error::config("fading", e.to_string()))?;
        Ok(())
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            sigma0_sq_mw: dbm_to_mw(self.sigma0_sq_dbm),
            sigma1_sq_mw: dbm_to_mw(self.sigma1_sq_dbm),
        }
    }

    /// Radiated budget `P - P_circ` in mW.
    pub fn radiated_mw(&self) -> f64 {
        dbm_to_mw(self.p_dbm) - dbm_to_mw(self.p_circ_dbm)
    }

    /// Copy with `P` chosen so that `P - P_circ` equals `p0_dbm`.
    pub fn with_radiated_dbm(&self, p0_dbm: f64) -> Self {
        SystemConfig {
            p_dbm: mw_to_dbm(dbm_to_mw(p0_dbm) + dbm_to_mw(self.p_circ_dbm)),
            ..self.clone()
        }
    }
}

/// Which energy demand dominates when the budget cannot cover both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    AcSupply,
    DcHarvest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Infeasibility {
    /// `gamma <= theta + eps_bar`: even diverting all power cannot meet both
    /// demands.
    InsufficientPower {
        required_mw: f64,
        available_mw: f64,
        dominant: Threshold,
    },
    /// The harvest target is at or above the rectifier saturation level.
    HarvestSaturated { target_mw: f64, saturation_mw: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Thresholds that were zero and replaced by the configured floor.
    pub clamped: Vec<Threshold>,
    pub infeasibility: Option<Infeasibility>,
}

/// Worst-case performance at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rate_bpshz: f64,
    pub sp_ac_mw: f64,
    pub eh_dc_mw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub w: Vec<Complex64>,
    /// `(rho*, phi*)` as computed, even when outside (0, 1).
    pub rho: f64,
    pub phi: f64,
    pub gamma_mw: f64,
    pub epsilon_bar_mw: f64,
    pub feasible: bool,
    /// Present exactly when `feasible`.
    pub metrics: Option<Metrics>,
    pub diagnostics: Diagnostics,
}

impl Solution {
    pub fn splits(&self) -> Option<SplitPair> {
        if self.feasible {
            SplitPair::new(self.rho, self.phi).ok()
        } else {
            None
        }
    }

    pub fn rate(&self) -> Option<f64> {
        self.metrics.map(|m| m.rate_bpshz)
    }
}

/// Maximum-ratio beamformer `sqrt(p) h_hat / |h_hat|`.
///
/// `h_hat h_hat^H` has rank one, so its principal eigenvector is the
/// normalised estimate itself.
pub fn optimal_beamformer(estimate: &ChannelEstimate, p_mw: f64) -> Result<Vec<Complex64>> {
    model::positive("p_mw", p_mw)?;
    let scale = (p_mw / estimate.norm_sq()).sqrt();
    Ok(estimate.h_hat().iter().map(|h| h * scale).collect())
}

/// Worst-case received power under the optimal beamformer,
/// `(1 - sqrt(psi))^2 p |h_hat|^2`.
pub fn gamma(estimate: &ChannelEstimate, psi: f64, p_mw: f64) -> Result<f64> {
    check_psi(psi)?;
    model::positive("p_mw", p_mw)?;
    let margin = 1.0 - psi.sqrt();
    Ok(margin * margin * p_mw * estimate.norm_sq())
}

/// Raw balance point `(rho*, phi*)` without any feasibility classification.
pub fn balance_point(gamma_mw: f64, theta_mw: f64, epsilon_bar_mw: f64) -> (f64, f64) {
    let demand = theta_mw + epsilon_bar_mw;
    (demand / gamma_mw, epsilon_bar_mw / demand)
}

/// Optimal splits for worst-case gain `gamma_mw`, AC demand `theta_mw` and
/// rectifier-input demand `epsilon_bar_mw`.
pub fn optimal_splits(gamma_mw: f64, theta_mw: f64, epsilon_bar_mw: f64) -> Result<SplitPair> {
    model::positive("gamma_mw", gamma_mw)?;
    model::positive("theta_mw", theta_mw)?;
    model::positive("epsilon_bar_mw", epsilon_bar_mw)?;
    let (rho, phi) = balance_point(gamma_mw, theta_mw, epsilon_bar_mw);
    if rho >= 1.0 - FEASIBILITY_GUARD {
        return Err(Error::Domain {
            name: "rho*",
            value: rho,
            expected: "< 1: the worst-case gain must exceed theta + eps_bar",
        });
    }
    SplitPair::new(rho, phi)
}

/// Signature of a split rule; [`optimal_splits`] is the only correct one, but
/// validation can substitute a faulty rule to prove the oracles catch it.
pub type SplitRule = fn(f64, f64, f64) -> Result<SplitPair>;

/// Solves the robust design for one channel estimate.
///
/// Infeasible scenarios come back as `Ok` with `feasible == false`; `Err` is
/// reserved for invalid configuration.
pub fn solve(config: &SystemConfig, estimate: &ChannelEstimate) -> Result<Solution> {
    solve_with(config, estimate, optimal_splits)
}

pub fn solve_with(
    config: &SystemConfig,
    estimate: &ChannelEstimate,
    rule: SplitRule,
) -> Result<Solution> {
    config.validate_structure()?;
    if estimate.antennas() != config.antennas {
        return Err(Error::config(
            "antennas",
            format!(
                "config has {} antennas but the channel has {}",
                config.antennas,
                estimate.antennas()
            ),
        ));
    }
    let p_mw = config.radiated_mw();
    let w = optimal_beamformer(estimate, p_mw)?;
    let gamma_mw = gamma(estimate, config.psi, p_mw)?;
    let mut diagnostics = Diagnostics::default();

    let curve = &config.eh_curve;
    let epsilon_bar_mw = match eh_dc_inverse(config.epsilon_mw, curve) {
        Ok(v) => v,
        Err(Error::InfeasibleTarget {
            target_mw,
            saturation_mw,
        }) => {
            diagnostics.infeasibility = Some(Infeasibility::HarvestSaturated {
                target_mw,
                saturation_mw,
            });
            return Ok(Solution {
                w,
                rho: f64::NAN,
                phi: f64::NAN,
                gamma_mw,
                epsilon_bar_mw: f64::INFINITY,
                feasible: false,
                metrics: None,
                diagnostics,
            });
        }
        Err(e) => return Err(e),
    };

    let mut theta = config.theta_mw;
    if theta == 0.0 {
        theta = config.threshold_floor_mw;
        diagnostics.clamped.push(Threshold::AcSupply);
    }
    let mut eps_bar = epsilon_bar_mw;
    if eps_bar == 0.0 {
        eps_bar = config.threshold_floor_mw;
        diagnostics.clamped.push(Threshold::DcHarvest);
    }

    let (rho, phi, splits) = match rule(gamma_mw, theta, eps_bar) {
        Ok(s) => (s.rho(), s.phi(), Some(s)),
        Err(_) => {
            let (rho, phi) = balance_point(gamma_mw, theta, eps_bar);
            diagnostics.infeasibility = Some(Infeasibility::InsufficientPower {
                required_mw: theta + eps_bar,
                available_mw: gamma_mw,
                dominant: if theta >= eps_bar {
                    Threshold::AcSupply
                } else {
                    Threshold::DcHarvest
                },
            });
            (rho, phi, None)
        }
    };

    let metrics = match splits {
        Some(s) => Some(Metrics {
            rate_bpshz: model::rate(gamma_mw, s.rho(), &config.noise())?,
            sp_ac_mw: model::ac_supply_power(gamma_mw, s)?,
            eh_dc_mw: eh_dc(model::rectifier_input(gamma_mw, s)?, curve)?,
        }),
        None => None,
    };

    Ok(Solution {
        w,
        rho,
        phi,
        gamma_mw,
        epsilon_bar_mw,
        feasible: metrics.is_some(),
        metrics,
        diagnostics,
    })
}
