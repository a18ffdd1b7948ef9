//! Receiver-side link model.
//!
//! Everything here is a pure function of its arguments and works in linear
//! milliwatts; dBm only appears through [`dbm_to_mw`] / [`mw_to_dbm`] at the
//! configuration and reporting boundary.
//!
//! The receiver splits the incoming RF power three ways. A fraction `1 - rho`
//! goes to the information decoder, and the remaining `rho` is split again:
//! `rho * phi` feeds the rectifier (DC harvest) and `rho * (1 - phi)` drives
//! the AC computational logic directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent arguments are clamped to this magnitude before `exp`.
const EXP_CLAMP: f64 = 700.0;

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Nonlinear (logistic) rectifier model, normalised so that zero input
/// harvests exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EhCurve {
    /// Saturation level in mW.
    pub m_eh_mw: f64,
    /// Steepness in 1/mW.
    pub a_per_mw: f64,
    /// Centre of the logistic in mW.
    pub b_mw: f64,
}

impl EhCurve {
    pub fn new(m_eh_mw: f64, a_per_mw: f64, b_mw: f64) -> Result<Self> {
        let curve = EhCurve {
            m_eh_mw,
            a_per_mw,
            b_mw,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        positive("m_eh_mw", self.m_eh_mw)?;
        positive("a_per_mw", self.a_per_mw)?;
        positive("b_mw", self.b_mw)?;
        Ok(())
    }

    /// Logistic value at zero input, `1 / (1 + e^(ab))`.
    fn offset(&self) -> f64 {
        logistic(self.a_per_mw * self.b_mw)
    }
}

impl Default for EhCurve {
    /// Measured rectifier constants: 3.9 mW saturation, a = 1500, b = 0.0022.
    fn default() -> Self {
        EhCurve {
            m_eh_mw: 3.9,
            a_per_mw: 1500.0,
            b_mw: 0.0022,
        }
    }
}

/// Power-splitting ratios, both strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPair {
    rho: f64,
    phi: f64,
}

impl SplitPair {
    pub fn new(rho: f64, phi: f64) -> Result<Self> {
        open_unit("rho", rho)?;
        open_unit("phi", phi)?;
        Ok(SplitPair { rho, phi })
    }

    /// Fraction of received power diverted away from the decoder.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Fraction of the diverted power sent to the rectifier.
    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Antenna and decoder noise variances in mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma0_sq_mw: f64,
    pub sigma1_sq_mw: f64,
}

impl NoiseModel {
    pub fn new(sigma0_sq_mw: f64, sigma1_sq_mw: f64) -> Result<Self> {
        let noise = NoiseModel {
            sigma0_sq_mw,
            sigma1_sq_mw,
        };
        noise.validate()?;
        Ok(noise)
    }

    pub fn from_dbm(sigma0_sq_dbm: f64, sigma1_sq_dbm: f64) -> Result<Self> {
        Self::new(dbm_to_mw(sigma0_sq_dbm), dbm_to_mw(sigma1_sq_dbm))
    }

    pub fn validate(&self) -> Result<()> {
        positive("sigma0_sq_mw", self.sigma0_sq_mw)?;
        positive("sigma1_sq_mw", self.sigma1_sq_mw)
    }

    /// Effective noise seen by the decoder when a fraction `rho` is split off.
    fn decoder_noise(&self, rho: f64) -> f64 {
        self.sigma0_sq_mw + self.sigma1_sq_mw / (1.0 - rho)
    }
}

/// Achievable rate in bps/Hz (base-2 logarithm) for received signal power
/// `gain_mw` when a fraction `rho` of it is diverted to harvesting.
pub fn rate(gain_mw: f64, rho: f64, noise: &NoiseModel) -> Result<f64> {
    non_negative("gain_mw", gain_mw)?;
    open_unit("rho", rho)?;
    Ok((gain_mw / noise.decoder_noise(rho)).ln_1p() / std::f64::consts::LN_2)
}

/// Power reaching the AC computational logic.
pub fn ac_supply_power(gain_mw: f64, splits: SplitPair) -> Result<f64> {
    non_negative("gain_mw", gain_mw)?;
    Ok(splits.rho * (1.0 - splits.phi) * gain_mw)
}

/// Power entering the rectifier, before the nonlinear conversion.
pub fn rectifier_input(gain_mw: f64, splits: SplitPair) -> Result<f64> {
    non_negative("gain_mw", gain_mw)?;
    Ok(splits.rho * splits.phi * gain_mw)
}

/// Harvested DC power for a rectifier input of `input_mw`.
pub fn eh_dc(input_mw: f64, curve: &EhCurve) -> Result<f64> {
    non_negative("input_mw", input_mw)?;
    let offset = curve.offset();
    let sigmoid = logistic(-curve.a_per_mw * (input_mw - curve.b_mw));
    Ok(curve.m_eh_mw * (sigmoid - offset) / (1.0 - offset))
}

/// Rectifier input required to harvest exactly `target_mw`.
///
/// Closed-form inverse of [`eh_dc`]. It is algebraically the same as
/// `b - ln(e^(ab) (M - eps) / (e^(ab) eps + M)) / a` but is arranged as
/// `ln(1 + eps (1 + e^(ab)) / (M - eps)) / a`, which is exactly zero at
/// `eps = 0` and does not cancel catastrophically for small targets.
pub fn eh_dc_inverse(target_mw: f64, curve: &EhCurve) -> Result<f64> {
    non_negative("target_mw", target_mw)?;
    if target_mw >= curve.m_eh_mw {
        return Err(Error::InfeasibleTarget {
            target_mw,
            saturation_mw: curve.m_eh_mw,
        });
    }
    if target_mw == 0.0 {
        return Ok(0.0);
    }
    let ab = curve.a_per_mw * curve.b_mw;
    let log_ratio = target_mw.ln() + softplus(ab) - (curve.m_eh_mw - target_mw).ln();
    let log_term = if log_ratio > 35.0 {
        // ln(1 + e^x) == x to double precision here
        log_ratio
    } else {
        log_ratio.exp().ln_1p()
    };
    Ok(log_term / curve.a_per_mw)
}

/// `1 / (1 + e^x)`, with the exponent clamped so that steep curves saturate
/// to 0 or 1 instead of producing `inf`/`NaN`.
fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + x.clamp(-EXP_CLAMP, EXP_CLAMP).exp())
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "finite and > 0",
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "finite and >= 0",
        })
    }
}

pub(crate) fn open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "strictly inside (0, 1)",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Literal transcription of the textbook inverse, used only as a check.
    fn inverse_literal(eps: f64, c: &EhCurve) -> f64 {
        let e_ab = (c.a_per_mw * c.b_mw).exp();
        c.b_mw - ((e_ab * (c.m_eh_mw - eps)) / (e_ab * eps + c.m_eh_mw)).ln() / c.a_per_mw
    }

    /// Bisection on the forward curve; independent of the closed form.
    fn inverse_bisect(eps: f64, c: &EhCurve) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        while eh_dc(hi, c).unwrap() < eps {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eh_dc(mid, c).unwrap() < eps {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn dbm_conversions() {
        assert_eq!(dbm_to_mw(0.0), 1.0);
        assert!(close(dbm_to_mw(10.0), 10.0, 1e-12));
        let v = dbm_to_mw(-111.0);
        assert!(((v - 7.943_282_347_242_81e-12) / v).abs() < 1e-12);
        assert!(close(mw_to_dbm(dbm_to_mw(35.0)), 35.0, 1e-12));
    }

    #[test]
    fn rate_examples() {
        let unit = NoiseModel::new(1.0, 1.0).unwrap();
        assert!(close(rate(3.0, 0.5, &unit).unwrap(), 1.0, 1e-15));
        assert_eq!(rate(0.0, 0.3, &unit).unwrap(), 0.0);
        let n = NoiseModel::new(0.5, 0.05).unwrap();
        assert!(close(rate(1.0, 0.9, &n).unwrap(), 1.0, 1e-14));
    }

    #[test]
    fn rate_rejects_rho_outside_open_interval() {
        let n = NoiseModel::new(1.0, 1.0).unwrap();
        for rho in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(rate(1.0, rho, &n), Err(Error::Domain { .. })));
        }
        assert!(rate(-1.0, 0.5, &n).is_err());
    }

    #[test]
    fn ac_supply_examples() {
        let half = SplitPair::new(0.5, 0.5).unwrap();
        assert_eq!(ac_supply_power(4.0, half).unwrap(), 1.0);
        assert_eq!(ac_supply_power(0.0, half).unwrap(), 0.0);
        let s = SplitPair::new(0.2, 0.3).unwrap();
        assert!(close(ac_supply_power(10.0, s).unwrap(), 1.4, 1e-14));
    }

    #[test]
    fn split_pair_rejects_closed_bounds() {
        assert!(SplitPair::new(0.0, 0.5).is_err());
        assert!(SplitPair::new(0.5, 1.0).is_err());
        assert!(SplitPair::new(0.5, 0.5).is_ok());
    }

    #[test]
    fn eh_dc_examples() {
        let c = EhCurve::default();
        assert_eq!(eh_dc(0.0, &c).unwrap(), 0.0);
        // at the centre the logistic is M/2, then normalised
        let off = 1.0 / (1.0 + 3.3f64.exp());
        let expected = (1.95 - 3.9 * off) / (1.0 - off);
        let got = eh_dc(0.0022, &c).unwrap();
        assert!(close(got, expected, 1e-14));
        assert!(close(got, 1.87808, 1e-5));
        assert!(close(eh_dc(1.0, &c).unwrap(), 3.9, 1e-9));
        assert!(eh_dc(-1e-9, &c).is_err());
    }

    #[test]
    fn eh_dc_does_not_overflow_for_huge_inputs() {
        let c = EhCurve::default();
        for x in [0.5, 1.0, 1e3, 1e12] {
            let v = eh_dc(x, &c).unwrap();
            assert!(v.is_finite() && v <= c.m_eh_mw);
        }
    }

    #[test]
    fn eh_inverse_examples() {
        let c = EhCurve::default();
        assert_eq!(eh_dc_inverse(0.0, &c).unwrap(), 0.0);
        let v = eh_dc_inverse(0.2, &c).unwrap();
        let oracle = inverse_bisect(0.2, &c);
        assert!(close(v, oracle, 1e-12), "{v} vs {oracle}");
        assert!(close(v, 6.160e-4, 5e-7));
        assert!(close(v, inverse_literal(0.2, &c), 1e-15));
        let centre = eh_dc(0.0022, &c).unwrap();
        assert!(close(eh_dc_inverse(centre, &c).unwrap(), 0.0022, 1e-12));
    }

    #[test]
    fn eh_inverse_errors() {
        let c = EhCurve::default();
        assert!(matches!(
            eh_dc_inverse(3.9, &c),
            Err(Error::InfeasibleTarget { .. })
        ));
        assert!(matches!(
            eh_dc_inverse(4.5, &c),
            Err(Error::InfeasibleTarget { .. })
        ));
        assert!(matches!(eh_dc_inverse(-0.1, &c), Err(Error::Domain { .. })));
    }

    #[test]
    fn eh_inverse_handles_extreme_steepness() {
        // e^(ab) overflows f64 here; the log-space path must still invert.
        let c = EhCurve::new(1.0, 1e6, 1e-3).unwrap();
        let x = eh_dc_inverse(0.5, &c).unwrap();
        assert!(x.is_finite());
        assert!(close(eh_dc(x, &c).unwrap(), 0.5, 1e-9));
    }

    #[test]
    fn curve_validation() {
        assert!(EhCurve::new(0.0, 1.0, 1.0).is_err());
        assert!(EhCurve::new(1.0, -1.0, 1.0).is_err());
        assert!(EhCurve::new(1.0, 1.0, f64::INFINITY).is_err());
        assert!(NoiseModel::new(1.0, 0.0).is_err());
    }
}
