//! Estimated channels and the bounded error ball around them.
//!
//! The transmitter only knows an estimate `h_hat`; the true channel is
//! `h_hat + e` for some error with `|e|^2 <= psi |h_hat|^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::positive;

/// A non-degenerate channel estimate with its squared norm cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    h_hat: Vec<Complex64>,
    norm_sq: f64,
}

impl ChannelEstimate {
    pub fn new(h_hat: Vec<Complex64>) -> Result<Self> {
        if h_hat.is_empty() {
            return Err(Error::Channel("estimate has no antennas".into()));
        }
        if h_hat.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::Channel("estimate has non-finite entries".into()));
        }
        let norm_sq = norm_sq(&h_hat);
        if norm_sq <= 0.0 {
            return Err(Error::Channel("estimate is identically zero".into()));
        }
        Ok(ChannelEstimate { h_hat, norm_sq })
    }

    pub fn h_hat(&self) -> &[Complex64] {
        &self.h_hat
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn antennas(&self) -> usize {
        self.h_hat.len()
    }

    /// `h_hat^H w`.
    pub fn project(&self, w: &[Complex64]) -> Complex64 {
        inner(&self.h_hat, w)
    }
}

/// Large-scale and small-scale fading parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    pub rician_k_db: f64,
    pub pathloss_exponent: f64,
    pub distance_m: f64,
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        positive("distance_m", self.distance_m)?;
        positive("pathloss_exponent", self.pathloss_exponent)?;
        if self.rician_k_db.is_nan() {
            return Err(Error::Domain {
                name: "rician_k_db",
                value: self.rician_k_db,
                expected: "a number (+/-inf allowed)",
            });
        }
        Ok(())
    }

    pub fn rician_k_linear(&self) -> f64 {
        10f64.powf(self.rician_k_db / 10.0)
    }
}

impl Default for FadingParams {
    fn default() -> Self {
        FadingParams {
            rician_k_db: 6.0,
            pathloss_exponent: 2.6,
            distance_m: 4.0,
        }
    }
}

/// Distance path-loss power gain `d^-alpha`, unity at 1 m.
pub fn pathloss_gain(params: &FadingParams) -> f64 {
    params.distance_m.powf(-params.pathloss_exponent)
}

/// Draws one Rician channel estimate with `m` antennas.
///
/// Each entry is `sqrt(G) (sqrt(K/(K+1)) e^{j theta} + sqrt(1/(K+1)) g)` with an
/// independent uniform line-of-sight phase per antenna and unit-variance
/// circularly-symmetric Gaussian scatter `g`.
pub fn sample_channel<R: Rng + ?Sized>(
    params: &FadingParams,
    m: usize,
    rng: &mut R,
) -> Result<ChannelEstimate> {
    if m == 0 {
        return Err(Error::Domain {
            name: "antennas",
            value: 0.0,
            expected: ">= 1",
        });
    }
    params.validate()?;
    let amplitude = pathloss_gain(params).sqrt();
    let k = params.rician_k_linear();
    let (los, nlos) = if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
    };
    let h_hat = (0..m)
        .map(|_| {
            let theta: f64 = rng.random::<f64>() * 2.0 * PI;
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let scatter = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            (Complex64::from_polar(los, theta) + scatter * nlos) * amplitude
        })
        .collect();
    ChannelEstimate::new(h_hat)
}

/// Independent random stream for realization `index` under `seed`.
///
/// Streams are keyed by `(seed, index)` only, so results do not depend on
/// how realizations are scheduled across threads.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The minimising error `-sqrt(psi) h_hat`.
pub fn worst_case_error(estimate: &ChannelEstimate, psi: f64) -> Result<Vec<Complex64>> {
    check_psi(psi)?;
    let scale = -psi.sqrt();
    Ok(estimate.h_hat.iter().map(|h| h * scale).collect())
}

/// `(1 - sqrt(psi))^2 |h_hat^H w|^2`, the worst-case gain attained at
/// [`worst_case_error`]. Exact when `w` is collinear with `h_hat`.
pub fn worst_case_gain_aligned(
    estimate: &ChannelEstimate,
    w: &[Complex64],
    psi: f64,
) -> Result<f64> {
    check_psi(psi)?;
    let margin = 1.0 - psi.sqrt();
    Ok(margin * margin * estimate.project(w).norm_sqr())
}

/// Exact minimum of `|(h_hat + e)^H w|^2` over the ball
/// `|e|^2 <= psi |h_hat|^2`, for any `w`.
pub fn worst_case_gain_ball(estimate: &ChannelEstimate, w: &[Complex64], psi: f64) -> Result<f64> {
    check_psi(psi)?;
    let radius = (psi * estimate.norm_sq).sqrt();
    let reach = estimate.project(w).norm() - radius * norm_sq(w).sqrt();
    Ok(reach.max(0.0).powi(2))
}

pub(crate) fn check_psi(psi: f64) -> Result<()> {
    if (0.0..1.0).contains(&psi) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "psi",
            value: psi,
            expected: "inside [0, 1)",
        })
    }
}

/// `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
