//! Robust power-splitting SWIPT receiver with AC computing.
//!
//! A multi-antenna transmitter serves a single-antenna receiver that splits
//! the received RF power between an information decoder, a rectifier
//! (harvested DC) and AC-powered computational logic. Given only an estimate
//! of the channel, with the true channel anywhere in a ball of relative
//! radius `sqrt(psi)` around it, the crate finds the beamformer and splitting
//! ratios that maximise the worst-case rate while guaranteeing the AC supply
//! and harvested power in the worst case.
//!
//! * [`model`]: rate, AC supply, nonlinear harvester and its inverse.
//! * [`channel`]: Rician channel sampling and worst-case error geometry.
//! * [`solver`]: the closed-form design.
//! * [`oracle`]: brute-force checks of every closed-form step.
//! * [`experiments`]: paired Monte Carlo sweeps.
//! * [`config`] / [`report`]: scenario files, CSV, manifests and charts.
//!
//! ```
//! use swipt_ac::{channel, solver::{solve, SystemConfig}};
//!
//! let config = SystemConfig::default();
//! let mut rng = channel::realization_rng(7, 0);
//! let h = channel::sample_channel(&config.fading, config.antennas, &mut rng).unwrap();
//! let sol = solve(&config, &h).unwrap();
//! assert!(sol.feasible);
//! let m = sol.metrics.unwrap();
//! assert!((m.sp_ac_mw - config.theta_mw).abs() < 1e-12);
//! ```

pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod report;
pub mod solver;

pub use channel::{ChannelEstimate, FadingParams};
pub use config::ScenarioFile;
pub use error::{Error, Result};
pub use experiments::{ExperimentSettings, InfeasiblePolicy, SweepResult};
pub use model::{EhCurve, NoiseModel, SplitPair};
pub use solver::{Solution, SystemConfig};
