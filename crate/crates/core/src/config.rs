//! Scenario files.
//!
//! A scenario file is a JSON object with a mandatory `system` block and an
//! optional `experiments` block:
//!
//! ```json
//! {
//!   "system": {
//!     "antennas": 4,
//!     "p_dbm": 10.4139, "p_circ_dbm": 0.0,
//!     "sigma0_sq_dbm": -111.0, "sigma1_sq_dbm": 35.0,
//!     "psi": 0.0, "theta_mw": 0.00027, "epsilon_mw": 0.2,
//!     "eh_curve": { "m_eh_mw": 3.9, "a_per_mw": 1500.0, "b_mw": 0.0022 },
//!     "fading": { "rician_k_db": 6.0, "pathloss_exponent": 2.6, "distance_m": 4.0 }
//!   },
//!   "experiments": { "realizations": 10000, "seed": 1 }
//! }
//! ```
//!
//! A run manifest written next to sweep outputs is also accepted wherever a
//! scenario file is, and reproduces the run it describes.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelEstimate;
use crate::error::{Error, Result};
use crate::experiments::ExperimentSettings;
use crate::report::RunManifest;
use crate::solver::SystemConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub system: SystemConfig,
    #[serde(default)]
    pub experiments: ExperimentSettings,
}

/// A scenario plus, when it came from a manifest, the command that produced it.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: ScenarioFile,
    pub from_manifest: Option<RunManifest>,
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.experiments.validate()
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<LoadedScenario> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|source| Error::Json {
                path: origin.to_path_buf(),
                source,
            })?;
        let loaded = if value.get("manifest_version").is_some() {
            let manifest: RunManifest = parse(value, origin)?;
            LoadedScenario {
                scenario: manifest.scenario.clone(),
                from_manifest: Some(manifest),
            }
        } else {
            LoadedScenario {
                scenario: parse(value, origin)?,
                from_manifest: None,
            }
        };
        Ok(loaded)
    }

    /// Reads and parses a scenario or manifest file. Invariants are not
    /// checked here so that callers can apply overrides first.
    pub fn load(path: impl AsRef<Path>) -> Result<LoadedScenario> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Deserializes `value`, naming the offending field on failure.
fn parse<T: serde::de::DeserializeOwned>(value: serde_json::Value, origin: &Path) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let field = e.path().to_string();
        let source = e.into_inner();
        if field == "." {
            Error::Json {
                path: origin.to_path_buf(),
                source,
            }
        } else {
            Error::config(field, format!("{}: {source}", origin.display()))
        }
    })
}

/// Explicit channel estimate on disk: `{"h_hat": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub h_hat: Vec<[f64; 2]>,
}

impl ChannelFile {
    pub fn load(path: impl AsRef<Path>) -> Result<ChannelEstimate> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ChannelFile = parse(value, path)?;
        file.into_estimate()
    }

    pub fn into_estimate(self) -> Result<ChannelEstimate> {
        ChannelEstimate::new(
            self.h_hat
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }

    pub fn from_estimate(estimate: &ChannelEstimate) -> Self {
        ChannelFile {
            h_hat: estimate.h_hat().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_round_trips_through_json() {
        let s = ScenarioFile::default();
        let back = ScenarioFile::from_json(&s.to_json(), Path::new("mem")).unwrap();
        assert_eq!(back.scenario, s);
        assert!(back.from_manifest.is_none());
    }

    #[test]
    fn missing_field_is_reported_by_name() {
        let mut v: serde_json::Value =
            serde_json::from_str(&ScenarioFile::default().to_json()).unwrap();
        v["system"].as_object_mut().unwrap().remove("psi");
        let err = ScenarioFile::from_json(&v.to_string(), Path::new("cfg.json")).unwrap_err();
        assert!(err.to_string().contains("psi"), "{err}");
        assert!(err.is_config_error());
    }

    #[test]
    fn wrong_type_is_reported_with_its_path() {
        let mut v: serde_json::Value =
            serde_json::from_str(&ScenarioFile::default().to_json()).unwrap();
        v["system"]["fading"]["distance_m"] = "far".into();
        let err = ScenarioFile::from_json(&v.to_string(), Path::new("cfg.json")).unwrap_err();
        assert!(
            err.to_string().contains("system.fading.distance_m"),
            "{err}"
        );
    }

    #[test]
    fn unknown_field_is_rejected() {
        let mut v: serde_json::Value =
            serde_json::from_str(&ScenarioFile::default().to_json()).unwrap();
        v["system"]["antenas"] = 4.into();
        let err = ScenarioFile::from_json(&v.to_string(), Path::new("cfg.json")).unwrap_err();
        assert!(err.to_string().contains("antenas"), "{err}");
    }

    #[test]
    fn experiments_block_is_optional() {
        let v = serde_json::json!({ "system": SystemConfig::default() });
        let s = ScenarioFile::from_json(&v.to_string(), Path::new("x")).unwrap();
        assert_eq!(s.scenario.experiments, ExperimentSettings::default());
    }

    #[test]
    fn channel_file_round_trip() {
        let f = ChannelFile {
            h_hat: vec![[1.0, 0.0], [0.0, -2.0]],
        };
        let est = f.clone().into_estimate().unwrap();
        assert_eq!(est.norm_sq(), 5.0);
        assert_eq!(ChannelFile::from_estimate(&est), f);
        assert!(ChannelFile {
            h_hat: vec![[0.0, 0.0]]
        }
        .into_estimate()
        .is_err());
    }
}
