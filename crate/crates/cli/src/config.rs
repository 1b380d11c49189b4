//! Run configuration: a TOML file, overridden by command-line flags.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Everything a run depends on. Serialized into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    /// Target exponent for `embed` and `strichartz`; `inf` is allowed.
    pub q: Option<f64>,
    pub s: f64,
    pub gamma: f64,
    pub k: u32,
    /// Lower smoothness for the inclusion case of `struct`.
    pub r: Option<f64>,
    pub modes: usize,
    pub decay: f64,
    pub samples: usize,
    pub seed: u64,
    pub resolution: usize,
    pub sequential: bool,
    pub preset: Option<String>,
    pub case: Option<String>,
    pub kind: Option<String>,
    pub points: Option<usize>,
    pub interval: Option<u32>,
    pub eta: Option<f64>,
    pub xi: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub s_values: Option<Vec<f64>>,
    pub cases: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: String::new(),
            alpha: 0.0,
            beta: 0.0,
            p: 2.0,
            q: None,
            s: 1.0,
            gamma: 0.5,
            k: 2,
            r: None,
            modes: 32,
            decay: 1.5,
            samples: 300,
            seed: 20240611,
            resolution: 128,
            sequential: false,
            preset: None,
            case: None,
            kind: None,
            points: None,
            interval: None,
            eta: None,
            xi: None,
            times: None,
            s_values: None,
            cases: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Fails for seeds above `i64::MAX`, which TOML integers cannot hold.
    pub fn to_toml(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }

    /// Copy without the output location, so that reports written to
    /// different directories stay byte-identical.
    pub fn for_report(&self) -> Self {
        Self {
            out: None,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_is_lossless() {
        let cfg = RunConfig {
            experiment: "embed".into(),
            alpha: -0.3,
            beta: 0.1 + 0.2,
            q: Some(f64::INFINITY),
            s_values: Some(vec![0.25, 1.0 / 3.0]),
            out: Some("runs/x".into()),
            seed: i64::MAX as u64,
            ..Default::default()
        };
        let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
        let big = RunConfig {
            seed: u64::MAX,
            ..Default::default()
        };
        assert!(big.to_toml().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("alpah = 0.5").is_err());
        let partial = RunConfig::from_toml("alpha = 0.5\nsamples = 40").unwrap();
        assert_eq!(partial.alpha, 0.5);
        assert_eq!(partial.samples, 40);
        assert_eq!(partial.seed, RunConfig::default().seed);
    }
}
