use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::esn::EsnParams;
use crate::link_sim::LinkParams;

/// A sweep description, read from TOML.
///
/// Only `fiber_length_km` is required. `fiber_length_km` and `snr_db` take a
/// number or a list of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(deserialize_with = "one_or_many")]
    pub fiber_length_km: Vec<f64>,
    #[serde(default = "default_snr_grid", deserialize_with = "one_or_many")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_n_out")]
    pub n_out: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_total_symbols")]
    pub total_symbols: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub link: LinkParams,
    #[serde(default)]
    pub esn: EsnParams,
}

fn default_label() -> String {
    "experiment".to_string()
}

/// 8 to 30 dB in 1 dB steps.
pub fn default_snr_grid() -> Vec<f64> {
    (8..=30).map(f64::from).collect()
}

fn default_n_out() -> Vec<usize> {
    vec![1, 17, 23]
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

fn default_total_symbols() -> usize {
    1 << 18
}

fn default_train_fraction() -> f64 {
    0.15
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

fn strictly_increasing(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::config(name, "must not be empty"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::config(name, "must contain finite numbers"));
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(name, "must be strictly increasing"));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Config with every default applied and the given lengths.
    pub fn with_lengths(fiber_length_km: Vec<f64>) -> Self {
        ExperimentConfig {
            label: default_label(),
            fiber_length_km,
            snr_db: default_snr_grid(),
            n_out: default_n_out(),
            seeds: default_seeds(),
            total_symbols: default_total_symbols(),
            train_fraction: default_train_fraction(),
            link: LinkParams::default(),
            esn: EsnParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        strictly_increasing("fiber_length_km", &self.fiber_length_km)?;
        if self.fiber_length_km[0] < 0.0 {
            return Err(Error::config("fiber_length_km", "must be non-negative"));
        }
        strictly_increasing("snr_db", &self.snr_db)?;
        if self.n_out.is_empty() {
            return Err(Error::config("n_out", "must not be empty"));
        }
        let m = self.esn.window_len();
        if let Some(&bad) = self.n_out.iter().find(|&&n| n == 0 || n > m) {
            return Err(Error::config("n_out", format!("{bad} is outside 1..={m}")));
        }
        if self.n_out.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("n_out", "must be strictly increasing"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "must not be empty"));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(Error::config("seeds", "has repeated entries"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config("train_fraction", "must lie in (0, 1)"));
        }
        if self.total_symbols == 0 {
            return Err(Error::config("total_symbols", "must be positive"));
        }
        self.link.validate()?;
        self.esn.validate()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads, defaults and validates a TOML experiment file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml(&text, path)
}
