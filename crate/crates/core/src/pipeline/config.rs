use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::builders::ScatteringParams;
use crate::error::{Error, Result};
use crate::noise::{NoiseConfig, ReadoutConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exact output distributions; no shot noise.
    Exact,
    /// `shots` samples per circuit, split over the randomizations.
    Shots,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "shots" => Ok(Mode::Shots),
            _ => Err(Error::Config(format!("mode must be exact or shots, got {s:?}"))),
        }
    }
}

pub fn default_noise() -> NoiseConfig {
    NoiseConfig {
        depolarizing: Some(0.01),
        readout: Some(ReadoutConfig { flip0: 0.02, flip1: 0.05, per_qubit: None }),
        ..NoiseConfig::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Interacting case; the free case is the same with `U = 0`.
    pub scattering: ScatteringParams,
    pub noise: NoiseConfig,
    pub n_rand: usize,
    /// Per circuit, before splitting over randomizations.
    pub shots: u64,
    pub alpha: u32,
    pub n_trotter_max: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub mode: Mode,
    pub n_boot: usize,
    /// Steps with `1/(P₊+P₋)` above this are flagged.
    pub inverse_prob_threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scattering: ScatteringParams::default(),
            noise: default_noise(),
            n_rand: 30,
            shots: 10_000,
            alpha: 10,
            n_trotter_max: 7,
            seed: 0,
            out_dir: PathBuf::from("results"),
            mode: Mode::Shots,
            n_boot: 1000,
            inverse_prob_threshold: 10.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| e.in_stage(format!("config {}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.scattering.validate()?;
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.n_rand == 0 {
            return bad("n_rand must be >= 1");
        }
        if self.mode == Mode::Shots && self.shots < self.n_rand as u64 {
            return bad("shots must be at least n_rand");
        }
        if self.alpha == 0 || self.alpha % 2 == 1 {
            return bad("alpha must be even and positive");
        }
        if self.n_trotter_max == 0 {
            return bad("n_trotter_max must be >= 1");
        }
        if !(self.inverse_prob_threshold > 0.0) {
            return bad("inverse_prob_threshold must be positive");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
