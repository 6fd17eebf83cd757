//! Scenario parameters.
//!
//! [`ScenarioFile`] is the on-disk form (powers in dBm, SINR targets in dB).
//! [`ScenarioConfig`] is the validated, linear-unit form every other module
//! consumes. Conversion happens once, in [`ScenarioConfig::from_file`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

/// SINR threshold for delivering `bytes` within `duration_s` over `bandwidth_hz`,
/// i.e. `2^(bits / (duration * bandwidth)) - 1`.
pub fn packet_sinr_threshold(bytes: f64, duration_s: f64, bandwidth_hz: f64) -> f64 {
    spectral_efficiency_threshold(8.0 * bytes / (duration_s * bandwidth_hz))
}

/// `2^r0 - 1` for a spectral efficiency `r0` in bit/s/Hz.
pub fn spectral_efficiency_threshold(r0: f64) -> f64 {
    r0.exp2() - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecoderKind {
    Zf,
    Tpm,
    Mrt,
}

impl PrecoderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrecoderKind::Zf => "zf",
            PrecoderKind::Tpm => "tpm",
            PrecoderKind::Mrt => "mrt",
        }
    }
}

impl std::fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PrecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zf" => Ok(PrecoderKind::Zf),
            "tpm" => Ok(PrecoderKind::Tpm),
            "mrt" => Ok(PrecoderKind::Mrt),
            other => Err(Error::InvalidArgument(format!("unknown precoder `{other}`"))),
        }
    }
}

/// Domain in which the URLLC candidate target is drawn uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetDrawDomain {
    #[default]
    Linear,
    Db,
}

/// How the URLLC candidate target is drawn when the first draw may be
/// infeasible.
///
/// `Conditional` draws once, uniformly over the feasible part of
/// `[gamma_min, gamma_max]`; this is the limit of redrawing until feasible.
/// `Rejection` redraws on the full range at most `max_redraws` times and
/// skips the candidate afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetSampling {
    #[default]
    Conditional,
    Rejection,
}

/// eMBB SINR targets: one value for all users or one per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EmbbTargetsDb {
    Uniform(f64),
    PerUser(Vec<f64>),
}

/// On-disk scenario description. Every field has a default, so a config file
/// only needs to list what differs from the reference scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub num_antennas: usize,
    pub num_embb: usize,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub pathloss_exponent: f64,
    pub max_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub rician_k_urllc: f64,
    pub rician_k_embb: f64,
    /// URLLC SINR threshold; derived from `spectral_efficiency` when absent.
    pub urllc_sinr_target_db: Option<f64>,
    pub spectral_efficiency: f64,
    pub embb_sinr_target_db: EmbbTargetsDb,
    pub outage_target: f64,
    pub confidence: f64,
    pub chernoff_r: f64,
    pub num_candidates: usize,
    pub history_len: usize,
    pub rng_seed: u64,
    pub max_redraws: usize,
    pub mc_samples: u64,
    pub target_draw_domain: TargetDrawDomain,
    pub target_sampling: TargetSampling,
    pub tpm_damping: f64,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self {
            num_antennas: 8,
            num_embb: 4,
            cell_radius_m: 500.0,
            min_distance_m: 1.0,
            pathloss_exponent: 3.5,
            max_power_dbm: 47.0,
            // thermal -174 dBm/Hz over 10 MHz
            noise_power_dbm: -104.0,
            rician_k_urllc: 0.0,
            rician_k_embb: 0.0,
            urllc_sinr_target_db: None,
            spectral_efficiency: 0.1,
            embb_sinr_target_db: EmbbTargetsDb::Uniform(10.0),
            outage_target: 1e-3,
            confidence: 0.99,
            chernoff_r: 10.0,
            num_candidates: 3000,
            history_len: 500,
            rng_seed: 1,
            max_redraws: 50,
            mc_samples: 1_000_000,
            target_draw_domain: TargetDrawDomain::Linear,
            target_sampling: TargetSampling::Conditional,
            tpm_damping: 1.0,
        }
    }
}

/// Validated scenario in linear units (powers in mW, SINRs linear).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_antennas: usize,
    pub num_embb: usize,
    pub cell_radius: f64,
    pub min_distance: f64,
    pub pathloss_exponent: f64,
    pub max_power: f64,
    pub noise_power: f64,
    pub rician_k_urllc: f64,
    pub rician_k_embb: f64,
    pub urllc_sinr_target: f64,
    pub spectral_efficiency: f64,
    pub embb_sinr_targets: Vec<f64>,
    pub outage_target: f64,
    pub confidence: f64,
    pub chernoff_r: f64,
    pub num_candidates: usize,
    pub history_len: usize,
    pub rng_seed: u64,
    pub max_redraws: usize,
    pub mc_samples: u64,
    pub target_draw_domain: TargetDrawDomain,
    pub target_sampling: TargetSampling,
    pub tpm_damping: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::from_file(&ScenarioFile::default()).expect("default scenario is valid")
    }
}

impl ScenarioConfig {
    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        let embb_sinr_targets = match &file.embb_sinr_target_db {
            EmbbTargetsDb::Uniform(db) => vec![db_to_linear(*db); file.num_embb],
            EmbbTargetsDb::PerUser(v) => v.iter().copied().map(db_to_linear).collect(),
        };
        let urllc_sinr_target = match file.urllc_sinr_target_db {
            Some(db) => db_to_linear(db),
            None => spectral_efficiency_threshold(file.spectral_efficiency),
        };
        let cfg = Self {
            num_antennas: file.num_antennas,
            num_embb: file.num_embb,
            cell_radius: file.cell_radius_m,
            min_distance: file.min_distance_m,
            pathloss_exponent: file.pathloss_exponent,
            max_power: dbm_to_mw(file.max_power_dbm),
            noise_power: dbm_to_mw(file.noise_power_dbm),
            rician_k_urllc: file.rician_k_urllc,
            rician_k_embb: file.rician_k_embb,
            urllc_sinr_target,
            spectral_efficiency: file.spectral_efficiency,
            embb_sinr_targets,
            outage_target: file.outage_target,
            confidence: file.confidence,
            chernoff_r: file.chernoff_r,
            num_candidates: file.num_candidates,
            history_len: file.history_len,
            rng_seed: file.rng_seed,
            max_redraws: file.max_redraws,
            mc_samples: file.mc_samples,
            target_draw_domain: file.target_draw_domain,
            target_sampling: file.target_sampling,
            tpm_damping: file.tpm_damping,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Number of served users, URLLC included.
    pub fn num_users(&self) -> usize {
        self.num_embb + 1
    }

    /// Lower end of the URLLC target draw, `2^r0 - 1`.
    pub fn gamma_min(&self) -> f64 {
        spectral_efficiency_threshold(self.spectral_efficiency)
    }

    /// Replace the eMBB targets with a single value (linear) for all users.
    pub fn set_uniform_embb_target(&mut self, target: f64) {
        self.embb_sinr_targets = vec![target; self.num_embb];
    }

    /// Change the eMBB count, keeping the first eMBB target for every user.
    pub fn set_num_embb(&mut self, k: usize) {
        let t = self.embb_sinr_targets.first().copied().unwrap_or(10.0);
        self.num_embb = k;
        self.embb_sinr_targets = vec![t; k];
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite and > 0, got {v}")))
            }
        }
        fn unit_open(field: &'static str, v: f64) -> Result<()> {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must lie in (0, 1), got {v}")))
            }
        }
        fn non_negative(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite and >= 0, got {v}")))
            }
        }

        if self.num_antennas == 0 {
            return Err(Error::config("num_antennas", "must be >= 1"));
        }
        if self.num_embb + 1 > self.num_antennas {
            return Err(Error::config(
                "num_embb",
                format!(
                    "K + 1 = {} exceeds num_antennas = {}",
                    self.num_embb + 1,
                    self.num_antennas
                ),
            ));
        }
        positive("cell_radius_m", self.cell_radius)?;
        positive("min_distance_m", self.min_distance)?;
        if self.min_distance > self.cell_radius {
            return Err(Error::config("min_distance_m", "must not exceed cell_radius_m"));
        }
        positive("pathloss_exponent", self.pathloss_exponent)?;
        positive("max_power_dbm", self.max_power)?;
        positive("noise_power_dbm", self.noise_power)?;
        non_negative("rician_k_urllc", self.rician_k_urllc)?;
        non_negative("rician_k_embb", self.rician_k_embb)?;
        positive("urllc_sinr_target_db", self.urllc_sinr_target)?;
        positive("spectral_efficiency", self.spectral_efficiency)?;
        if self.embb_sinr_targets.len() != self.num_embb {
            return Err(Error::config(
                "embb_sinr_target_db",
                format!(
                    "expected {} per-user targets, got {}",
                    self.num_embb,
                    self.embb_sinr_targets.len()
                ),
            ));
        }
        for &t in &self.embb_sinr_targets {
            positive("embb_sinr_target_db", t)?;
        }
        if !(self.outage_target > 0.0 && self.outage_target <= 1.0) {
            return Err(Error::config(
                "outage_target",
                format!("must lie in (0, 1], got {}", self.outage_target),
            ));
        }
        unit_open("confidence", self.confidence)?;
        positive("chernoff_r", self.chernoff_r)?;
        if self.num_candidates == 0 {
            return Err(Error::config("num_candidates", "must be >= 1"));
        }
        if self.history_len < 2 {
            return Err(Error::config("history_len", "must be >= 2"));
        }
        if self.max_redraws == 0 {
            return Err(Error::config("max_redraws", "must be >= 1"));
        }
        if self.mc_samples == 0 {
            return Err(Error::config("mc_samples", "must be >= 1"));
        }
        if !(self.tpm_damping > 0.0 && self.tpm_damping <= 1.0) {
            return Err(Error::config("tpm_damping", "must lie in (0, 1]"));
        }
        Ok(())
    }
}
