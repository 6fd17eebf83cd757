use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::outage::outage_mc;
use crate::channel::realize;
use crate::config::{db_to_linear, mw_to_dbm, PrecoderKind, ScenarioConfig};
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::solver::run_algorithm1;

/// Swept parameter. Values are given in the units noted per variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Chernoff parameter `r`.
    #[serde(rename = "r")]
    ChernoffR,
    /// Number of candidates.
    #[serde(rename = "zeta")]
    Candidates,
    /// URLLC Rician factor (linear).
    #[serde(rename = "kappa0")]
    RicianK,
    /// History length.
    #[serde(rename = "L")]
    HistoryLen,
    /// Number of eMBB users.
    #[serde(rename = "K")]
    NumEmbb,
    /// Common eMBB SINR target in dB.
    #[serde(rename = "embb_target_db")]
    EmbbTarget,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        Self::ChernoffR,
        Self::Candidates,
        Self::RicianK,
        Self::HistoryLen,
        Self::NumEmbb,
        Self::EmbbTarget,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ChernoffR => "r",
            Self::Candidates => "zeta",
            Self::RicianK => "kappa0",
            Self::HistoryLen => "L",
            Self::NumEmbb => "K",
            Self::EmbbTarget => "embb_target_db",
        }
    }

    /// Copy of `base` with this axis set to `value`.
    pub fn apply(&self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(Error::InvalidArgument(format!("{} expects an integer, got {v}", self.as_str())))
            }
        };
        match self {
            Self::ChernoffR => cfg.chernoff_r = value,
            Self::Candidates => cfg.num_candidates = count(value)?,
            Self::RicianK => cfg.rician_k_urllc = value,
            Self::HistoryLen => cfg.history_len = count(value)?,
            Self::NumEmbb => cfg.set_num_embb(count(value)?),
            Self::EmbbTarget => cfg.set_uniform_embb_target(db_to_linear(value)),
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidArgument(format!("unknown sweep axis '{s}' (expected r, zeta, kappa0, L, K, embb_target_db)"))
            })
    }
}

/// One axis point. Outage and power fields are absent when no candidate
/// was certified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub precoder: PrecoderKind,
    pub outage: Option<f64>,
    pub outage_se: Option<f64>,
    pub total_power_dbm: Option<f64>,
    pub urllc_power_dbm: Option<f64>,
    pub feasible: usize,
    pub certified: usize,
    pub candidates_skipped: usize,
}

/// Evaluate `values` of `axis` on one network realization. All points share
/// the deployment, channel, candidate and MC substreams of `stream`.
pub fn sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[f64],
    kind: PrecoderKind,
    stream: &RandomStream,
) -> Result<Vec<SweepRow>> {
    let configs = values
        .iter()
        .map(|&v| axis.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(values.len());
    for (cfg, &value) in configs.iter().zip(values) {
        let real = realize(cfg, stream)?;
        let sol = run_algorithm1(&real, cfg, kind, *stream)?;
        let mut row = SweepRow {
            axis,
            axis_value: value,
            precoder: kind,
            outage: None,
            outage_se: None,
            total_power_dbm: None,
            urllc_power_dbm: None,
            feasible: sol.counters.candidates_feasible,
            certified: sol.counters.candidates_certified,
            candidates_skipped: sol.counters.candidates_skipped,
        };
        if let Some(c) = &sol.winner {
            let est = outage_mc(
                &c.precoder,
                &real.urllc_law,
                cfg.urllc_sinr_target,
                cfg.noise_power,
                cfg.mc_samples,
                stream,
            );
            row.outage = Some(est.outage);
            row.outage_se = Some(est.standard_error);
            row.total_power_dbm = Some(mw_to_dbm(c.allocation.total));
            row.urllc_power_dbm = Some(mw_to_dbm(c.allocation.powers[0]));
        }
        rows.push(row);
    }
    Ok(rows)
}
