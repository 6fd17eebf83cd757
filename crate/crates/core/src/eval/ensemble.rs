use rayon::prelude::*;
use serde::Serialize;

use super::confidence::{fit_log10_outage, EnsembleFit};
use super::outage::{outage_mc, OutageEstimate};
use crate::channel::realize;
use crate::config::{mw_to_dbm, PrecoderKind, ScenarioConfig};
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::solver::{run_algorithm1, SolverCounters};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRecord {
    pub realization: usize,
    /// Key of the realization's random stream.
    pub seed: u64,
    pub outage: Option<OutageEstimate>,
    pub total_power_dbm: Option<f64>,
    pub urllc_power_dbm: Option<f64>,
    pub mu_ub: Option<f64>,
    pub certified: bool,
    pub counters: SolverCounters,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleResult {
    pub precoder: PrecoderKind,
    pub fit: EnsembleFit,
    pub realizations: usize,
    /// Realizations with no certified candidate.
    pub realizations_infeasible: usize,
    /// Mean of the per-realization total power in dBm.
    pub mean_total_power_dbm: f64,
    /// Mean of the linear total power, in dBm.
    pub mean_total_power_linear_dbm: f64,
    pub mean_urllc_power_dbm: f64,
    pub mc_samples: u64,
    pub counters: SolverCounters,
    pub records: Vec<EnsembleRecord>,
}

impl EnsembleResult {
    /// Percent of certified realizations whose estimated outage is at or
    /// below the target.
    pub fn target_met_percent(&self) -> f64 {
        let outages: Vec<f64> = self
            .records
            .iter()
            .filter_map(|r| r.outage.map(|o| o.outage))
            .collect();
        let met = outages.iter().filter(|&&o| o <= self.fit.outage_target).count();
        100.0 * met as f64 / outages.len() as f64
    }
}

/// Run `num_realizations` independent networks (realization `i` drawn from
/// `stream.realization(i)`), solve each and estimate the winner's outage
/// with `config.mc_samples` draws.
pub fn ensemble_run(
    config: &ScenarioConfig,
    num_realizations: usize,
    kind: PrecoderKind,
    stream: &RandomStream,
) -> Result<EnsembleResult> {
    if num_realizations < 2 {
        return Err(Error::InvalidArgument(format!(
            "an ensemble needs at least 2 realizations, got {num_realizations}"
        )));
    }
    config.validate()?;
    let records: Vec<EnsembleRecord> = (0..num_realizations)
        .into_par_iter()
        .map(|i| run_one(config, kind, i, stream.realization(i as u64)))
        .collect::<Result<_>>()?;

    let mut counters = SolverCounters::default();
    for r in &records {
        counters.merge(&r.counters);
    }
    let certified: Vec<&EnsembleRecord> = records.iter().filter(|r| r.certified).collect();
    if certified.is_empty() {
        return Err(Error::NoCertifiedRealization {
            attempted: num_realizations,
        });
    }
    let outages: Vec<f64> = certified.iter().filter_map(|r| r.outage.map(|o| o.outage)).collect();
    let fit = fit_log10_outage(&outages, config.outage_target)?;
    let n = certified.len() as f64;
    let mean = |f: fn(&EnsembleRecord) -> Option<f64>| certified.iter().filter_map(|r| f(r)).sum::<f64>() / n;
    let mean_total_power_dbm = mean(|r| r.total_power_dbm);
    let mean_urllc_power_dbm = mean(|r| r.urllc_power_dbm);
    let mean_total_power_linear_dbm =
        mw_to_dbm(certified.iter().filter_map(|r| r.total_power_dbm).map(|p| 10f64.powf(p / 10.0)).sum::<f64>() / n);
    Ok(EnsembleResult {
        precoder: kind,
        fit,
        realizations: num_realizations,
        realizations_infeasible: num_realizations - certified.len(),
        mean_total_power_dbm,
        mean_total_power_linear_dbm,
        mean_urllc_power_dbm,
        mc_samples: config.mc_samples,
        counters,
        records,
    })
}

fn run_one(config: &ScenarioConfig, kind: PrecoderKind, index: usize, stream: RandomStream) -> Result<EnsembleRecord> {
    let real = realize(config, &stream)?;
    let sol = run_algorithm1(&real, config, kind, stream)?;
    let mut record = EnsembleRecord {
        realization: index,
        seed: stream.key(),
        outage: None,
        total_power_dbm: None,
        urllc_power_dbm: None,
        mu_ub: None,
        certified: false,
        counters: sol.counters,
    };
    if let Some(c) = &sol.winner {
        record.outage = Some(outage_mc(
            &c.precoder,
            &real.urllc_law,
            config.urllc_sinr_target,
            config.noise_power,
            config.mc_samples,
            &stream,
        ));
        record.total_power_dbm = Some(mw_to_dbm(c.allocation.total));
        record.urllc_power_dbm = Some(mw_to_dbm(c.allocation.powers[0]));
        record.mu_ub = Some(c.certificate.mu_ub);
        record.certified = true;
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ensemble_is_consistent() {
        let mut cfg = ScenarioConfig::default();
        cfg.num_candidates = 60;
        cfg.history_len = 200;
        cfg.mc_samples = 20_000;
        let stream = RandomStream::new(8);
        let res = ensemble_run(&cfg, 6, PrecoderKind::Zf, &stream).unwrap();
        assert_eq!(res.records.len(), 6);
        let certified = res.records.iter().filter(|r| r.certified).count();
        assert_eq!(certified + res.realizations_infeasible, 6);
        assert_eq!(res.fit.realizations_used + res.fit.realizations_excluded, certified);
        assert_eq!(res.counters.candidates_evaluated, 6 * 60);
        for (i, r) in res.records.iter().enumerate() {
            assert_eq!(r.realization, i);
            assert_eq!(r.seed, stream.realization(i as u64).key());
        }
        let again = ensemble_run(&cfg, 6, PrecoderKind::Zf, &stream).unwrap();
        assert_eq!(res.records, again.records);
    }

    #[test]
    fn rejects_single_realization() {
        let cfg = ScenarioConfig::default();
        assert!(ensemble_run(&cfg, 1, PrecoderKind::Zf, &RandomStream::new(1)).is_err());
    }
}
