//! Randomized candidate search for the minimum-power certified precoder.
//!
//! Each candidate synthesizes a URLLC channel from the history statistics,
//! builds directions for `[h_0, h_1, ..., h_K]`, draws a URLLC target and
//! solves for the powers that hit every target. Feasible candidates are
//! certified against the history; the winner is the certified candidate with
//! the smallest `||W||_F^2`, ties broken by the smallest index.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::NetworkRealization;
use crate::config::{PrecoderKind, ScenarioConfig, TargetSampling};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, CMatrix, CVector};
use crate::power::{
    assemble_precoder, draw_urllc_target, gamma_max, max_feasible_target, solve_power, PowerAllocation,
};
use crate::precoders::{directions, DirectionMatrix};
use crate::rng::{Purpose, RandomStream};
use crate::stats::{channel_stats, ChannelStats, ChernoffCertifier, OutageCertificate};

#[derive(Debug, Clone)]
pub struct CandidateSolution {
    pub index: usize,
    pub synthesized_channel: CVector,
    pub directions: DirectionMatrix,
    pub urllc_target: f64,
    pub allocation: PowerAllocation,
    pub precoder: CMatrix,
    /// `||W||_F^2`, the quantity minimized.
    pub power: f64,
    pub certificate: OutageCertificate,
    pub certified: bool,
    pub redraws_used: usize,
}

/// Why a candidate produced no feasible precoder.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateFailure {
    /// Direction computation failed (ill-conditioned channel, TPM divergence).
    Precoder(Error),
    /// The synthesized channel cannot reach the minimum URLLC target.
    TargetRange { gamma_min: f64, gamma_max: f64 },
    /// No feasible allocation within the redraw budget.
    RedrawsExhausted { attempts: usize },
    /// The directions cannot serve any URLLC target in range.
    NoFeasibleTarget,
}

#[derive(Debug, Clone)]
pub struct CandidateRecord {
    pub index: usize,
    pub outcome: std::result::Result<CandidateSolution, CandidateFailure>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SolverCounters {
    pub candidates_evaluated: usize,
    pub candidates_feasible: usize,
    pub candidates_certified: usize,
    pub candidates_skipped: usize,
    pub total_redraws: usize,
    pub domination_violations: usize,
}

impl SolverCounters {
    pub fn merge(&mut self, other: &Self) {
        self.candidates_evaluated += other.candidates_evaluated;
        self.candidates_feasible += other.candidates_feasible;
        self.candidates_certified += other.candidates_certified;
        self.candidates_skipped += other.candidates_skipped;
        self.total_redraws += other.total_redraws;
        self.domination_violations += other.domination_violations;
    }
}

#[derive(Debug, Clone)]
pub struct PrecoderSolution {
    pub kind: PrecoderKind,
    /// Certified candidate of minimum power, if any.
    pub winner: Option<CandidateSolution>,
    pub counters: SolverCounters,
}

impl PrecoderSolution {
    pub fn w_opt(&self) -> Option<&CMatrix> {
        self.winner.as_ref().map(|c| &c.precoder)
    }

    /// Total transmit power of the winner in mW.
    pub fn total_power(&self) -> Option<f64> {
        self.winner.as_ref().map(|c| c.allocation.total)
    }

    pub fn t_opt(&self) -> Option<usize> {
        self.winner.as_ref().map(|c| c.index)
    }

    pub fn per_user_power(&self) -> Option<&[f64]> {
        self.winner.as_ref().map(|c| c.allocation.powers.as_slice())
    }

    pub fn certificate(&self) -> Option<&OutageCertificate> {
        self.winner.as_ref().map(|c| &c.certificate)
    }
}

/// Shared, candidate-independent state of one search.
pub struct CandidateEvaluator<'a> {
    config: &'a ScenarioConfig,
    kind: PrecoderKind,
    stream: RandomStream,
    embb_channels: &'a [CVector],
    history: &'a [CVector],
    stats: ChannelStats,
    certifier: ChernoffCertifier,
    targets: Vec<f64>,
}

impl<'a> CandidateEvaluator<'a> {
    pub fn new(
        realization: &'a NetworkRealization,
        config: &'a ScenarioConfig,
        kind: PrecoderKind,
        stream: RandomStream,
    ) -> Result<Self> {
        config.validate()?;
        if realization.num_embb() != config.num_embb {
            return Err(Error::DimensionMismatch(format!(
                "realization has {} eMBB users, config expects {}",
                realization.num_embb(),
                config.num_embb
            )));
        }
        let stats = channel_stats(&realization.history)?;
        if stats.num_antennas() != config.num_antennas {
            return Err(Error::DimensionMismatch(format!(
                "history has {} antennas, config expects {}",
                stats.num_antennas(),
                config.num_antennas
            )));
        }
        let certifier = ChernoffCertifier::new(
            config.urllc_sinr_target,
            config.chernoff_r,
            config.noise_power,
            config.confidence,
            realization.history.len(),
        )?;
        let mut targets = Vec::with_capacity(config.num_users());
        targets.push(config.urllc_sinr_target);
        targets.extend_from_slice(&config.embb_sinr_targets);
        Ok(Self {
            config,
            kind,
            stream,
            embb_channels: &realization.embb_channels,
            history: &realization.history,
            stats,
            certifier,
            targets,
        })
    }

    pub fn stats(&self) -> &ChannelStats {
        &self.stats
    }

    /// Evaluate candidate `t` from its own substreams.
    pub fn evaluate(&self, t: usize) -> CandidateRecord {
        CandidateRecord {
            index: t,
            outcome: self.evaluate_inner(t),
        }
    }

    fn evaluate_inner(&self, t: usize) -> std::result::Result<CandidateSolution, CandidateFailure> {
        let cfg = self.config;
        let h0 = self
            .stats
            .synthesize_channel(&mut self.stream.rng(Purpose::Synthesis, &[t as u64]));
        let mut cols = Vec::with_capacity(cfg.num_users());
        cols.push(h0.clone());
        cols.extend(self.embb_channels.iter().cloned());
        let h = CMatrix::from_columns(&cols);

        let dirs = directions(self.kind, &h, &self.targets, cfg.noise_power, cfg.tpm_damping)
            .map_err(CandidateFailure::Precoder)?;

        let gamma_min = cfg.gamma_min();
        let gamma_max = gamma_max(&h0, cfg.max_power, cfg.noise_power);
        if !(gamma_max > gamma_min) {
            return Err(CandidateFailure::TargetRange { gamma_min, gamma_max });
        }
        let mut targets = self.targets.clone();
        let solve = |targets: &[f64]| {
            solve_power(&h, &dirs, targets, cfg.noise_power, cfg.max_power).map_err(CandidateFailure::Precoder)
        };
        let (allocation, redraws_used) = match cfg.target_sampling {
            TargetSampling::Conditional => {
                let top = max_feasible_target(
                    &h,
                    &dirs,
                    &targets,
                    cfg.noise_power,
                    cfg.max_power,
                    gamma_min,
                    gamma_max,
                )
                .map_err(CandidateFailure::Precoder)?
                .ok_or(CandidateFailure::NoFeasibleTarget)?;
                let mut rng = self.stream.rng(Purpose::TargetDraw, &[t as u64, 0]);
                targets[0] = if top > gamma_min {
                    draw_urllc_target(gamma_min, top, cfg.target_draw_domain, &mut rng)
                        .map_err(CandidateFailure::Precoder)?
                } else {
                    gamma_min
                };
                let allocation = solve(&targets)?;
                if !allocation.feasible {
                    return Err(CandidateFailure::NoFeasibleTarget);
                }
                (allocation, 0)
            }
            TargetSampling::Rejection => {
                let mut found = None;
                for redraw in 0..=cfg.max_redraws {
                    let mut rng = self.stream.rng(Purpose::TargetDraw, &[t as u64, redraw as u64]);
                    targets[0] = draw_urllc_target(gamma_min, gamma_max, cfg.target_draw_domain, &mut rng)
                        .map_err(CandidateFailure::Precoder)?;
                    let allocation = solve(&targets)?;
                    if allocation.feasible {
                        found = Some((allocation, redraw));
                        break;
                    }
                }
                found.ok_or(CandidateFailure::RedrawsExhausted {
                    attempts: cfg.max_redraws + 1,
                })?
            }
        };
        let precoder = assemble_precoder(&dirs.u, &allocation.powers);
        let certificate = self
            .certifier
            .certify(self.history, &precoder)
            .map_err(CandidateFailure::Precoder)?;
        Ok(CandidateSolution {
            index: t,
            synthesized_channel: h0,
            power: frobenius_sq(&precoder),
            certified: certificate.mu_ub <= cfg.outage_target,
            directions: dirs,
            urllc_target: targets[0],
            allocation,
            precoder,
            certificate,
            redraws_used,
        })
    }

    /// Evaluate candidates `0..num_candidates` in parallel.
    pub fn evaluate_all(&self, num_candidates: usize) -> Vec<CandidateRecord> {
        (0..num_candidates)
            .into_par_iter()
            .map(|t| self.evaluate(t))
            .collect()
    }
}

/// Fold candidate records (in index order) into the solution.
pub fn select_winner(kind: PrecoderKind, records: Vec<CandidateRecord>) -> PrecoderSolution {
    let mut counters = SolverCounters::default();
    let mut winner: Option<CandidateSolution> = None;
    for record in records {
        counters.candidates_evaluated += 1;
        match record.outcome {
            Err(CandidateFailure::RedrawsExhausted { attempts }) => {
                counters.candidates_skipped += 1;
                counters.total_redraws += attempts - 1;
            }
            Err(_) => counters.candidates_skipped += 1,
            Ok(c) => {
                counters.candidates_feasible += 1;
                counters.total_redraws += c.redraws_used;
                if !c.certificate.domination_holds {
                    counters.domination_violations += 1;
                }
                if !c.certified {
                    continue;
                }
                counters.candidates_certified += 1;
                let better = match &winner {
                    None => true,
                    Some(w) => c.power < w.power || (c.power == w.power && c.index < w.index),
                };
                if better {
                    winner = Some(c);
                }
            }
        }
    }
    PrecoderSolution {
        kind,
        winner,
        counters,
    }
}

/// Run the candidate search with `config.num_candidates` candidates.
pub fn run_algorithm1(
    realization: &NetworkRealization,
    config: &ScenarioConfig,
    kind: PrecoderKind,
    stream: RandomStream,
) -> Result<PrecoderSolution> {
    run_algorithm1_recorded(realization, config, kind, stream).map(|(s, _)| s)
}

/// As [`run_algorithm1`], also returning candidate-level metrics
/// (index, feasibility, power, `mu_ub`) for every candidate.
pub fn run_algorithm1_recorded(
    realization: &NetworkRealization,
    config: &ScenarioConfig,
    kind: PrecoderKind,
    stream: RandomStream,
) -> Result<(PrecoderSolution, Vec<CandidateSummary>)> {
    let evaluator = CandidateEvaluator::new(realization, config, kind, stream)?;
    let records = evaluator.evaluate_all(config.num_candidates);
    let summaries = records.iter().map(CandidateSummary::from).collect();
    Ok((select_winner(kind, records), summaries))
}

/// Compact per-candidate record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSummary {
    pub index: usize,
    pub feasible: bool,
    pub power: Option<f64>,
    pub mu_ub: Option<f64>,
    pub redraws_used: Option<usize>,
}

impl From<&CandidateRecord> for CandidateSummary {
    fn from(r: &CandidateRecord) -> Self {
        match &r.outcome {
            Ok(c) => Self {
                index: r.index,
                feasible: true,
                power: Some(c.power),
                mu_ub: Some(c.certificate.mu_ub),
                redraws_used: Some(c.redraws_used),
            },
            Err(_) => Self {
                index: r.index,
                feasible: false,
                power: None,
                mu_ub: None,
                redraws_used: None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::realize;
    use crate::power::sinr;
    use crate::stats::chernoff_certificate;

    fn small_config(zeta: usize) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.num_candidates = zeta;
        cfg.history_len = 200;
        cfg
    }

    fn setup(cfg: &ScenarioConfig, seed: u64) -> (NetworkRealization, RandomStream) {
        let stream = RandomStream::new(seed);
        (realize(cfg, &stream).unwrap(), stream)
    }

    #[test]
    fn candidate_invariants() {
        let cfg = small_config(40);
        let (real, stream) = setup(&cfg, 5);
        for kind in [PrecoderKind::Zf, PrecoderKind::Tpm] {
            let ev = CandidateEvaluator::new(&real, &cfg, kind, stream).unwrap();
            for rec in ev.evaluate_all(40) {
                let Ok(c) = rec.outcome else { continue };
                assert!((c.power / c.allocation.total - 1.0).abs() < 1e-10);
                assert!(c.allocation.total <= cfg.max_power);
                assert!(c.urllc_target >= cfg.gamma_min());
                for (k, col) in c.precoder.column_iter().enumerate() {
                    let expect = c.directions.u.column(k) * nalgebra::Complex::from(c.allocation.powers[k].sqrt());
                    assert!((col - &expect).norm() <= 1e-12 * expect.norm());
                }
                // URLLC row uses the synthesized channel
                let g = sinr(&c.synthesized_channel, &c.precoder, 0, cfg.noise_power);
                assert!((g / c.urllc_target - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn single_candidate_is_returned_when_certified() {
        let mut cfg = small_config(1);
        cfg.outage_target = 1.0;
        for seed in 0..10 {
            let (real, stream) = setup(&cfg, seed);
            let ev = CandidateEvaluator::new(&real, &cfg, PrecoderKind::Zf, stream).unwrap();
            let sol = run_algorithm1(&real, &cfg, PrecoderKind::Zf, stream).unwrap();
            match ev.evaluate(0).outcome {
                Ok(c) if c.certified => {
                    assert_eq!(sol.t_opt(), Some(0));
                    assert_eq!(sol.w_opt(), Some(&c.precoder));
                }
                _ => assert!(sol.winner.is_none()),
            }
        }
    }

    #[test]
    fn relaxed_constraint_returns_min_certified_power() {
        let mut cfg = small_config(60);
        cfg.outage_target = 1.0;
        let (real, stream) = setup(&cfg, 3);
        let (sol, summaries) = run_algorithm1_recorded(&real, &cfg, PrecoderKind::Zf, stream).unwrap();
        let min = summaries
            .iter()
            .filter(|s| s.mu_ub.is_some_and(|m| m <= 1.0))
            .filter_map(|s| s.power)
            .fold(f64::INFINITY, f64::min);
        assert!(sol.counters.candidates_certified > 0);
        assert_eq!(sol.winner.as_ref().map(|c| c.power), Some(min));

        let mut prev = f64::INFINITY;
        for zeta in [1, 5, 20, 60] {
            cfg.num_candidates = zeta;
            if let Some(c) = run_algorithm1(&real, &cfg, PrecoderKind::Zf, stream).unwrap().winner {
                assert!(c.power <= prev);
                prev = c.power;
            }
        }
    }

    #[test]
    fn brute_force_oracle_matches() {
        let cfg = small_config(20);
        for seed in 0..5 {
            let (real, stream) = setup(&cfg, seed);
            let (sol, summaries) = run_algorithm1_recorded(&real, &cfg, PrecoderKind::Zf, stream).unwrap();
            let mut best: Option<(f64, usize)> = None;
            for s in &summaries {
                if let (Some(p), Some(mu)) = (s.power, s.mu_ub) {
                    if mu <= cfg.outage_target && best.is_none_or(|(bp, _)| p < bp) {
                        best = Some((p, s.index));
                    }
                }
            }
            assert_eq!(sol.t_opt(), best.map(|b| b.1));
        }
    }

    #[test]
    fn deterministic_and_nested_in_zeta() {
        let mut cfg = small_config(30);
        let (real, stream) = setup(&cfg, 11);
        let a = run_algorithm1(&real, &cfg, PrecoderKind::Tpm, stream).unwrap();
        let b = run_algorithm1(&real, &cfg, PrecoderKind::Tpm, stream).unwrap();
        assert_eq!(a.w_opt(), b.w_opt());
        assert_eq!(a.counters, b.counters);

        let (_, long) = run_algorithm1_recorded(&real, &cfg, PrecoderKind::Tpm, stream).unwrap();
        cfg.num_candidates = 10;
        let (_, short) = run_algorithm1_recorded(&real, &cfg, PrecoderKind::Tpm, stream).unwrap();
        assert_eq!(&long[..10], &short[..]);
    }

    #[test]
    fn certificate_of_winner_recomputes() {
        let cfg = small_config(200);
        let (real, stream) = setup(&cfg, 4);
        let sol = run_algorithm1(&real, &cfg, PrecoderKind::Zf, stream).unwrap();
        if let Some(w) = sol.w_opt() {
            let c = chernoff_certificate(
                &real.history,
                w,
                cfg.urllc_sinr_target,
                cfg.chernoff_r,
                cfg.noise_power,
                cfg.confidence,
            )
            .unwrap();
            assert!(c.mu_ub <= cfg.outage_target);
            assert_eq!(c.mu_ub, sol.certificate().unwrap().mu_ub);
        }
    }

    #[test]
    fn unreachable_target_leaves_no_winner() {
        let mut cfg = small_config(5);
        cfg.set_uniform_embb_target(1e12);
        let (real, stream) = setup(&cfg, 1);
        let sol = run_algorithm1(&real, &cfg, PrecoderKind::Zf, stream).unwrap();
        assert!(sol.winner.is_none());
        assert_eq!(sol.counters.candidates_evaluated, 5);
        assert_eq!(sol.counters.candidates_certified, 0);
        assert_eq!(sol.counters.candidates_skipped, 5);
    }

    fn feasible_edge(ev: &CandidateEvaluator, cfg: &ScenarioConfig, c: &CandidateSolution) -> f64 {
        let mut cols = vec![c.synthesized_channel.clone()];
        cols.extend(ev.embb_channels.iter().cloned());
        let h = CMatrix::from_columns(&cols);
        let gmax = gamma_max(&c.synthesized_channel, cfg.max_power, cfg.noise_power);
        max_feasible_target(&h, &c.directions, &ev.targets, cfg.noise_power, cfg.max_power, cfg.gamma_min(), gmax)
            .unwrap()
            .unwrap()
    }

    #[test]
    fn both_samplers_draw_uniformly_over_the_feasible_range() {
        let mut cfg = small_config(400);
        cfg.max_redraws = 100_000;
        let (real, stream) = setup(&cfg, 2);
        let mut feasible_sets = Vec::new();
        for sampling in [TargetSampling::Conditional, TargetSampling::Rejection] {
            cfg.target_sampling = sampling;
            let ev = CandidateEvaluator::new(&real, &cfg, PrecoderKind::Zf, stream).unwrap();
            let mut positions = Vec::new();
            let mut feasible = Vec::new();
            for rec in ev.evaluate_all(cfg.num_candidates) {
                let Ok(c) = rec.outcome else { continue };
                feasible.push(rec.index);
                let top = feasible_edge(&ev, &cfg, &c);
                assert!(c.urllc_target >= cfg.gamma_min() && c.urllc_target <= top);
                positions.push((c.urllc_target - cfg.gamma_min()) / (top - cfg.gamma_min()));
            }
            let n = positions.len() as f64;
            let mean = positions.iter().sum::<f64>() / n;
            let se = (1.0 / 12.0 / n).sqrt();
            assert!((mean - 0.5).abs() < 4.0 * se, "{sampling:?}: mean {mean}, n {n}");
            feasible_sets.push(feasible);
        }
        assert_eq!(feasible_sets[0], feasible_sets[1]);
    }
}
