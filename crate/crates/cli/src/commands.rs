use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use urllc_precoding::channel::realize;
use urllc_precoding::config::{linear_to_db, mw_to_dbm};
use urllc_precoding::eval::{ensemble_run, outage_mc, sweep, EnsembleFit, EnsembleResult, OutageEstimate};
use urllc_precoding::solver::{run_algorithm1, SolverCounters};
use urllc_precoding::stats::OutageCertificate;
use urllc_precoding::{Error, PrecoderKind, RandomStream, ScenarioConfig, ScenarioFile};

use crate::args::{Cli, Command, EnsembleArgs, SolveArgs, SweepArgs, Table3Args};
use crate::manifest::{config_hash, short_hash, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("no certified candidate: {0}")]
    NoCertified(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::NoCertified(_) => 3,
            Self::Numerical(_) => 4,
            Self::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig { .. } => Self::Config(e.to_string()),
            Error::NoCertifiedRealization { .. } => Self::NoCertified(e.to_string()),
            other => Self::Numerical(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut scenario = load_scenario(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        scenario.rng_seed = seed;
    }
    if let Err(e) = ScenarioConfig::from_file(&scenario) {
        return Err(match (&e, cli.config.as_deref()) {
            (Error::InvalidConfig { field, .. }, Some(path)) => CliError::Config(locate_field(path, field, &e)),
            _ => e.into(),
        });
    }
    fs::create_dir_all(&cli.out_dir).map_err(|e| io_err(&cli.out_dir, e))?;
    match &cli.command {
        Command::Solve(a) => cmd_solve(scenario, a, &cli.out_dir),
        Command::Sweep(a) => cmd_sweep(scenario, a, &cli.out_dir),
        Command::Ensemble(a) => cmd_ensemble(scenario, a, &cli.out_dir),
        Command::ReproduceTable3(a) => cmd_table3(scenario, a, &cli.out_dir),
    }
}

/// Parse a scenario file; errors carry the path and the line/column.
pub fn load_scenario(path: Option<&Path>) -> Result<ScenarioFile, CliError> {
    let Some(path) = path else {
        return Ok(ScenarioFile::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Prefix a validation error with `path:line` of the offending key, when present.
fn locate_field(path: &Path, field: &str, err: &Error) -> String {
    let key = format!("\"{field}\"");
    let line = fs::read_to_string(path)
        .ok()
        .and_then(|text| text.lines().position(|l| l.contains(&key)));
    match line {
        Some(i) => format!("{}:{}: {err}", path.display(), i + 1),
        None => format!("{}: {err}", path.display()),
    }
}

struct Run {
    command: &'static str,
    scenario: ScenarioFile,
    hash: String,
    started: Instant,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn new(command: &'static str, scenario: ScenarioFile) -> Result<(Self, ScenarioConfig), CliError> {
        let config = ScenarioConfig::from_file(&scenario)?;
        let hash = config_hash(&scenario);
        Ok((
            Self {
                command,
                scenario,
                hash,
                started: Instant::now(),
                outputs: Vec::new(),
            },
            config,
        ))
    }

    fn short(&self) -> &str {
        short_hash(&self.hash)
    }

    fn write_json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<(), CliError> {
        let mut body = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
        body.push('\n');
        fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        self.outputs.push(path);
        Ok(())
    }

    fn write_csv<T: Serialize>(&mut self, path: PathBuf, rows: &[T], header: &[&str]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&path)
            .map_err(|e| io_err(&path, e))?;
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for row in rows {
            w.serialize(row).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        self.outputs.push(path);
        Ok(())
    }

    fn finish(self, out_dir: &Path, counters: SolverCounters) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            manifest_hash: self.hash,
            command: self.command.to_string(),
            arguments: std::env::args().skip(1).collect(),
            seed: self.scenario.rng_seed,
            config: self.scenario,
            outputs: self.outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            counters,
        };
        manifest.write(out_dir).map_err(|e| io_err(out_dir, e))
    }
}

#[derive(Debug, Serialize)]
struct SolveReport {
    manifest_hash: String,
    precoder: PrecoderKind,
    seed: u64,
    certified: bool,
    t_opt: Option<usize>,
    total_power_mw: Option<f64>,
    total_power_dbm: Option<f64>,
    /// URLLC first.
    per_user_power_dbm: Option<Vec<f64>>,
    urllc_candidate_target_db: Option<f64>,
    urllc_sinr_target_db: f64,
    outage_target: f64,
    certificate: Option<OutageCertificate>,
    outage: Option<OutageEstimate>,
    counters: SolverCounters,
}

fn cmd_solve(scenario: ScenarioFile, args: &SolveArgs, out_dir: &Path) -> Result<(), CliError> {
    let kind = PrecoderKind::from(args.precoder);
    let (mut run, cfg) = Run::new("solve", scenario)?;
    let stream = RandomStream::new(cfg.rng_seed);
    let real = realize(&cfg, &stream)?;
    let sol = run_algorithm1(&real, &cfg, kind, stream)?;
    let winner = sol.winner.as_ref();
    let report = SolveReport {
        manifest_hash: run.hash.clone(),
        precoder: kind,
        seed: cfg.rng_seed,
        certified: winner.is_some(),
        t_opt: sol.t_opt(),
        total_power_mw: sol.total_power(),
        total_power_dbm: sol.total_power().map(mw_to_dbm),
        per_user_power_dbm: sol.per_user_power().map(|p| p.iter().map(|&x| mw_to_dbm(x)).collect()),
        urllc_candidate_target_db: winner.map(|c| linear_to_db(c.urllc_target)),
        urllc_sinr_target_db: linear_to_db(cfg.urllc_sinr_target),
        outage_target: cfg.outage_target,
        certificate: sol.certificate().copied(),
        outage: winner.map(|c| {
            outage_mc(
                &c.precoder,
                &real.urllc_law,
                cfg.urllc_sinr_target,
                cfg.noise_power,
                cfg.mc_samples,
                &stream,
            )
        }),
        counters: sol.counters,
    };
    let path = out_dir.join(format!("solve_{}_{}.json", kind, run.short()));
    run.write_json(path, &report)?;
    let body = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    let _ = writeln!(std::io::stdout().lock(), "{body}");
    run.finish(out_dir, sol.counters)?;
    if winner.is_none() {
        return Err(CliError::NoCertified(format!(
            "{} of {} candidates feasible, none with mu_ub <= {}",
            sol.counters.candidates_feasible, sol.counters.candidates_evaluated, cfg.outage_target
        )));
    }
    Ok(())
}

pub const SWEEP_HEADER: [&str; 10] = [
    "axis",
    "axis_value",
    "precoder",
    "outage",
    "outage_se",
    "total_power_dbm",
    "urllc_power_dbm",
    "feasible",
    "certified",
    "candidates_skipped",
];

pub const ENSEMBLE_HEADER: [&str; 7] = [
    "realization",
    "seed",
    "outage",
    "total_power_dbm",
    "urllc_power_dbm",
    "mu_ub",
    "certified",
];

pub const TABLE3_HEADER: [&str; 13] = [
    "precoder",
    "kappa0",
    "L",
    "M",
    "realizations",
    "used",
    "excluded",
    "infeasible",
    "mv",
    "sd",
    "cv",
    "mc_percent",
    "mean_total_power_dbm",
];

fn cmd_sweep(scenario: ScenarioFile, args: &SweepArgs, out_dir: &Path) -> Result<(), CliError> {
    let kind = PrecoderKind::from(args.precoder);
    let (mut run, cfg) = Run::new("sweep", scenario)?;
    let stream = RandomStream::new(cfg.rng_seed);
    let rows = sweep(&cfg, args.axis, &args.values, kind, &stream).map_err(|e| match e {
        Error::InvalidArgument(m) => CliError::Config(m),
        other => other.into(),
    })?;
    let mut counters = SolverCounters::default();
    for r in &rows {
        counters.candidates_feasible += r.feasible;
        counters.candidates_certified += r.certified;
        counters.candidates_skipped += r.candidates_skipped;
        counters.candidates_evaluated += r.feasible + r.candidates_skipped;
    }
    let path = out_dir.join(format!("sweep_{}_{}_{}.csv", args.axis, kind, run.short()));
    run.write_csv(path, &rows, &SWEEP_HEADER)?;
    let manifest = run.finish(out_dir, counters)?;
    eprintln!("wrote {} rows; manifest {}", rows.len(), manifest.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct EnsembleRow {
    realization: usize,
    seed: u64,
    outage: Option<f64>,
    total_power_dbm: Option<f64>,
    urllc_power_dbm: Option<f64>,
    mu_ub: Option<f64>,
    certified: bool,
}

#[derive(Debug, Serialize)]
struct EnsembleSummary<'a> {
    manifest_hash: &'a str,
    precoder: PrecoderKind,
    realizations: usize,
    realizations_infeasible: usize,
    mc_samples: u64,
    #[serde(flatten)]
    fit: EnsembleFit,
    /// Percent of certified realizations with estimated outage at or below the target.
    mc_percent: f64,
    mean_total_power_dbm: f64,
    mean_total_power_linear_dbm: f64,
    mean_urllc_power_dbm: f64,
    counters: SolverCounters,
}

fn summary<'a>(hash: &'a str, res: &EnsembleResult) -> EnsembleSummary<'a> {
    EnsembleSummary {
        manifest_hash: hash,
        precoder: res.precoder,
        realizations: res.realizations,
        realizations_infeasible: res.realizations_infeasible,
        mc_samples: res.mc_samples,
        fit: res.fit,
        mc_percent: res.target_met_percent(),
        mean_total_power_dbm: res.mean_total_power_dbm,
        mean_total_power_linear_dbm: res.mean_total_power_linear_dbm,
        mean_urllc_power_dbm: res.mean_urllc_power_dbm,
        counters: res.counters,
    }
}

fn cmd_ensemble(mut scenario: ScenarioFile, args: &EnsembleArgs, out_dir: &Path) -> Result<(), CliError> {
    let kind = PrecoderKind::from(args.precoder);
    scenario.mc_samples = args.scale.mc_samples();
    let (mut run, cfg) = Run::new("ensemble", scenario)?;
    let stream = RandomStream::new(cfg.rng_seed);
    let res = ensemble_run(&cfg, args.scale.realizations(), kind, &stream).map_err(|e| match e {
        Error::InvalidArgument(m) => CliError::Config(m),
        other => other.into(),
    })?;
    let rows: Vec<EnsembleRow> = res
        .records
        .iter()
        .filter(|r| r.certified)
        .map(|r| EnsembleRow {
            realization: r.realization,
            seed: r.seed,
            outage: r.outage.map(|o| o.outage),
            total_power_dbm: r.total_power_dbm,
            urllc_power_dbm: r.urllc_power_dbm,
            mu_ub: r.mu_ub,
            certified: r.certified,
        })
        .collect();
    let stem = format!("ensemble_{}_{}", kind, run.short());
    run.write_csv(out_dir.join(format!("{stem}.csv")), &rows, &ENSEMBLE_HEADER)?;
    let hash = run.hash.clone();
    let s = summary(&hash, &res);
    run.write_json(out_dir.join(format!("{stem}_summary.json")), &s)?;
    eprintln!(
        "MV {:.3}  SD {:.3}  CV {:.2}%  mean power {:.2} dBm",
        s.fit.mean_log10, s.fit.sd_log10, s.fit.confidence_value, s.mean_total_power_dbm
    );
    run.finish(out_dir, res.counters)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Table3Row {
    precoder: PrecoderKind,
    kappa0: f64,
    history_len: usize,
    num_antennas: usize,
    realizations: usize,
    used: usize,
    excluded: usize,
    infeasible: usize,
    mv: Option<f64>,
    sd: Option<f64>,
    cv: Option<f64>,
    mc_percent: Option<f64>,
    mean_total_power_dbm: Option<f64>,
}

fn cmd_table3(mut scenario: ScenarioFile, args: &Table3Args, out_dir: &Path) -> Result<(), CliError> {
    scenario.mc_samples = args.scale.mc_samples();
    let (mut run, base) = Run::new("reproduce-table3", scenario)?;
    let stream = RandomStream::new(base.rng_seed);
    let n = args.scale.realizations();
    let mut rows = Vec::new();
    let mut counters = SolverCounters::default();
    for &p in &args.precoders {
        let kind = PrecoderKind::from(p);
        for &kappa in &args.kappa0 {
            for &l in &args.history {
                for &m in &args.antennas {
                    let mut cfg = base.clone();
                    cfg.rician_k_urllc = kappa;
                    cfg.history_len = l;
                    cfg.num_antennas = m;
                    cfg.validate()?;
                    let row = match ensemble_run(&cfg, n, kind, &stream) {
                        Ok(res) => {
                            counters.merge(&res.counters);
                            Table3Row {
                                precoder: kind,
                                kappa0: kappa,
                                history_len: l,
                                num_antennas: m,
                                realizations: n,
                                used: res.fit.realizations_used,
                                excluded: res.fit.realizations_excluded,
                                infeasible: res.realizations_infeasible,
                                mv: Some(res.fit.mean_log10),
                                sd: Some(res.fit.sd_log10),
                                cv: Some(res.fit.confidence_value),
                                mc_percent: Some(res.target_met_percent()),
                                mean_total_power_dbm: Some(res.mean_total_power_dbm),
                            }
                        }
                        Err(Error::NoCertifiedRealization { .. }) | Err(Error::InvalidArgument(_)) => Table3Row {
                            precoder: kind,
                            kappa0: kappa,
                            history_len: l,
                            num_antennas: m,
                            realizations: n,
                            used: 0,
                            excluded: 0,
                            infeasible: n,
                            mv: None,
                            sd: None,
                            cv: None,
                            mc_percent: None,
                            mean_total_power_dbm: None,
                        },
                        Err(e) => return Err(e.into()),
                    };
                    eprintln!(
                        "{kind} kappa0={kappa} L={l} M={m}: MV {:?} SD {:?} CV {:?}",
                        row.mv, row.sd, row.cv
                    );
                    rows.push(row);
                }
            }
        }
    }
    let path = out_dir.join(format!("table3_{}.csv", run.short()));
    run.write_csv(path, &rows, &TABLE3_HEADER)?;
    run.finish(out_dir, counters)?;
    Ok(())
}
