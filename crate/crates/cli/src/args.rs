use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use urllc_precoding::eval::SweepAxis;
use urllc_precoding::PrecoderKind;

#[derive(Debug, Parser)]
#[command(
    name = "urllc-precode",
    version,
    about = "History-based robust precoding for a URLLC user coexisting with eMBB users"
)]
pub struct Cli {
    /// Scenario file (JSON). Omitted fields take the reference defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed; overrides `rng_seed` from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory for CSV/JSON outputs.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "URLLC_PRECODE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one network realization and report the certified precoder.
    Solve(SolveArgs),
    /// Sweep one parameter over a fixed network realization.
    Sweep(SweepArgs),
    /// Solve many independent realizations and fit log10 outage.
    Ensemble(EnsembleArgs),
    /// Regenerate the (precoder, kappa0, L, M) grid of ensemble fits.
    #[command(name = "reproduce-table3")]
    ReproduceTable3(Table3Args),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value = "zf")]
    pub precoder: PrecoderArg,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "zf")]
    pub precoder: PrecoderArg,

    /// One of r, zeta, kappa0, L, K, embb_target_db.
    #[arg(long, value_parser = parse_axis)]
    pub axis: SweepAxis,

    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub values: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long, value_enum, default_value = "zf")]
    pub precoder: PrecoderArg,

    #[command(flatten)]
    pub scale: ScaleArgs,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    /// Network realizations (default 500, or 5000 with --full-scale).
    #[arg(long)]
    pub realizations: Option<usize>,

    /// MC samples per realization (default 10^5, or 10^6 with --full-scale).
    #[arg(long)]
    pub mc_samples: Option<u64>,

    /// Full-scale defaults: 5000 realizations and 10^6 MC samples.
    #[arg(long)]
    pub full_scale: bool,
}

impl ScaleArgs {
    pub fn realizations(&self) -> usize {
        self.realizations.unwrap_or(if self.full_scale { 5000 } else { 500 })
    }

    pub fn mc_samples(&self) -> u64 {
        self.mc_samples.unwrap_or(if self.full_scale { 1_000_000 } else { 100_000 })
    }
}

#[derive(Debug, Args)]
pub struct Table3Args {
    #[arg(long = "precoder", value_enum, value_delimiter = ',', default_value = "zf,tpm")]
    pub precoders: Vec<PrecoderArg>,

    #[arg(long, value_delimiter = ',', default_value = "0,2,5")]
    pub kappa0: Vec<f64>,

    #[arg(long = "history", value_delimiter = ',', default_value = "250,500")]
    pub history: Vec<usize>,

    #[arg(long, value_delimiter = ',', default_value = "8,16")]
    pub antennas: Vec<usize>,

    #[command(flatten)]
    pub scale: ScaleArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PrecoderArg {
    Zf,
    Tpm,
}

impl From<PrecoderArg> for PrecoderKind {
    fn from(p: PrecoderArg) -> Self {
        match p {
            PrecoderArg::Zf => PrecoderKind::Zf,
            PrecoderArg::Tpm => PrecoderKind::Tpm,
        }
    }
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: urllc_precoding::Error| e.to_string())
}
