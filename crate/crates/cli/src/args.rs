use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

/// Plans secure-key networks on two-stage splitter trees: evaluates explicit
/// plans, optimizes the central-office split ratio, sweeps parameters, and
/// cross-checks the error model by simulation.
#[derive(Debug, Parser)]
#[command(name = "qkd-pon", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price one explicit plan at a fixed split ratio.
    Evaluate(EvaluateArgs),
    /// Pick the split ratio that maximizes secure fraction per fiber km.
    Optimize(OptimizeArgs),
    /// Re-optimize while one parameter walks a range.
    Sweep(SweepArgs),
    /// Run a canned study family (fig3 | fig4 | fig5 | fig6).
    Preset(PresetArgs),
    /// Estimate the error rate by simulating the pulse stream.
    Simulate(SimulateArgs),
    /// Photon number maximizing the secure fraction at a baseline error rate.
    MuOpt(MuOptArgs),
}

/// Flags shared by every subcommand. All values are optional here; whatever
/// the command line leaves unset falls back to the config file and then to
/// the built-in defaults.
#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Users served by the tree.
    #[arg(long)]
    pub users: Option<u32>,
    /// Feeder length in km (central office to field splitter).
    #[arg(long)]
    pub l1: Option<f64>,
    /// Drop length in km (field splitter to each user).
    #[arg(long)]
    pub l2: Option<f64>,
    /// Mean photon number per pulse.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Detector efficiency, in (0, 1].
    #[arg(long)]
    pub eta: Option<f64>,
    /// Dark-count probability per pulse.
    #[arg(long)]
    pub dark: Option<f64>,
    /// Receiver interference visibility, in (0, 1].
    #[arg(long)]
    pub visibility: Option<f64>,
    /// Fiber attenuation in dB/km.
    #[arg(long)]
    pub alpha_db_per_km: Option<f64>,
    /// Source repetition rate in pulses per second.
    #[arg(long)]
    pub pulse_rate: Option<f64>,
    /// Report format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report to this path instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file supplying defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Central-office split ratio; must divide the user count.
    #[arg(long)]
    pub n1: Option<u32>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Which parameter to walk.
    #[arg(long, value_enum)]
    pub var: SweepVar,
    /// First value of the walk.
    #[arg(long)]
    pub from: f64,
    /// Last value of the walk (inclusive).
    #[arg(long)]
    pub to: f64,
    /// Increment between points; sign must match the direction of the walk.
    #[arg(long)]
    pub step: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    /// Study family: fig3, fig4, fig5, or fig6.
    pub name: String,
    /// Override the feeder grid step in km (feeder-walking presets only).
    #[arg(long)]
    pub step: Option<f64>,
    /// Override the dark-rate family of fig5, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub dark_values: Option<Vec<f64>>,
    /// Override the photon-number family of fig6, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub mu_values: Option<Vec<f64>>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Central-office split ratio; must divide the user count.
    #[arg(long)]
    pub n1: Option<u32>,
    /// Pulses to simulate; defaults to 1e8 aggregate, 1e6 per-pulse.
    #[arg(long)]
    pub pulses: Option<u64>,
    /// RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampling mode.
    #[arg(long, value_enum, default_value_t = SimModeArg::Aggregate)]
    pub mode: SimModeArg,
    /// Independent RNG streams the pulse budget is dealt across.
    #[arg(long)]
    pub partitions: Option<u32>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct MuOptArgs {
    /// Baseline error rate the photon number is tuned against.
    #[arg(long)]
    pub qber: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    /// Feeder length, holding the total span fixed.
    L1,
    /// User count (powers of 2).
    Users,
    /// Mean photon number.
    Mu,
    /// Dark-count rate.
    Dark,
    /// The split ratio itself, evaluated instead of optimized.
    N1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimModeArg {
    /// Bernoulli draws for every pulse.
    PerPulse,
    /// Binomial draws over pulse blocks; same distribution, constant time.
    Aggregate,
}
