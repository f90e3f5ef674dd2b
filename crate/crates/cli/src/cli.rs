use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "rtri", version, about = "Training-based MIMO with residual transmit RF impairments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Channel-estimation NMSE against SNR, with its high-SNR floor.
    Nmse(Common),
    /// SINR outage probability against the threshold.
    Outage {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Ergodic rates with the training length optimized per point.
    Rates(Common),
    /// Optimal training length against SNR.
    OptTp(Common),
    /// Deterministic equivalents and large-array training lengths.
    Asymptotic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        asym: AsymptoticArgs,
    },
    /// Re-runs a manifest and compares the output digests.
    Verify {
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReceiverArg {
    Zf,
    Mrc,
    Mmse,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Deviation,
    Training,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    /// Coherence block length.
    #[arg(long)]
    pub t: Option<usize>,
    /// Training length (where it is not optimized).
    #[arg(long)]
    pub tp: Option<usize>,
    /// Impairment level; repeat for several curves.
    #[arg(long = "delta")]
    pub deltas: Vec<f64>,
    #[arg(long = "snr-db-min", allow_negative_numbers = true)]
    pub snr_db_min: Option<f64>,
    #[arg(long = "snr-db-max", allow_negative_numbers = true)]
    pub snr_db_max: Option<f64>,
    #[arg(long = "snr-db-step")]
    pub snr_db_step: Option<f64>,
    /// Monte Carlo trials per point; 0 skips simulation.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ReceiverArg::All)]
    pub receiver: ReceiverArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Also write a matplotlib script that plots the output.
    #[arg(long)]
    pub plot_script: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long = "threshold-db-min", allow_negative_numbers = true)]
    pub min: Option<f64>,
    #[arg(long = "threshold-db-max", allow_negative_numbers = true)]
    pub max: Option<f64>,
    #[arg(long = "threshold-db-step")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct AsymptoticArgs {
    /// Antenna ratio Nr/Nt of the deviation sweep.
    #[arg(long)]
    pub beta: Option<usize>,
    /// SNR points (dB) of the deviation sweep; repeatable.
    #[arg(long = "deviation-snr-db", allow_negative_numbers = true)]
    pub deviation_snr_db: Vec<f64>,
    #[arg(long, value_enum)]
    pub part: Option<Part>,
}
