//! `dota`: cost simulation, fidelity sweeps and self-validation.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "dota", version, about = "Photonic Transformer accelerator simulator")]
#[command(after_help = "Exit codes: 0 success, 1 validation failure or runtime error, 2 configuration error.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output directory for reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Report formats to write.
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Device library file (TOML); the built-in table is used when omitted.
    #[arg(long)]
    devices: Option<PathBuf>,
    /// Seed for every Monte-Carlo draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energy, latency, power and area of a Transformer on an accelerator.
    Simulate {
        /// Model preset name or path to a model TOML file.
        #[arg(long, default_value = "deit-t")]
        model: String,
        /// Accelerator preset name or path to an accelerator TOML file.
        #[arg(long, default_value = "dota-b")]
        arch: String,
        /// Operand precision.
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(2..=8))]
        bits: u32,
        /// Include the classifier head GEMM.
        #[arg(long)]
        classifier: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Parameter sweeps producing plot-ready tables.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
    /// Run oracle, conservation and anchor checks.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseAxis {
    Phi,
    V,
    Out,
    All,
}

#[derive(Subcommand, Debug)]
enum SweepKind {
    /// Matmul error against noise intensity.
    Noise {
        /// Comma-separated sigma grid.
        #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.02,0.05,0.1")]
        sigmas: Vec<f64>,
        /// Which sigma the grid sets; the others stay zero (`all` sets every one).
        #[arg(long, value_enum, default_value_t = NoiseAxis::All)]
        vary: NoiseAxis,
        /// Matmul shape MxKxN.
        #[arg(long, default_value = "12x12x12")]
        shape: String,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..=8))]
        bits: u32,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Enable wavelength dispersion with the calibrated defaults.
        #[arg(long)]
        dispersion: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Device deviation and matmul error against channel count.
    Dispersion {
        #[arg(long, default_value_t = 40)]
        max_channels: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..=8))]
        bits: u32,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Dot-product error of random pairs with the default noise.
    Error {
        #[arg(long, default_value_t = 12)]
        length: usize,
        /// Comma-separated precisions.
        #[arg(long, value_delimiter = ',', default_value = "4,8")]
        bits: Vec<u32>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Disable wavelength dispersion.
        #[arg(long)]
        no_dispersion: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Area, power, latency and throughput against core size.
    Scaling {
        /// Accelerator preset or file supplying memory, digital and layout constants.
        #[arg(long, default_value = "dota-b")]
        arch: String,
        #[arg(long, default_value_t = 8)]
        min: usize,
        #[arg(long, default_value_t = 32)]
        max: usize,
        #[arg(long, default_value_t = 4)]
        step: usize,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(2..=8))]
        bits: u32,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { model, arch, bits, classifier, common } => {
            commands::simulate(&model, &arch, bits, classifier, &common)
        }
        Command::Sweep { kind } => match kind {
            SweepKind::Noise { sigmas, vary, shape, bits, trials, dispersion, common } => {
                commands::sweep_noise(&sigmas, vary, &shape, bits, trials, dispersion, &common)
            }
            SweepKind::Dispersion { max_channels, step, bits, trials, common } => {
                commands::sweep_dispersion(max_channels, step, bits, trials, &common)
            }
            SweepKind::Error { length, bits, trials, no_dispersion, common } => {
                commands::sweep_error(length, &bits, trials, !no_dispersion, &common)
            }
            SweepKind::Scaling { arch, min, max, step, bits, common } => {
                commands::sweep_scaling(&arch, min, max, step, bits, &common)
            }
        },
        Command::Validate { common } => commands::validate(&common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
