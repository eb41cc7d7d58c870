//! `coinlab`: exact and Monte Carlo experiments on coin-flipping automata.

mod commands;
mod report;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use coinlab::automaton::DEFAULT_T_MAX;
use coinlab::Error;

use crate::source::SourceArgs;

#[derive(Parser, Debug, Serialize)]
#[command(name = "coinlab", version, about = "Exact and Monte Carlo analysis of coin-flipping automata")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Working precision for float runs (bits).
    #[arg(long, global = true, default_value_t = 128)]
    pub precision_bits: u32,
    /// Force exact rational arithmetic.
    #[arg(long, global = true, conflicts_with = "float")]
    pub exact: bool,
    /// Force multiprecision floats even when exact arithmetic would work.
    #[arg(long, global = true)]
    pub float: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials; 0 skips simulation where it is optional
    /// [default: 10000, or 64·4^s coin flips for the bias codec].
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Step cap per simulated run.
    #[arg(long, global = true, default_value_t = DEFAULT_T_MAX)]
    pub t_max: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write curves as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Write curves as an SVG plot.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// a(p) at two biases, exactly or at working precision, plus simulation.
    Gap(GapArgs),
    /// Rational function a(p) = Q(p)/R(p) (exact machines only).
    Fit(FitArgs),
    /// Transition atlas of a family, optionally with the advice for a target bias.
    Atlas(AtlasArgs),
    /// Bias codec, biased-bit sampler and von Neumann extractor.
    Advice(AdviceArgs),
    /// Real roots of a polynomial, or of a machine's threshold polynomial.
    Roots(RootsArgs),
    /// Monte Carlo runs.
    Simulate(SimulateArgs),
    /// Limiting acceptance a(p).
    Limit(LimitArgs),
    /// Emit a gallery machine as JSON, or list the gallery.
    Gallery(GalleryArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct GapArgs {
    #[command(flatten)]
    pub src: SourceArgs,
    /// Lower bias (default: the build bias).
    #[arg(long)]
    pub p1: Option<String>,
    /// Upper bias (default: build bias + eps).
    #[arg(long)]
    pub p2: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub src: SourceArgs,
    /// Degree cap (default S²).
    #[arg(long)]
    pub max_degree: Option<usize>,
    /// Curve resolution for --csv/--svg.
    #[arg(long, default_value_t = 200)]
    pub grid: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct AtlasArgs {
    #[command(flatten)]
    pub src: SourceArgs,
    /// Family member `name:key=value,...`; repeatable.
    #[arg(long)]
    pub member: Vec<String>,
    /// Target bias for the counting advice.
    #[arg(long)]
    pub p_star: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct AdviceArgs {
    #[command(subcommand)]
    pub action: AdviceAction,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdviceAction {
    /// Bit string to bias.
    Encode {
        #[arg(long)]
        bits: String,
    },
    /// Flip a coin of the given bias and read off `s` bits.
    Decode {
        #[arg(long)]
        bias: String,
        #[arg(long)]
        s: usize,
    },
    /// Encode, simulate and decode over several seeds.
    Roundtrip {
        #[arg(long)]
        bits: String,
        /// Number of seeds, starting at --seed.
        #[arg(long, default_value_t = 10)]
        runs: u64,
    },
    /// Draw r-biased bits from fair flips and r's expansion.
    Sample {
        #[arg(long)]
        r: String,
        /// Expansion length (default: the dyadic length of r).
        #[arg(long)]
        h: Option<u64>,
    },
    /// Unbias a coin with von Neumann's pairing trick.
    VonNeumann {
        #[arg(long)]
        bias: String,
        #[arg(long, default_value_t = 10_000)]
        max_pairs: u64,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct RootsArgs {
    #[command(flatten)]
    pub src: SourceArgs,
    /// Ascending coefficients, comma separated (`num/den` or decimals).
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Option<String>,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub lo: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub hi: String,
    #[arg(long, default_value_t = 64)]
    pub bits: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub src: SourceArgs,
    #[arg(long)]
    pub p: String,
    /// Also record the exact a_t(p) for t up to this horizon.
    #[arg(long)]
    pub curve_t: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
pub struct LimitArgs {
    #[command(flatten)]
    pub src: SourceArgs,
    /// Biases, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<String>,
    /// Also evaluate on the grid i/N, i = 0..=N.
    #[arg(long)]
    pub grid: Option<u32>,
}

#[derive(Args, Debug, Serialize)]
pub struct GalleryArgs {
    #[command(flatten)]
    pub src: SourceArgs,
    #[arg(long)]
    pub list: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invariant(_) | Error::NotHalting { .. } | Error::Fit(_) => 2,
        Error::Precision { .. } | Error::Horizon { .. } => 3,
        Error::InvalidInput(_) | Error::Dimension(_) | Error::InvalidKraus { .. } | Error::Exhausted { .. } | Error::Unsupported(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
