//! `selfsim` command-line tool.
//!
//! Exit status: 0 on success, 1 for usage and validation errors, 2 when a
//! numerical routine fails (ill-conditioning, non-convergence, ...).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "selfsim", version, about = "Transfer-operator spectra and densities of affine IFS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// IFS description in JSON: {"maps":[{"t":..,"v":..}],"probs":[..]}
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "bc")]
    pub ifs: Option<PathBuf>,
    /// Bernoulli convolution with contraction T (decimal or p/q)
    #[arg(long, global = true, value_name = "T")]
    pub bc: Option<String>,
    /// Exact rational arithmetic
    #[arg(long, global = true)]
    pub exact: bool,
    /// Write output here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for `family` (falls back to SELFSIM_THREADS)
    #[arg(long, global = true, env = "SELFSIM_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    /// Little-endian f64 stream (`sample` only)
    Bin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Eig,
    Direct,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues and monic eigenpolynomials of the transfer operator
    Eigenpoly {
        #[arg(long, default_value_t = 8)]
        degree: usize,
    },
    /// Moments of the invariant measure
    Moments {
        #[arg(long, default_value_t = 8)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
    },
    /// Best L2 polynomial density of a given degree
    Approx {
        #[arg(long, default_value_t = 8)]
        degree: usize,
        /// Solve the even block only (symmetric Bernoulli models)
        #[arg(long)]
        split: bool,
        /// Fail instead of re-solving exactly when the float system is ill-conditioned
        #[arg(long)]
        no_escalate: bool,
        /// Add max/argmax and high-set diagnostics (JSON only)
        #[arg(long)]
        report: bool,
    },
    /// Eigenvalues of the Ulam matrix
    Spectrum {
        #[command(flatten)]
        grid: UlamArgs,
        /// Eigenvectors are computed for |lambda| above this
        #[arg(long, default_value_t = selfsim::ulam::DEFAULT_CUTOFF)]
        cutoff: f64,
    },
    /// Stationary density of the Ulam matrix
    Stationary {
        #[command(flatten)]
        grid: UlamArgs,
        #[arg(long, default_value_t = 100_000)]
        iters: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Chaos-game points or their histogram
    Sample {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1 << 20)]
        count: usize,
        #[arg(long, default_value_t = selfsim::sampler::DEFAULT_BURN_IN)]
        burn_in: usize,
        /// Emit a histogram with this many bins instead of raw points
        #[arg(long)]
        bins: Option<usize>,
    },
    /// v_n over a grid of Bernoulli parameters t and points x
    Family {
        #[arg(long, default_value_t = 28)]
        degree: usize,
        /// LO:HI, bounds may be decimals or p/q
        #[arg(long, default_value = "0.65:0.8")]
        t_range: String,
        #[arg(long, default_value_t = 31)]
        t_steps: usize,
        #[arg(long, default_value = "0.1:0.5")]
        x_range: String,
        #[arg(long, default_value_t = 41)]
        x_steps: usize,
    },
}

#[derive(Debug, Args)]
pub struct UlamArgs {
    /// Number of partition cells
    #[arg(long = "N", default_value_t = 500)]
    pub n: usize,
    /// Perturb interior boundaries with noise from this seed
    #[arg(long)]
    pub jitter_seed: Option<u64>,
    /// Jitter amplitude as a fraction of the cell width (< 0.5)
    #[arg(long, default_value_t = 0.25)]
    pub jitter_amplitude: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
