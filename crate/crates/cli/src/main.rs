//! `rmdl`: command-line driver for the randomized Goldbach Dirichlet-series
//! toolkit. Every run writes its primary output plus a `.manifest.json`
//! sidecar with parameters, seed, and output digests; identical parameters and
//! seed reproduce byte-identical outputs for any `--threads` value.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 budget/capacity/precision
//! refusal.

mod commands;
mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use rmdl_core::convolution::Method;
use rmdl_core::ensemble::PathMode;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Binary,
    Csv,
    Json,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Binary => "binary",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Fft,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Fft => Method::Fft,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Surrogate,
}

impl From<ModeArg> for PathMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => PathMode::ExactEnumeration,
            ModeArg::Surrogate => PathMode::GaussianSurrogate,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "rmdl", version, about = "Randomized Goldbach Dirichlet-series toolkit")]
struct Cli {
    /// Master seed for all sign draws.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (0 = all cores). Outputs are thread-count invariant.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sieve Λ(1..=n_max) and dump it (binary by default, csv optional).
    Sieve {
        #[arg(long)]
        n_max: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Binary)]
        format: OutputFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// r-fold additive self-convolution coefficients G_r(n) and W_r(n).
    Conv {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n_max: u64,
        #[arg(long, value_enum, default_value_t = MethodArg::Fft)]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw one signed coefficient path Y_r(n, ω) for n ≤ n_max.
    Sample {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact finite distribution of Y_r(n, ·) over all sign assignments.
    Distribution {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Partial sums A(N) = Σ_{n≤N} Y_r(n, ω) n^{-s} at geometric checkpoints.
    Trace {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Variance partial sums Σ_{n≤N} W_r(n) n^{-2σ} at geometric checkpoints.
    Variance {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n_max: u64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ensemble estimate of the growth exponent of |A(N)| (≈ convergence abscissa).
    Abscissa {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 100)]
        ensemble: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prime-pair counts vs the Hardy–Littlewood prediction over even n ≤ n_max.
    Goldbach {
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 1_000_000)]
        prime_cutoff: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Divergence diagnostic for the r = 2 variance series at σ = 1.
    DivergeSigma1 {
        #[arg(long)]
        n_max: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let format = match &cli.cmd {
        Cmd::Sieve { format, .. } => *format,
        Cmd::Abscissa { .. } | Cmd::DivergeSigma1 { .. } => OutputFormat::Json,
        _ => OutputFormat::Csv,
    };
    let ctx = commands::Ctx {
        master_seed: cli.seed,
        format,
        started: Instant::now(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()?;
    pool.install(|| match cli.cmd {
        Cmd::Sieve { n_max, out, .. } => commands::sieve(&ctx, n_max, &out),
        Cmd::Conv {
            r,
            n_max,
            method,
            out,
        } => commands::conv(&ctx, r, n_max, method.into(), &out),
        Cmd::Sample {
            r,
            n_max,
            replicate,
            mode,
            out,
        } => commands::sample(&ctx, r, n_max, replicate, mode.into(), &out),
        Cmd::Distribution { r, n, out } => commands::distribution(&ctx, r, n, &out),
        Cmd::Trace {
            r,
            n_max,
            replicate,
            sigma,
            t,
            out,
        } => commands::trace(&ctx, r, n_max, replicate, sigma, t, &out),
        Cmd::Variance {
            r,
            n_max,
            sigma,
            out,
        } => commands::variance(&ctx, r, n_max, sigma, &out),
        Cmd::Abscissa {
            r,
            n_max,
            ensemble,
            mode,
            out,
        } => commands::abscissa(&ctx, r, n_max, ensemble, mode.into(), &out),
        Cmd::Goldbach {
            n_max,
            prime_cutoff,
            out,
        } => commands::goldbach(&ctx, n_max, prime_cutoff, &out),
        Cmd::DivergeSigma1 { n_max, out } => commands::diverge_sigma1(&ctx, n_max, &out),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version on stdout with success status
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let refusal = matches!(
                err.downcast_ref::<rmdl_core::Error>(),
                Some(
                    rmdl_core::Error::Budget { .. }
                        | rmdl_core::Error::Capacity { .. }
                        | rmdl_core::Error::Precision { .. }
                )
            );
            if refusal {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
