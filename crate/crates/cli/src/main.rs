//! `maxlab`: batch experiments on discrete maximal operators.
//!
//! Exit codes: 0 when every selected check passes, 1 when a check fails (the report is
//! still written), 2 on invalid input or I/O errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use maxlab::{RandomFamily, Variant};

use commands::{ContinuityArgs, Suite, SweepArgs, VerifyArgs};
use config::{ConfigFile, ExperimentConfig, Format, Overrides};

#[derive(Parser, Debug)]
#[command(name = "maxlab", version, about = "Discrete maximal operators on Z^d: grids, gradient norms and verification suites")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct GlobalArgs {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Body: cube, l1, l2, lp:<p>, or a JSON descriptor file.
    #[arg(long, global = true)]
    omega: Option<String>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Lattice window, `lo:hi` on every axis or `lo:hi,lo:hi,...`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long, global = true)]
    variant: Option<Variant>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output file, written atomically; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Box truncation T of the summability functional.
    #[arg(long, global = true)]
    truncation: Option<i64>,
    /// Range J of random sequences in the summability check.
    #[arg(long, global = true)]
    half_range: Option<i64>,
    /// Center refinement q of the approximate non-centered operator.
    #[arg(long, global = true)]
    refinement: Option<u32>,
    /// Radius up to which the lattice-count constant c1 is certified.
    #[arg(long, global = true)]
    r_max: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximal function of an input function on a window.
    Maximal {
        input: PathBuf,
        /// Largest number of grid points.
        #[arg(long)]
        budget: Option<u128>,
    },
    /// ||grad Mf||_1 over the whole lattice (exact in d = 1, window doubling otherwise).
    GradientNorm {
        input: PathBuf,
        /// Largest number of points in the final window.
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Run verification suites and write a JSON report.
    Verify {
        /// Suites to run; repeat or separate with commas.
        #[arg(long, value_enum, value_delimiter = ',')]
        suite: Vec<Suite>,
        /// Number of terms of the sharpness construction.
        #[arg(long, default_value_t = 10)]
        terms: usize,
        #[command(flatten)]
        continuity: ContinuityFlags,
    },
    /// Gradient-to-l1 ratios of random functions against the certified bound.
    Sweep {
        /// Certify this function instead of sampling.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Support drawn from [-w, w]^d.
        #[arg(long, default_value_t = RandomFamily::default().half_width)]
        half_width: i64,
        #[arg(long, default_value_t = RandomFamily::default().min_support)]
        min_support: usize,
        #[arg(long, default_value_t = RandomFamily::default().max_support)]
        max_support: usize,
    },
    /// Perturbation experiment f + 2^{-k} delta_p.
    Continuity {
        #[command(flatten)]
        flags: ContinuityFlags,
    },
    /// The constant C~ and the summability functional of a sequence.
    Summability {
        /// Comma-separated strictly increasing integers.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        sequence: Option<Vec<i64>>,
    },
    /// Greedy sharpness construction on Z.
    Remark2 {
        #[arg(long, default_value_t = 10)]
        terms: usize,
    },
    /// Geometric constants of the body and the boundedness constant.
    Constants,
}

#[derive(Args, Debug)]
struct ContinuityFlags {
    /// Base function (default delta_0 + delta_{3 e_1}).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Perturbation point (default e_1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    perturb: Option<Vec<i64>>,
    #[arg(long, default_value_t = 30)]
    steps: usize,
    /// Margin of the gap window around the support hull.
    #[arg(long)]
    gap_margin: Option<i64>,
    /// Half-width of the radius-inclusion window.
    #[arg(long, default_value_t = 10)]
    inclusion_half: i64,
}

impl ContinuityFlags {
    fn into_args(self) -> ContinuityArgs {
        ContinuityArgs {
            input: self.input,
            perturb: self.perturb,
            steps: self.steps,
            gap_margin: self.gap_margin,
            inclusion_half: self.inclusion_half,
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("MAXLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().with_context(|| format!("MAXLAB_THREADS={raw:?} is not a count"))?;
    if threads == 0 {
        bail!("MAXLAB_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

/// The input file whose header may fix the dimension.
fn input_path(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Maximal { input, .. } | Command::GradientNorm { input, .. } => Some(input),
        Command::Sweep { input, .. } => input.as_ref(),
        Command::Continuity { flags } | Command::Verify { continuity: flags, .. } => flags.input.as_ref(),
        _ => None,
    }
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    let g = cli.global;
    let file = g.config.as_deref().map(ConfigFile::load).transpose()?;
    let mut dim = g.dim;
    if dim.is_none() && file.as_ref().is_none_or(|f| f.dim.is_none() && f.omega.is_none()) {
        if let Some(path) = input_path(&cli.command) {
            dim = commands::peek_dim(path)?;
        }
    }
    let flags = Overrides {
        omega: g.omega,
        dim,
        variant: g.variant,
        window: g.window,
        seed: g.seed,
        trials: g.trials,
        out: g.out,
        format: g.format,
        truncation: g.truncation,
        half_range: g.half_range,
        refinement: g.refinement,
        r_max: g.r_max,
    };
    let cfg = ExperimentConfig::resolve(file, flags)?;
    match cli.command {
        Command::Maximal { input, budget } => commands::maximal(&cfg, &input, budget),
        Command::GradientNorm { input, budget } => commands::gradient(&cfg, &input, budget),
        Command::Verify { suite, terms, continuity } => {
            commands::verify(&cfg, &VerifyArgs { suites: suite, terms, continuity: continuity.into_args() })
        }
        Command::Sweep { input, half_width, min_support, max_support } => {
            if half_width < 0 || min_support == 0 || min_support > max_support {
                bail!("need half_width >= 0 and 1 <= min_support <= max_support");
            }
            let family = RandomFamily { half_width, min_support, max_support };
            commands::sweep(&cfg, &SweepArgs { input, family })
        }
        Command::Continuity { flags } => commands::continuity(&cfg, &flags.into_args()),
        Command::Summability { sequence } => commands::summability(&cfg, sequence.as_deref()),
        Command::Remark2 { terms } => commands::remark2(&cfg, terms),
        Command::Constants => commands::constants(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
