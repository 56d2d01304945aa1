//! `tvrelax`: binary TV denoising, Chan-Vese and multiphase segmentation,
//! raw and volume-constrained binary solves, and seeded noise injection.

mod commands;
mod error;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tvrelax::{Preconditioner, SolverParams};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "tvrelax", version, about = "Binary total-variation problems via exact convex relaxation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Binary denoising of a grayscale image.
    Denoise(DenoiseArgs),
    /// Two-phase Chan-Vese segmentation.
    Segment(SegmentArgs),
    /// Multiphase segmentation with M indicator fields (up to 2^M phases).
    Label(LabelArgs),
    /// Binary solve for a raw data field g, optionally with a volume constraint.
    Solve(SolveArgs),
    /// Add seeded Gaussian noise to an image.
    AddNoise(NoiseArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrecondArg {
    Cholesky,
    Jacobi,
}

/// Solver settings. Precedence: flags, then `--config`, then defaults.
#[derive(Debug, Args)]
struct SolverFlags {
    /// TOML file with solver parameters (keys as in the JSON report)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// TV weight, > 0
    #[arg(long)]
    beta: Option<f64>,
    /// Exact box-penalty weight
    #[arg(long)]
    c: Option<f64>,
    /// Penalty smoothing
    #[arg(long)]
    eps: Option<f64>,
    /// Dual regularization weight
    #[arg(long)]
    gamma: Option<f64>,
    /// Dual box-penalty parameter
    #[arg(long)]
    alpha: Option<f64>,
    /// Continue in alpha (x10 per stage) up to this value
    #[arg(long)]
    alpha_max: Option<f64>,
    /// Weight of the divergence-free penalty
    #[arg(long = "lambda")]
    div_weight: Option<f64>,
    /// Threshold level t in (0, 1)
    #[arg(long)]
    threshold: Option<f64>,
    /// Newton iteration cap
    #[arg(long)]
    max_newton: Option<usize>,
    #[arg(long, value_enum)]
    preconditioner: Option<PrecondArg>,
    /// Take full Newton steps
    #[arg(long)]
    no_line_search: bool,
    /// Grid spacing [default: 1 / max(rows, cols)]
    #[arg(long)]
    spacing: Option<f64>,
}

impl SolverFlags {
    fn resolve(&self, default_beta: f64) -> CliResult<SolverParams> {
        let mut p = SolverParams::with_beta(default_beta);
        if let Some(path) = &self.config {
            p = commands::load_config(path, p)?;
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.beta, self.beta);
        set(&mut p.c, self.c);
        set(&mut p.eps, self.eps);
        set(&mut p.gamma, self.gamma);
        set(&mut p.alpha, self.alpha);
        set(&mut p.div_weight, self.div_weight);
        set(&mut p.threshold_t, self.threshold);
        if self.alpha_max.is_some() {
            p.alpha_max = self.alpha_max;
        }
        if let Some(n) = self.max_newton {
            p.newton_max_iters = n;
        }
        if let Some(pc) = self.preconditioner {
            p.preconditioner = match pc {
                PrecondArg::Cholesky => Preconditioner::Cholesky,
                PrecondArg::Jacobi => Preconditioner::Jacobi,
            };
        }
        if self.no_line_search {
            p.line_search = false;
        }
        p.validate()?;
        if let Some(h) = self.spacing {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Validation("--spacing must be > 0".into()));
            }
        }
        Ok(p)
    }
}

#[derive(Debug, Args)]
struct Outputs {
    /// JSON report
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Residual history as CSV (iter,residual,pcg_iters)
    #[arg(long, value_name = "FILE")]
    residuals: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    /// Input image (.pgm or .png)
    #[arg(long)]
    input: PathBuf,
    /// Binary output image
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth binary image; adds pixel agreement to the report
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(long)]
    input: PathBuf,
    /// Binary indicator of the phase with mean c1
    #[arg(long)]
    out: PathBuf,
    /// Initial indicator image (read as > 1/2) [default: {f > 1/2}]
    #[arg(long)]
    u0: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Outer iteration cap
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Debug, Args)]
struct LabelArgs {
    #[arg(long)]
    input: PathBuf,
    /// Piecewise-constant image; phase indicators go next to it as
    /// <stem>_phase<b>.<ext>
    #[arg(long)]
    out: PathBuf,
    /// Number of indicator fields, 1..=8
    #[arg(short, long, default_value_t = 2)]
    m: usize,
    /// Sweep cap
    #[arg(long, default_value_t = 30)]
    max_sweeps: usize,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Data field: CSV of raw values, or an image mapped to g = 2 v - 1
    #[arg(long)]
    g: PathBuf,
    /// Binary solution (.csv, .pgm or .png)
    #[arg(long)]
    out: PathBuf,
    /// Prescribed volume sum(u) h^d
    #[arg(long)]
    volume: Option<f64>,
    /// Volume tolerance [default: half a cell]
    #[arg(long, requires = "volume")]
    vol_tol: Option<f64>,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Noise standard deviation as a fraction of the data range
    #[arg(long)]
    level: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Denoise(a) => commands::denoise(a),
        Command::Segment(a) => commands::segment(a),
        Command::Label(a) => commands::label(a),
        Command::Solve(a) => commands::solve(a),
        Command::AddNoise(a) => commands::add_noise(a),
    };
    match outcome {
        Ok(commands::Status::Done) => ExitCode::SUCCESS,
        Ok(commands::Status::NotConverged) => {
            eprintln!("solver failure: Newton iteration did not converge; partial results written");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
