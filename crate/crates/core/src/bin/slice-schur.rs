use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slice_schur::cli::{self, CheckKind, Options, Outcome, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "slice-schur", version, about = "Schur analysis in the quaternionic unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Series truncation degree (default 64, or the value in the input file).
    #[arg(long, global = true)]
    degree: Option<usize>,
    /// Verification tolerance (default 1e-8).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sampling radius for negative-square estimates.
    #[arg(long, global = true, default_value_t = 0.7)]
    radius: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an interpolation problem.
    Interp {
        input: PathBuf,
        /// Write the full solution as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a Blaschke product from a zero set.
    Blaschke {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a realization.
    Check {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Schur)]
        kind: Kind,
    },
    /// Estimate the number of negative squares of a kernel.
    Negsq {
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Schur,
    Cara,
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let mut opts = Options::new();
    opts.degree = args.common.degree;
    opts.tol = args.common.tol;
    opts.seed = args.common.seed;
    opts.radius = args.common.radius;

    let (input, out) = match &args.command {
        Command::Interp { input, out } | Command::Blaschke { input, out } => (input, out.clone()),
        Command::Check { input, .. } | Command::Negsq { input, .. } => (input, None),
    };
    let bytes = match std::fs::read(input) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("cannot read {}: {e}", input.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };

    let outcome: Outcome = match args.command {
        Command::Interp { .. } => cli::cmd_interp(&bytes, &opts),
        Command::Blaschke { .. } => cli::cmd_blaschke(&bytes, &opts),
        Command::Check { kind, .. } => {
            let kind = match kind {
                Kind::Schur => CheckKind::Schur,
                Kind::Cara => CheckKind::Cara,
            };
            cli::cmd_check(&bytes, kind, &opts)
        }
        Command::Negsq { trials, points, .. } => {
            opts.trials = trials;
            opts.points = points;
            cli::cmd_negsq(&bytes, &opts)
        }
    };

    if let (Some(path), Some(doc)) = (out, &outcome.artifact) {
        let text = serde_json::to_string_pretty(doc).expect("artifact serializes");
        if let Err(e) = std::fs::write(&path, text + "\n") {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    println!("{}", outcome.report.to_json());
    eprintln!("{}", outcome.report.summary());
    ExitCode::from(outcome.report.exit_code as u8)
}
