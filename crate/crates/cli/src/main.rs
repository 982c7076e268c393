//! `fracalign` command-line front end.

mod overrides;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "fracalign", version, about = "Fractional Euler alignment solver and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; must be empty or absent unless --force is given.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the seed of random initial data or of the harness.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reuse a nonempty output directory.
    #[arg(long)]
    pub force: bool,
    /// `section.key=value` overrides, value in TOML syntax.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Exit with status 1 without running when the smallness gates fail.
    #[arg(long)]
    pub strict_gates: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// March the coupled system and write per-step diagnostics.
    Simulate(Common),
    /// Run the decoupled iterative scheme and report its contraction.
    Iterate(Common),
    /// Run the Cucker-Smale particle system.
    Particles(Common),
    /// Run the randomized inequality harness.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        ladder: Vec<usize>,
    },
    /// Critical Besov norm of a snapshot file.
    BesovNorm {
        #[command(flatten)]
        common: Common,
        snapshot: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
    },
    /// Compare a run with its rescaled copy.
    ScalingCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Simulate(c) => run::simulate(&c),
        Command::Iterate(c) => run::iterate(&c),
        Command::Particles(c) => run::particles(&c),
        Command::Verify { common, samples, alpha, dim, ladder } => {
            run::verify(&common, samples, alpha, dim, ladder)
        }
        Command::BesovNorm { common, snapshot, s, p, q } => run::besov_norm(&common, &snapshot, s, p, q),
        Command::ScalingCheck { common, lambda } => run::scaling(&common, lambda),
    };
    match outcome {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status())
        }
    }
}
