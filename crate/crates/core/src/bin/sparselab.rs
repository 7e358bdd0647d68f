use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use sparselab::cli::{self, EpsilonChoice};

#[derive(Parser)]
#[command(name = "sparselab", version, about = "Dantzig selector experiments and dictionary diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a complete experiment config template for a scenario kind
    /// (gaussian, rademacher, orthogonal, grouped, misspecified, noiseless).
    GenConfig { kind: String },
    /// Solve the Dantzig selector for a design CSV and a response CSV.
    #[command(group(ArgGroup::new("eps").required(true).args(["epsilon", "calibrate"])))]
    Solve {
        design: PathBuf,
        response: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        /// sigma,A,C
        #[arg(long, value_name = "SIGMA,A,C")]
        calibrate: Option<String>,
    },
    /// Geometry report for a Gram matrix around an index set.
    Diagnose {
        #[arg(long)]
        gram: PathBuf,
        /// Comma-separated 1-based indices.
        #[arg(long = "J", value_name = "J")]
        j: String,
        #[arg(long)]
        d: usize,
    },
    /// Run a Monte Carlo experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a verification battery and write a pass/fail report.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> sparselab::Result<u8> {
    let seed = cli::seed_from_env()?;
    let mut stdout = std::io::stdout().lock();
    let code = match cli.command {
        Command::GenConfig { kind } => cli::cmd_gen_config(&kind, &mut stdout)?,
        Command::Solve {
            design,
            response,
            epsilon,
            calibrate,
        } => {
            let eps = match (epsilon, calibrate) {
                (Some(e), _) => EpsilonChoice::Explicit(e),
                (None, Some(c)) => EpsilonChoice::parse_calibrate(&c)?,
                (None, None) => unreachable!("clap requires one of the two"),
            };
            cli::cmd_solve(&design, &response, &eps, &mut stdout)?
        }
        Command::Diagnose { gram, j, d } => cli::cmd_diagnose(&gram, &j, d, seed, &mut stdout)?,
        Command::Run { config, out, threads } => cli::cmd_run(&config, &out, threads, seed)?,
        Command::Verify { suite, out } => cli::cmd_verify(&suite, &out, None, seed, |r| eprintln!("{}", r.line()))?,
    };
    stdout.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e))
        }
    }
}
