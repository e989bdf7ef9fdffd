use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kae_cli::commands::{self, Outcome};
use kae_cli::config::RunConfig;
use kae_cli::{CliError, EXIT_USAGE};

/// Key appearance equivocation of permutation-group substitution ciphers.
#[derive(Parser)]
#[command(name = "kae", version)]
struct Cli {
    /// Worker threads (defaults to all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Key-space report: rate, order, maximal keys, closed-form comparison.
    Analyze(ConfigArg),
    /// Exact, bound and Monte Carlo equivocation over the configured lengths.
    Curve {
        #[command(flatten)]
        config: ConfigArg,
        /// Check lower <= exact <= upper on every row; report on stderr.
        #[arg(long)]
        verify: bool,
        /// Overrides `mc.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Known-plaintext attack on a pair file or a simulated trajectory.
    Attack {
        #[command(flatten)]
        config: ConfigArg,
        /// File with a plaintext line and a ciphertext line (0-based letters).
        #[arg(
            long,
            conflicts_with = "simulate",
            required_unless_present = "simulate"
        )]
        pairs: Option<PathBuf>,
        /// Number of simulated interceptions.
        #[arg(long)]
        simulate: Option<usize>,
        /// Simulation seed; falls back to `mc.seed`, then 42.
        #[arg(long)]
        seed: Option<u64>,
        /// Longest simulated interception in letters; defaults to the largest configured length.
        #[arg(long)]
        max_length: Option<usize>,
    },
    /// Built-in oracle, bound and coset checks on reference models.
    Verify {
        /// Monte Carlo seed, default 42.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<(Outcome, Option<String>), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot start {n} threads: {e}")))?;
    }
    let load = |c: &ConfigArg| RunConfig::load(&c.config);
    let target = |cfg: &RunConfig| Some(cfg.output.path.clone());
    match cli.command {
        Command::Analyze(c) => {
            let cfg = load(&c)?;
            Ok((commands::analyze(&cfg)?, target(&cfg)))
        }
        Command::Curve {
            config,
            verify,
            seed,
        } => {
            let cfg = load(&config)?;
            Ok((commands::curve(&cfg, verify, seed)?, target(&cfg)))
        }
        Command::Attack {
            config,
            pairs,
            simulate,
            seed,
            max_length,
        } => {
            let cfg = load(&config)?;
            let outcome = match (pairs, simulate) {
                (Some(p), _) => commands::attack_pairs(&cfg, &p)?,
                (None, Some(n)) => commands::attack_simulate(&cfg, n, seed, max_length)?,
                (None, None) => return Err(CliError::config("give --pairs or --simulate")),
            };
            Ok((outcome, target(&cfg)))
        }
        Command::Verify { seed } => Ok((commands::verify(seed)?, None)),
    }
}

fn emit(outcome: &Outcome, path: Option<&str>) -> Result<(), CliError> {
    match path {
        Some(p) if p != "-" => std::fs::write(p, &outcome.stdout)
            .map_err(|e| CliError::config(format!("cannot write {p}: {e}")))?,
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.stdout.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::config(format!("cannot write output: {e}")))?;
        }
    }
    eprint!("{}", outcome.stderr);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = run(cli).and_then(|(outcome, path)| {
        emit(&outcome, path.as_deref())?;
        Ok(outcome.failed)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_USAGE),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
