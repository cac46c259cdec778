use std::path::PathBuf;
use std::process::ExitCode;

use cigar_cli::commands::{self, CliError, EXIT_USAGE};
use cigar_cli::config::RunConfig;
use cigar_core::linearized::Sector;
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "cigar", version, about = "Ground states and dynamics of the confined cubic NLS")]
struct Cli {
    /// TOML configuration; defaults are used for missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Confinement strength; for `evolve`, overrides the value stored in the state.
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Mass constraint.
    #[arg(long, global = true)]
    mass: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the corpus and the perturbations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only warnings and errors on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimize the energy at fixed mass and write the state.
    GroundState,
    /// Ground states over the omega list and decay slopes.
    Sweep,
    /// Eigenvalues of the linearized operator around a stored state.
    Spectrum {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value = "even")]
        sector: Sector,
    },
    /// Time evolution from a stored state.
    Evolve {
        #[arg(long)]
        state: PathBuf,
    },
    /// Self-checks with a PASS/FAIL table.
    Check,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(w) = cli.omega {
        cfg.problem.omega = w;
    }
    if let Some(m) = cli.mass {
        cfg.problem.mass = m;
    }
    if let Some(o) = cli.out {
        cfg.run.out_dir = o;
    }
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    cfg.validate()?;
    match cli.command {
        Command::GroundState => commands::cmd_ground_state(&cfg),
        Command::Sweep => commands::cmd_sweep(&cfg),
        Command::Spectrum { state, sector } => commands::cmd_spectrum(&cfg, &state, sector),
        Command::Evolve { state } => commands::cmd_evolve(&cfg, &state, cli.omega),
        Command::Check => commands::cmd_check(&cfg, cli.quiet),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
