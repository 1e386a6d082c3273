use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Interim winner-selection rules and winner-selecting dice.
#[derive(Debug, Parser)]
#[command(name = "wsd", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct EnvInterim {
    /// Environment file.
    #[arg(long)]
    pub env: PathBuf,
    /// Interim rule file.
    #[arg(long)]
    pub interim: PathBuf,
    /// Use exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct EnvDice {
    /// Environment file.
    #[arg(long)]
    pub env: PathBuf,
    /// Dice file.
    #[arg(long)]
    pub dice: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Border feasibility check (level sets for single-winner environments).
    Check(EnvInterim),
    /// Generalized Border check against the expected matroid rank.
    CheckMatroid(EnvInterim),
    /// Single-winner dice for a feasible interim rule.
    Construct {
        #[command(flatten)]
        input: EnvInterim,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shared dice for a symmetric rule on n i.i.d. candidates.
    ConstructSym {
        #[arg(long)]
        n: usize,
        /// Shared prior file.
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        interim: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact interim rule of a dice system.
    Eval {
        #[command(flatten)]
        input: EnvDice,
        #[arg(long)]
        exact: bool,
    },
    /// Monte-Carlo interim rule with standard errors.
    Simulate {
        #[command(flatten)]
        input: EnvDice,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reduce every die to at most (types + 1) faces.
    Reduce {
        #[command(flatten)]
        input: EnvDice,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical dice for a feasible interim rule under a matroid.
    SolveMatroid {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        interim: PathBuf,
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Quasi-Monte-Carlo points per shift.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Persuasion schemes.
    Persuasion {
        #[command(subcommand)]
        command: PersuasionCommand,
    },
    /// Two-sided dice for the four-candidate {0,1}/{2,3} family.
    DemoNonmatroid {
        /// Interim rule with keys "0:0" .. "3:0".
        #[arg(long)]
        interim: PathBuf,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the environment file.
        #[arg(long)]
        env_out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PersuasionCommand {
    /// Re-derive the no-dice argument for the three-action instance.
    VerifyTable1,
    /// Second-order rule and persuasiveness of a scheme.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(status) => ExitCode::from(status as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code_for(&err) as u8)
        }
    }
}
