use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod render;

use commands::{CliError, Output};

#[derive(Debug, Parser)]
#[command(name = "binvote", version, about = "Exact welfare analysis of binary voting rules")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal anonymous BIC rule for an environment.
    Solve {
        #[command(flatten)]
        env: EnvArgs,
    },
    /// Best qualified majority rule vs the optimum vs the weighted majority rule.
    Compare {
        #[command(flatten)]
        env: EnvArgs,
        /// Allocation on a weighted-majority tie, as an integer or p/q.
        #[arg(long, default_value = "1/2")]
        tie: String,
    },
    /// BIC, anonymity and welfare of a given mechanism.
    Check {
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long)]
        mech: PathBuf,
    },
    /// Ordinal projection of a given mechanism.
    Hatf {
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long)]
        mech: PathBuf,
    },
    /// Welfare of every qualified majority rule.
    Qmr {
        #[command(flatten)]
        env: EnvArgs,
    },
    /// Utilitarian weighted majority rule.
    Wmr {
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value = "1/2")]
        tie: String,
    },
    /// Run a verification suite: theorem1, theorem2, lemma3, aux, example1 or ratio.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Welfare figures on the high/low-stakes family.
    #[command(name = "demo-theorem2")]
    DemoTheorem2 {
        #[command(flatten)]
        family: FamilyArgs,
    },
}

#[derive(Debug, Args)]
pub struct EnvArgs {
    /// Environment JSON file.
    #[arg(long = "env")]
    pub path: PathBuf,
    /// Allow more than 8 agents or 8 support values.
    #[arg(long)]
    pub force_large: bool,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long = "M", default_value = "10")]
    pub m: String,
    #[arg(long, default_value = "0")]
    pub eps: String,
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Solve { env } => commands::solve(&env),
        Command::Compare { env, tie } => commands::compare(&env, &tie),
        Command::Check { env, mech } => commands::check(&env, &mech),
        Command::Hatf { env, mech } => commands::hatf(&env, &mech),
        Command::Qmr { env } => commands::qmr(&env),
        Command::Wmr { env, tie } => commands::wmr(&env, &tie),
        Command::Verify {
            suite,
            seed,
            trials,
            family,
        } => commands::verify(&suite, seed, trials, &family),
        Command::DemoTheorem2 { family } => commands::demo_theorem2(&family),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(out) => {
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("JSON values serialize") + "\n",
                Format::Table => out.table,
            };
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
