use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use uq_cli::commands::{self, Options};

/// Propagate input and surrogate uncertainty with polynomial chaos.
#[derive(Parser)]
#[command(name = "uq", version)]
struct Cli {
    /// Directory for relative output paths (defaults to the working directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Replace every seed in the config with ones derived from this value.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one propagation and write the report and Sobol' table.
    Run {
        /// Study config (JSON).
        config: PathBuf,
    },
    /// Retrain the surrogate at several training sizes and tabulate the indices.
    Study {
        /// Study config (JSON); the surrogate must be `gp_train`.
        config: PathBuf,
        /// Comma-separated training sizes, e.g. 30,100,500.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    /// Check a config and print the problem dimensions.
    Validate {
        /// Study config (JSON).
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options {
        out_dir: cli.out_dir,
        seed_override: cli.seed_override,
    };
    let result = match cli.command {
        Command::Run { config } => {
            commands::run(&config, &opts).map(|o| print!("{}", commands::summarize(&o)))
        }
        Command::Study { config, sizes } => commands::study(&config, &sizes, &opts).map(|paths| {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }),
        Command::Validate { config } => commands::validate(&config, &opts).map(|s| print!("{s}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
