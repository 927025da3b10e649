use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gbdt_cli::report::{load, summary_table};
use gbdt_cli::run_file;

#[derive(Parser)]
#[command(name = "gbdt", version, about = "GBDT transformations of canonical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a scenario config and write results.json plus CSV files.
    Run {
        config: PathBuf,
        /// Output directory (default: the config's output_dir, else ./out next to the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// ODE tolerance, overriding the config.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print a table of the checks in a results file.
    Report { results: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, tol } => match run_file(&config, out.as_deref(), tol) {
            Ok(outcome) => {
                for t in outcome.results.tasks.iter().filter(|t| t.error.is_some()) {
                    eprintln!("error in task {}: {}", t.task, t.error.as_deref().unwrap_or_default());
                }
                print!("{}", summary_table(&outcome.results));
                println!("results written to {}", outcome.out_dir.join("results.json").display());
                ExitCode::from(outcome.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Report { results } => match load(&results) {
            Ok(r) => {
                print!("{}", summary_table(&r));
                let pass = r.all_pass && r.tasks.iter().all(|t| t.passed());
                ExitCode::from(if pass { 0 } else { 1 })
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
        },
    }
}
