use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use hqga::bench::pipeline;
use hqga::bench::ExperimentConfig;
use hqga::market_data::DEFAULT_GAMMA;

/// HQGA vs. classical GA experiments on binary mean-variance portfolios.
#[derive(Debug, Parser)]
#[command(name = "hqga", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample k-asset instances from a price CSV.
    Prepare {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long, default_value_t = 9)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_GAMMA)]
        gamma: f64,
        /// Comma-separated subset seeds, one instance per seed.
        #[arg(long, value_delimiter = ',', required = true)]
        subset_seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustively solve every instance in a directory.
    Brute {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment config, one CSV per (algorithm, instance, pop, seed).
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate run CSVs into convergence, diversity and optimum tables.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        brute: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(command: Command) -> hqga::Result<()> {
    match command {
        Command::Prepare {
            prices,
            k,
            gamma,
            subset_seeds,
            out,
        } => {
            let files = pipeline::prepare(&prices, k, gamma, &subset_seeds, &out)?;
            println!("wrote {} instance file(s) to {}", files.len(), out.display());
        }
        Command::Brute { instances, out } => {
            let rows = pipeline::brute(&instances, &out)?;
            for r in &rows {
                println!("{}\t{}\t{:.6e}\t{}", r.instance, r.bits, r.f_star, r.evaluations);
            }
        }
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let files = pipeline::run(&cfg, &out)?;
            println!("wrote {} run file(s) to {}", files.len(), out.display());
        }
        Command::Report { runs, brute, out } => {
            let files = pipeline::report(&runs, &brute, &out)?;
            println!("wrote {} report file(s) to {}", files.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
