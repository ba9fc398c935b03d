use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kelly_market_cli::commands::{self, parse_grid, parse_seeds};
use kelly_market_cli::{CliError, VerifySource, OUT_DIR_ENV};

#[derive(Parser)]
#[command(
    name = "kelly-market",
    version,
    about = "Simulate prediction markets of Kelly bettors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write rounds.csv, wealth.csv, record.json and manifest.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Replay-audit a run and write verify.json; exits 1 if any check fails.
    Verify {
        #[arg(long, conflicts_with = "record", required_unless_present = "record")]
        config: Option<PathBuf>,
        #[arg(long)]
        record: Option<PathBuf>,
        /// Shift the middle round's price before auditing (negative control).
        #[arg(long, hide = true, allow_hyphen_values = true)]
        perturb_price: Option<f64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Fit the discount factor of the discounted-frequency price model.
    FitGamma {
        /// record.json or rounds.csv
        #[arg(long)]
        record: PathBuf,
        /// Grid of discount factors, lo:hi:step.
        #[arg(long, default_value = "0.80:1.00:0.01")]
        grid: String,
        #[arg(long, default_value_t = commands::default_burn_in())]
        burn_in: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run one config over a range of seeds and write batch.csv.
    Batch {
        #[arg(long)]
        config: PathBuf,
        /// Half-open seed range lo..hi.
        #[arg(long)]
        seeds: String,
        #[command(flatten)]
        out: OutDir,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out } => {
            for path in commands::simulate(&config, &out.out)? {
                println!("{}", path.display());
            }
        }
        Command::Verify {
            config,
            record,
            perturb_price,
            out,
        } => {
            let source = match (&config, &record) {
                (Some(c), _) => VerifySource::Config(c),
                (None, Some(r)) => VerifySource::Record(r),
                (None, None) => unreachable!("clap requires one source"),
            };
            let report = commands::verify(source, &out.out, perturb_price)?;
            for c in &report.checks {
                let status = if c.passed {
                    "pass"
                } else if c.informational {
                    "info"
                } else {
                    "FAIL"
                };
                println!(
                    "{status:4} {:16} {:e} (threshold {:e})",
                    c.name, c.residual, c.threshold
                );
            }
            println!("{}", out.out.join("verify.json").display());
            commands::ensure_passed(&report)?;
        }
        Command::FitGamma {
            record,
            grid,
            burn_in,
            out,
        } => {
            let grid = parse_grid(&grid)?;
            let fit = commands::fit_gamma(&record, &grid, burn_in, &out.out)?;
            println!("best gamma {} (rmse {})", fit.best_gamma, fit.best_rmse);
        }
        Command::Batch { config, seeds, out } => {
            let seeds = parse_seeds(&seeds)?;
            for path in commands::batch(&config, seeds, &out.out)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
