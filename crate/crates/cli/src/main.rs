use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pintau_cli::suite::run_suite_to_csv;
use pintau_cli::{run, write_rows, CliError, ConfigArgs, RunOutput, TableId};

#[derive(Debug, Parser)]
#[command(name = "pintau", version, about = "All-at-once MINRES experiments for heat and wave equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem (CSV row) or dump its preconditioned spectrum.
    Run {
        /// key=value file; flags given on the command line take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Reproduce a reference table, circulant and tau for every row.
    Suite {
        #[arg(long, value_enum)]
        table: TableId,
        /// Skip rows with more unknowns than this.
        #[arg(long, default_value_t = 1 << 21)]
        max_dof: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        maxit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run { config, args } => {
            let base = match config {
                Some(path) => ConfigArgs::from_file(&path)?,
                None => ConfigArgs::default(),
            };
            let cfg = base.overridden_by(args).resolve()?;
            match run(&cfg)? {
                RunOutput::Solve(row) => Ok(row.converged),
                RunOutput::Spectrum(report) => {
                    eprintln!(
                        "eigenvalues={} outliers={} near_zero={} negative={} epsilon={}",
                        report.eigenvalues.len(),
                        report.outliers,
                        report.near_zero,
                        report.negative(),
                        report.epsilon
                    );
                    Ok(true)
                }
            }
        }
        Command::Suite {
            table,
            max_dof,
            tol,
            maxit,
            out,
        } => {
            if !(tol > 0.0 && tol < 1.0) || maxit == 0 {
                return Err(CliError::Usage("tol must lie in (0, 1) and maxit must be positive".into()));
            }
            match out {
                Some(path) => run_suite_to_csv(table, max_dof, tol, maxit, &path)?,
                None => {
                    let rows = pintau_cli::run_suite(table, max_dof, tol, maxit, |_| {});
                    write_rows(std::io::stdout().lock(), &rows)?;
                    rows
                }
            };
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("pintau: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
