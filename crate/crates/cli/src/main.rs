use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pild_cli::CliError;

#[derive(Parser)]
#[command(name = "pild", version, about = "Path-integral Lindblad dynamics runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML config.
    Run {
        config: PathBuf,
        /// Directory for the CSV and manifest (overrides outputs.directory).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Check the config and exit without propagating.
        #[arg(long)]
        validate_only: bool,
    },
    /// Generate transfer tensors from a config and write them to an archive.
    ExportTransferTensors {
        config: PathBuf,
        /// Archive file to write.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn set_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Resource(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            output,
            threads,
            validate_only,
        } => {
            set_threads(threads)?;
            if validate_only {
                let problem = pild_cli::validate_file(&config)?;
                println!("{}: ok (d = {}, {} steps)", config.display(), problem.dim(), problem.n_steps);
                return Ok(());
            }
            let report = pild_cli::run_file(&config, output.as_deref())?;
            let d = &report.output.diagnostics;
            println!(
                "wrote {} and {} (trace drift {:.2e}, min eigenvalue {:.2e})",
                report.csv.display(),
                report.manifest.display(),
                d.max_trace_drift,
                d.min_eigenvalue
            );
            Ok(())
        }
        Command::ExportTransferTensors { config, out, threads } => {
            set_threads(threads)?;
            let n = pild_cli::export_transfer_tensors(&config, &out)?;
            println!("wrote {n} transfer tensors to {}", out.display());
            Ok(())
        }
    }
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
