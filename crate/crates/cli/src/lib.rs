//! Batch front end: read a TOML run description, propagate with the chosen
//! method and write a CSV time series plus a JSON manifest.

pub mod archive;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod setup;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{Method, SimConfig};
pub use error::CliError;
pub use run::{Diagnostics, RunOutput};
pub use setup::{build_problem, Problem};

/// Result of a completed run.
pub struct Report {
    pub output: RunOutput,
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

fn stem_of(cfg: &SimConfig, config_path: &Path) -> String {
    cfg.outputs.stem.clone().unwrap_or_else(|| {
        config_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("run")
            .to_string()
    })
}

/// Load, validate, run and write outputs. `output_dir` overrides
/// `outputs.directory`.
pub fn run_file(config_path: &Path, output_dir: Option<&Path>) -> Result<Report, CliError> {
    let cfg = SimConfig::load(config_path)?;
    let problem = build_problem(&cfg)?;
    let start = Instant::now();
    let output = run::execute(&cfg, &problem)?;
    let elapsed = start.elapsed().as_secs_f64();
    let dir = output_dir.map_or_else(|| PathBuf::from(&cfg.outputs.directory), Path::to_path_buf);
    let written = output::write_outputs(&dir, &stem_of(&cfg, config_path), &cfg, &problem, &output, elapsed)?;
    Ok(Report {
        output,
        csv: written.csv,
        manifest: written.manifest,
    })
}

/// Validate a configuration without propagating.
pub fn validate_file(config_path: &Path) -> Result<Problem, CliError> {
    build_problem(&SimConfig::load(config_path)?)
}

/// Generate the transfer tensors described by a configuration (its jump
/// operators are ignored) and write them as an archive.
pub fn export_transfer_tensors(config_path: &Path, archive_path: &Path) -> Result<usize, CliError> {
    let cfg = SimConfig::load(config_path)?;
    if cfg.time_dependent_field() {
        return Err(CliError::Validation("method: time-dependent field unsupported by ttm_pild".into()));
    }
    let problem = build_problem(&cfg)?;
    let tensors = run::generate_transfer_tensors(&problem, problem.options.k_max, &cfg.ttm.clone().unwrap_or_default())?;
    archive::write(archive_path, &tensors)?;
    Ok(tensors.len())
}
