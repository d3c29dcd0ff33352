//! CSV time series and JSON run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::SimConfig;
use crate::error::CliError;
use crate::run::{Diagnostics, RunOutput};
use crate::setup::Problem;

const RESERVED: [&str; 3] = ["trace", "trace_im", "min_eigenvalue"];

/// Column names in output order.
pub fn csv_header(problem: &Problem) -> Vec<String> {
    let d = problem.dim();
    let mut cols = vec!["t".to_string()];
    cols.extend(problem.observables.names().filter(|n| !RESERVED.contains(n)).map(String::from));
    for i in 0..d {
        for j in 0..d {
            cols.push(format!("re_{i}_{j}"));
            cols.push(format!("im_{i}_{j}"));
        }
    }
    cols.extend(RESERVED.iter().map(|s| s.to_string()));
    cols
}

pub fn render_csv(problem: &Problem, out: &RunOutput) -> String {
    let mut text = csv_header(problem).join(",");
    text.push('\n');
    let names: Vec<&str> = problem.observables.names().collect();
    for (t, rho) in out.times.iter().zip(&out.states) {
        let values = problem.observables.eval(rho);
        let mut row = vec![*t];
        row.extend(names.iter().zip(&values).filter(|(n, _)| !RESERVED.contains(n)).map(|(_, v)| *v));
        row.extend(rho.matrix().transpose().iter().flat_map(|z| [z.re, z.im]));
        let trace = rho.trace();
        row.extend([trace.re, trace.im, rho.min_eigenvalue()]);
        let mut line = String::new();
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            let _ = write!(line, "{v:.16e}");
        }
        text.push_str(&line);
        text.push('\n');
    }
    text
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub program: &'static str,
    pub version: &'static str,
    pub method: &'static str,
    pub config: &'a SimConfig,
    pub dimension: usize,
    pub steps: usize,
    pub diagnostics: &'a Diagnostics,
    pub wall_time_seconds: f64,
    pub csv: String,
}

pub struct Written {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

pub fn write_outputs(
    dir: &Path,
    stem: &str,
    cfg: &SimConfig,
    problem: &Problem,
    out: &RunOutput,
    wall_time_seconds: f64,
) -> Result<Written, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(&format!("creating {}", dir.display()), e))?;
    let csv = dir.join(format!("{stem}.csv"));
    let manifest_path = dir.join(format!("{stem}.json"));
    std::fs::write(&csv, render_csv(problem, out)).map_err(|e| CliError::io(&format!("writing {}", csv.display()), e))?;
    let manifest = Manifest {
        program: "pild",
        version: env!("CARGO_PKG_VERSION"),
        method: cfg.method.name(),
        config: cfg,
        dimension: problem.dim(),
        steps: problem.n_steps,
        diagnostics: &out.diagnostics,
        wall_time_seconds,
        csv: format!("{stem}.csv"),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Numerical(format!("manifest: {e}")))?;
    std::fs::write(&manifest_path, text)
        .map_err(|e| CliError::io(&format!("writing {}", manifest_path.display()), e))?;
    Ok(Written {
        csv,
        manifest: manifest_path,
    })
}
