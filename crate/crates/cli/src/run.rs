//! Propagation for each method.

use pild::path_integral::{brute_force_pi, dynamical_maps, iterative_pi};
use pild::propagator::propagator_series;
use pild::ttm::{extract_transfer_tensors, propagate_ttm_lindblad};
use pild::{DensityMatrix, PathBath, PathIntegralOptions, TransferTensorSet};
use serde::Serialize;

use crate::config::{Method, SimConfig, TtmConfig};
use crate::error::CliError;
use crate::setup::Problem;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    /// Largest `|Tr ρ - 1|` over the run.
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
    pub max_hermiticity_residual: f64,
    /// Largest population change when the run is repeated with `k_max - 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max_sensitivity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer_tensors_kept: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub times: Vec<f64>,
    /// `ρ(t)` at every time, starting with the initial state.
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Diagnostics,
}

fn core(context: &'static str) -> impl Fn(pild::Error) -> CliError {
    move |e| CliError::from_core(context, e)
}

fn path_baths(problem: &Problem, memory: usize) -> Result<Vec<PathBath>, CliError> {
    problem
        .baths
        .iter()
        .map(|b| PathBath::new(b, problem.dt, memory))
        .collect::<pild::Result<Vec<_>>>()
        .map_err(core("baths"))
}

fn direct(problem: &Problem, k_max: usize) -> Result<Vec<DensityMatrix>, CliError> {
    let props = propagator_series(&problem.liouvillian, problem.dt, problem.n_steps, problem.ode_tolerance)
        .map_err(core("propagator"))?;
    let opts = PathIntegralOptions {
        k_max,
        ..problem.options
    };
    iterative_pi(&props, &path_baths(problem, k_max)?, &problem.rho0, &opts).map_err(core("direct_pild"))
}

/// Transfer tensors of the jump-free system with its baths.
pub fn generate_transfer_tensors(
    problem: &Problem,
    k_max: usize,
    ttm: &TtmConfig,
) -> Result<TransferTensorSet, CliError> {
    let map_steps = ttm.map_steps.unwrap_or(4 * (k_max + 1)).max(k_max);
    let system = problem.liouvillian.without_jumps();
    if !system.is_time_independent() {
        return Err(CliError::Validation(
            "method: time-dependent field unsupported by ttm_pild".into(),
        ));
    }
    let props = propagator_series(&system, problem.dt, map_steps, problem.ode_tolerance).map_err(core("propagator"))?;
    let opts = PathIntegralOptions {
        k_max,
        ..problem.options
    };
    let maps = dynamical_maps(&props, &path_baths(problem, k_max)?, problem.dt, &opts).map_err(core("dynamical maps"))?;
    let tensors = extract_transfer_tensors(&maps, None).map_err(core("transfer tensors"))?;
    Ok(match ttm.tail_threshold {
        Some(threshold) => tensors.truncated(threshold),
        None => tensors,
    })
}

fn ttm(problem: &Problem, k_max: usize, cfg: &TtmConfig) -> Result<(Vec<DensityMatrix>, usize), CliError> {
    let tensors = match &cfg.archive {
        Some(path) => {
            let t = crate::archive::read(std::path::Path::new(path))?;
            if t.dim() != problem.dim() {
                return Err(CliError::Validation(format!(
                    "ttm.archive: tensors are for d = {}, model has d = {}",
                    t.dim(),
                    problem.dim()
                )));
            }
            if (t.dt - problem.dt).abs() > 1e-12 * problem.dt {
                return Err(CliError::Validation(format!(
                    "ttm.archive: tensors use dt = {}, grid.dt = {}",
                    t.dt, problem.dt
                )));
            }
            t
        }
        None => generate_transfer_tensors(problem, k_max, cfg)?,
    };
    let lindbladian = problem.liouvillian.dissipative_part(0.0);
    let states =
        propagate_ttm_lindblad(&tensors, &lindbladian, &problem.rho0, problem.n_steps).map_err(core("ttm_pild"))?;
    Ok((states, tensors.len()))
}

fn lindblad_only(problem: &Problem) -> Result<Vec<DensityMatrix>, CliError> {
    let props = propagator_series(&problem.liouvillian, problem.dt, problem.n_steps, problem.ode_tolerance)
        .map_err(core("propagator"))?;
    let mut rho = problem.rho0.clone();
    Ok(props
        .iter()
        .map(|k| {
            rho = k.apply_to(&rho);
            rho.clone()
        })
        .collect())
}

fn brute_force(problem: &Problem) -> Result<Vec<DensityMatrix>, CliError> {
    let props = propagator_series(&problem.liouvillian, problem.dt, problem.n_steps, problem.ode_tolerance)
        .map_err(core("propagator"))?;
    brute_force_pi(&props, &path_baths(problem, problem.n_steps)?, &problem.rho0, &problem.options)
        .map_err(core("brute_force"))
}

fn propagate(cfg: &SimConfig, problem: &Problem, k_max: usize) -> Result<(Vec<DensityMatrix>, Option<usize>), CliError> {
    match cfg.method {
        Method::DirectPild => Ok((direct(problem, k_max)?, None)),
        Method::TtmPild => {
            let (states, kept) = ttm(problem, k_max, &cfg.ttm.clone().unwrap_or_default())?;
            Ok((states, Some(kept)))
        }
        Method::LindbladOnly => Ok((lindblad_only(problem)?, None)),
        Method::BruteForce => Ok((brute_force(problem)?, None)),
    }
}

fn max_population_change(a: &[DensityMatrix], b: &[DensityMatrix]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (0..x.dim()).map(move |k| (x.population(k) - y.population(k)).abs()))
        .fold(0.0, f64::max)
}

pub fn execute(cfg: &SimConfig, problem: &Problem) -> Result<RunOutput, CliError> {
    let (mut states, kept) = propagate(cfg, problem, problem.options.k_max)?;
    let mut diagnostics = Diagnostics {
        transfer_tensors_kept: kept,
        ..Default::default()
    };
    if cfg.method == Method::LindbladOnly && !problem.baths.is_empty() {
        diagnostics.notes.push("baths ignored by lindblad_only".into());
    }
    if cfg.method == Method::BruteForce {
        diagnostics.notes.push("brute_force keeps the full influence functional; grid.k_max unused".into());
    }
    if cfg.diagnostics.k_max_sensitivity {
        let uses_k_max = matches!(cfg.method, Method::DirectPild | Method::TtmPild) && !problem.baths.is_empty();
        if uses_k_max && problem.options.k_max >= 2 {
            let (coarse, _) = propagate(cfg, problem, problem.options.k_max - 1)?;
            diagnostics.k_max_sensitivity = Some(max_population_change(&states, &coarse));
        } else {
            diagnostics
                .notes
                .push("k_max sensitivity skipped: needs baths, k_max >= 2 and a path-integral method".into());
        }
    }

    states.insert(0, problem.rho0.clone());
    diagnostics.min_eigenvalue = f64::INFINITY;
    for rho in &states {
        diagnostics.max_trace_drift = diagnostics.max_trace_drift.max((rho.trace() - 1.0).norm());
        diagnostics.min_eigenvalue = diagnostics.min_eigenvalue.min(rho.min_eigenvalue());
        diagnostics.max_hermiticity_residual = diagnostics.max_hermiticity_residual.max(rho.hermiticity_residual());
        if !rho.matrix().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(CliError::Numerical("non-finite density matrix".into()));
        }
    }
    let times = (0..states.len()).map(|n| n as f64 * problem.dt).collect();
    Ok(RunOutput {
        times,
        states,
        diagnostics,
    })
}
