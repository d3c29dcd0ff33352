//! Turn a [`SimConfig`] into library objects, validating everything before
//! any expensive work starts.

use pild::liouville::Operator;
use pild::models::{self, build_dimer, build_spin_boson, DimerSpec, ObservableSet};
use pild::path_integral::augmented_tensor_bytes;
use pild::{
    BathSpec, BathSplitting, Complex64, DensityMatrix, JumpOperator, Liouvillian, PathIntegralOptions, SpectralDensity,
    SystemHamiltonian, TimeFunction,
};

use crate::config::{
    BathConfig, CouplingConfig, InitialState, JumpConfig, JumpOperatorConfig, MatrixConfig, Method, ModelConfig,
    SimConfig, Splitting,
};
use crate::error::CliError;

/// Everything a run needs, resolved from the configuration.
#[derive(Clone, Debug)]
pub struct Problem {
    pub labels: Vec<String>,
    /// System Hamiltonian plus all jump operators.
    pub liouvillian: Liouvillian,
    pub baths: Vec<BathSpec>,
    pub rho0: DensityMatrix,
    pub observables: ObservableSet,
    pub dt: f64,
    pub n_steps: usize,
    pub options: PathIntegralOptions,
    pub ode_tolerance: f64,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.rho0.dim()
    }
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {reason}"))
}

fn core(field: &str) -> impl Fn(pild::Error) -> CliError + '_ {
    move |e| CliError::from_core(field, e)
}

fn matrix(field: &str, m: &MatrixConfig) -> Result<Operator, CliError> {
    let rows = m.re.len();
    if rows == 0 {
        return Err(invalid(field, "matrix is empty"));
    }
    let cols = m.re[0].len();
    if m.re.iter().any(|r| r.len() != cols) {
        return Err(invalid(field, "rows have different lengths"));
    }
    if let Some(im) = &m.im {
        if im.len() != rows || im.iter().any(|r| r.len() != cols) {
            return Err(invalid(field, "imaginary part has a different shape"));
        }
    }
    let out = Operator::from_fn(rows, cols, |i, j| {
        let im = m.im.as_ref().map_or(0.0, |im| im[i][j]);
        Complex64::new(m.re[i][j], im)
    });
    if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(invalid(field, "non-finite entry"));
    }
    Ok(out)
}

fn envelope(m: &crate::config::Modulation) -> TimeFunction {
    TimeFunction::Cosine {
        offset: m.offset,
        amplitude: m.amplitude,
        frequency: m.frequency,
        phase: m.phase,
    }
}

/// Hamiltonian, default labels and named operators of the model.
struct ModelParts {
    hamiltonian: SystemHamiltonian,
    labels: Vec<String>,
    couplings: Vec<(&'static str, Operator)>,
    jumps: Vec<(&'static str, Operator)>,
}

fn model_parts(model: &ModelConfig) -> Result<ModelParts, CliError> {
    match model {
        ModelConfig::Dimer {
            eps1,
            eps2,
            delta,
            drive_amplitude,
            drive_frequency,
        } => {
            let spec = DimerSpec {
                eps1: *eps1,
                eps2: *eps2,
                delta: *delta,
                drive_amplitude: *drive_amplitude,
                drive_frequency: *drive_frequency,
            };
            if [spec.eps1, spec.eps2, spec.delta, spec.drive_amplitude, spec.drive_frequency]
                .iter()
                .any(|v| !v.is_finite())
            {
                return Err(invalid("model", "dimer parameters must be finite"));
            }
            let m = build_dimer(&spec).map_err(core("model"))?;
            let [c1, c2] = m.monomer_couplings;
            Ok(ModelParts {
                hamiltonian: m.hamiltonian,
                labels: models::DIMER_LABELS.iter().map(|s| s.to_string()).collect(),
                couplings: vec![("monomer1", c1), ("monomer2", c2)],
                jumps: vec![("pump", m.pump.matrix), ("drain", m.drain.matrix)],
            })
        }
        ModelConfig::SpinBoson { eps, delta } => {
            if !(eps.is_finite() && delta.is_finite()) {
                return Err(invalid("model", "spin-boson parameters must be finite"));
            }
            let m = build_spin_boson(*eps, *delta).map_err(core("model"))?;
            let mut lower = Operator::zeros(2, 2);
            lower[(1, 0)] = Complex64::new(1.0, 0.0);
            Ok(ModelParts {
                hamiltonian: m.hamiltonian,
                labels: models::SPIN_LABELS.iter().map(|s| s.to_string()).collect(),
                couplings: vec![("sigma_z", m.coupling)],
                jumps: vec![("lowering", lower.clone()), ("raising", lower.adjoint())],
            })
        }
        ModelConfig::Explicit {
            hamiltonian,
            fields,
            labels,
        } => {
            let h = matrix("model.hamiltonian", hamiltonian)?;
            let mut system = SystemHamiltonian::new(h).map_err(core("model.hamiltonian"))?;
            for (i, f) in fields.iter().enumerate() {
                let name = format!("model.fields[{i}]");
                let op = matrix(&name, &f.operator)?;
                system = system.with_field(envelope(&f.envelope), op).map_err(core(&name))?;
            }
            let d = system.dim();
            let labels = match labels {
                Some(l) if l.len() != d => {
                    return Err(invalid("model.labels", format!("expected {d} labels, found {}", l.len())))
                }
                Some(l) => l.clone(),
                None => (0..d).map(|i| i.to_string()).collect(),
            };
            Ok(ModelParts {
                hamiltonian: system,
                labels,
                couplings: Vec::new(),
                jumps: Vec::new(),
            })
        }
    }
}

fn named<'a>(field: &str, kind: &str, name: &str, table: &'a [(&str, Operator)]) -> Result<&'a Operator, CliError> {
    table.iter().find(|(n, _)| *n == name).map(|(_, op)| op).ok_or_else(|| {
        let known: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
        invalid(field, format!("unknown {kind} `{name}` (this model offers {known:?})"))
    })
}

fn bath(i: usize, cfg: &BathConfig, parts: &ModelParts, d: usize) -> Result<BathSpec, CliError> {
    let field = format!("baths[{i}]");
    let sd = SpectralDensity::ohmic(cfg.xi, cfg.omega_c).map_err(core(&field))?;
    let spec = match &cfg.coupling {
        CouplingConfig::Named(name) => {
            let op = named(&format!("{field}.coupling"), "coupling", name, &parts.couplings)?;
            BathSpec::new(sd, cfg.beta, op)
        }
        CouplingConfig::Diagonal(diag) => {
            if diag.len() != d {
                return Err(invalid(
                    &format!("{field}.coupling"),
                    format!("expected {d} diagonal entries, found {}", diag.len()),
                ));
            }
            BathSpec::from_diagonal(sd, cfg.beta, diag.clone())
        }
    };
    spec.map_err(core(&field))
}

fn jump(i: usize, cfg: &JumpConfig, parts: &ModelParts, d: usize) -> Result<JumpOperator, CliError> {
    let field = format!("jumps[{i}]");
    let op = match &cfg.operator {
        JumpOperatorConfig::Preset(name) => named(&format!("{field}.operator"), "jump operator", name, &parts.jumps)?.clone(),
        JumpOperatorConfig::Matrix(m) => matrix(&format!("{field}.operator"), m)?,
    };
    if op.nrows() != d || op.ncols() != d {
        return Err(invalid(&field, format!("operator must be {d}x{d}")));
    }
    if !cfg.rate.is_finite() {
        return Err(invalid(&format!("{field}.rate"), "must be finite"));
    }
    let rate = match cfg.modulation {
        None => TimeFunction::Constant(cfg.rate),
        Some(m) => TimeFunction::Cosine {
            offset: cfg.rate,
            amplitude: m.amplitude,
            frequency: m.frequency,
            phase: m.phase,
        },
    };
    JumpOperator::with_rate(op, rate).map_err(core(&field))
}

fn initial_state(state: &InitialState, labels: &[String], d: usize) -> Result<DensityMatrix, CliError> {
    match state {
        InitialState::Label(name) => {
            let k = labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| invalid("initial_state", format!("unknown basis label `{name}` (known: {labels:?})")))?;
            DensityMatrix::basis_state(d, k).map_err(core("initial_state"))
        }
        InitialState::Matrix(m) => {
            let rho = matrix("initial_state", m)?;
            if rho.nrows() != d {
                return Err(invalid("initial_state", format!("must be {d}x{d}")));
            }
            DensityMatrix::new(rho).map_err(core("initial_state"))
        }
    }
}

/// Build and validate the problem. Never starts a propagation.
pub fn build_problem(cfg: &SimConfig) -> Result<Problem, CliError> {
    let grid = &cfg.grid;
    if !(grid.dt > 0.0 && grid.dt.is_finite()) {
        return Err(invalid("grid.dt", "must be finite and positive"));
    }
    if grid.n_steps == 0 {
        return Err(invalid("grid.n_steps", "must be at least 1"));
    }
    if grid.k_max == 0 {
        return Err(invalid("grid.k_max", "must be at least 1"));
    }
    if grid.k_max > grid.n_steps {
        return Err(invalid(
            "grid.k_max",
            format!("k_max = {} exceeds n_steps = {}", grid.k_max, grid.n_steps),
        ));
    }
    let tol = cfg.tolerances.ode;
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(invalid("tolerances.ode", "must lie in (0, 1e-2]"));
    }

    let parts = model_parts(&cfg.model)?;
    let d = parts.hamiltonian.dim();
    let baths = cfg
        .baths
        .iter()
        .enumerate()
        .map(|(i, b)| bath(i, b, &parts, d))
        .collect::<Result<Vec<_>, _>>()?;
    let jumps = cfg
        .jumps
        .iter()
        .enumerate()
        .map(|(i, j)| jump(i, j, &parts, d))
        .collect::<Result<Vec<_>, _>>()?;
    let liouvillian = Liouvillian::new(parts.hamiltonian.clone(), jumps).map_err(core("jumps"))?;
    let rho0 = initial_state(&cfg.initial_state, &parts.labels, d)?;
    let label_refs: Vec<&str> = parts.labels.iter().map(String::as_str).collect();
    let observables = ObservableSet::parse(&cfg.outputs.observables, &label_refs).map_err(core("outputs.observables"))?;

    if cfg.method == Method::TtmPild {
        if cfg.time_dependent_field() {
            return Err(invalid("method", "time-dependent field unsupported by ttm_pild"));
        }
        if !liouvillian.is_time_independent() {
            return Err(invalid("method", "time-dependent jump rates unsupported by ttm_pild"));
        }
    }
    if cfg.memory_budget == 0 {
        return Err(invalid("memory_budget", "must be positive"));
    }
    if matches!(cfg.method, Method::DirectPild | Method::TtmPild) && !baths.is_empty()
        && augmented_tensor_bytes(d, grid.k_max) > cfg.memory_budget as u128 {
            return Err(budget_error(d, grid.k_max, cfg.memory_budget));
        }

    let options = PathIntegralOptions {
        memory_budget: cfg.memory_budget,
        splitting: match grid.splitting {
            Splitting::Symmetric => BathSplitting::Symmetric,
            Splitting::Trailing => BathSplitting::Trailing,
        },
        ..PathIntegralOptions::new(grid.k_max)
    };
    Ok(Problem {
        labels: parts.labels,
        liouvillian,
        baths,
        rho0,
        observables,
        dt: grid.dt,
        n_steps: grid.n_steps,
        options,
        ode_tolerance: tol,
    })
}

fn budget_error(d: usize, k_max: usize, budget: u64) -> CliError {
    let fitting = (1..k_max)
        .rev()
        .find(|&k| augmented_tensor_bytes(d, k) <= budget as u128)
        .unwrap_or(0);
    CliError::Resource(format!(
        "grid.k_max: augmented tensor for d = {d}, k_max = {k_max} needs {} bytes, budget is {} bytes; \
         largest k_max that fits is {fitting}",
        augmented_tensor_bytes(d, k_max),
        budget
    ))
}
