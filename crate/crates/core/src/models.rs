//! Model builders and observables.
//!
//! The excitonic dimer uses the basis order `(|gg⟩, |ge⟩, |eg⟩, |ee⟩)`, where
//! the first letter is the state of monomer 1.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouville::{DensityMatrix, JumpOperator, Operator, SystemHamiltonian, TimeFunction};

pub const GG: usize = 0;
pub const GE: usize = 1;
pub const EG: usize = 2;
pub const EE: usize = 3;

pub const DIMER_LABELS: [&str; 4] = ["gg", "ge", "eg", "ee"];
pub const SPIN_LABELS: [&str; 2] = ["up", "down"];

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn diagonal(values: &[f64]) -> Operator {
    Operator::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|v| c(*v))))
}

fn transition(d: usize, pairs: &[(usize, usize)]) -> Operator {
    let mut m = Operator::zeros(d, d);
    for &(to, from) in pairs {
        m[(to, from)] = c(1.0);
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimerSpec {
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
    pub drive_amplitude: f64,
    pub drive_frequency: f64,
}

impl DimerSpec {
    /// `ε₁ = ε₂ = 5`, `Δ = 1`, no drive.
    pub fn undriven() -> Self {
        Self {
            eps1: 5.0,
            eps2: 5.0,
            delta: 1.0,
            drive_amplitude: 0.0,
            drive_frequency: 10.0,
        }
    }

    /// Same dimer under `V(t) = 11.96575 cos(10 t) (|eg⟩⟨eg| - |ge⟩⟨ge|)`.
    pub fn driven() -> Self {
        Self {
            drive_amplitude: 11.96575,
            ..Self::undriven()
        }
    }
}

#[derive(Clone, Debug)]
pub struct DimerModel {
    pub hamiltonian: SystemHamiltonian,
    /// Excitation projectors of monomer 1 and monomer 2, used as bath
    /// coupling operators.
    pub monomer_couplings: [Operator; 2],
    /// Pump on monomer 1, `|eg⟩⟨gg| + |ee⟩⟨ge|`.
    pub pump: JumpOperator,
    /// Drain on monomer 2, `|gg⟩⟨ge| + |eg⟩⟨ee|`.
    pub drain: JumpOperator,
}

impl DimerModel {
    pub fn pump_and_drain(&self) -> Vec<JumpOperator> {
        vec![self.pump.clone(), self.drain.clone()]
    }
}

pub fn build_dimer(spec: &DimerSpec) -> Result<DimerModel> {
    let mut h = diagonal(&[0.0, spec.eps2, spec.eps1, spec.eps1 + spec.eps2]);
    h[(EG, GE)] = c(-spec.delta);
    h[(GE, EG)] = c(-spec.delta);
    let field = diagonal(&[0.0, -1.0, 1.0, 0.0]);
    let hamiltonian = SystemHamiltonian::new(h)?
        .with_field(TimeFunction::cosine(spec.drive_amplitude, spec.drive_frequency), field)?;
    Ok(DimerModel {
        hamiltonian,
        monomer_couplings: [diagonal(&[0.0, 0.0, 1.0, 1.0]), diagonal(&[0.0, 1.0, 0.0, 1.0])],
        pump: JumpOperator::new(transition(4, &[(EG, GG), (EE, GE)]))?,
        drain: JumpOperator::new(transition(4, &[(GG, GE), (EG, EE)]))?,
    })
}

#[derive(Clone, Debug)]
pub struct SpinBosonModel {
    pub hamiltonian: SystemHamiltonian,
    pub coupling: Operator,
}

pub fn sigma_x() -> Operator {
    transition(2, &[(0, 1), (1, 0)])
}

pub fn sigma_z() -> Operator {
    diagonal(&[1.0, -1.0])
}

/// `H = ε σ_z + Δ σ_x` coupled to the bath through `σ_z`.
pub fn build_spin_boson(eps: f64, delta: f64) -> Result<SpinBosonModel> {
    let h = sigma_z() * c(eps) + sigma_x() * c(delta);
    Ok(SpinBosonModel {
        hamiltonian: SystemHamiltonian::new(h)?,
        coupling: sigma_z(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Population(usize),
    /// Excited population of monomer 1 or 2 (dimer basis).
    Monomer(usize),
    SigmaZ,
    SigmaX,
    /// Real part of the trace.
    Trace,
    TraceImag,
    MinEigenvalue,
}

impl Observable {
    /// Parse `pop:<label|index>`, `P1`, `P2`, `sigma_z`, `sigma_x`, `trace`,
    /// `trace_im` or `min_eigenvalue`.
    pub fn parse(name: &str, labels: &[&str]) -> Result<Self> {
        let d = labels.len();
        let unknown = || Error::UnknownObservable(name.to_string());
        let obs = match name {
            "P1" if d == 4 => Observable::Monomer(1),
            "P2" if d == 4 => Observable::Monomer(2),
            "sigma_z" if d == 2 => Observable::SigmaZ,
            "sigma_x" if d == 2 => Observable::SigmaX,
            "trace" => Observable::Trace,
            "trace_im" => Observable::TraceImag,
            "min_eigenvalue" => Observable::MinEigenvalue,
            _ => {
                let state = name.strip_prefix("pop:").ok_or_else(unknown)?;
                let index = labels
                    .iter()
                    .position(|l| *l == state)
                    .or_else(|| state.parse::<usize>().ok().filter(|&i| i < d))
                    .ok_or_else(unknown)?;
                Observable::Population(index)
            }
        };
        Ok(obs)
    }

    pub fn eval(&self, rho: &DensityMatrix) -> f64 {
        let m = rho.matrix();
        match *self {
            Observable::Population(k) => m[(k, k)].re,
            Observable::Monomer(1) => m[(EG, EG)].re + m[(EE, EE)].re,
            Observable::Monomer(_) => m[(GE, GE)].re + m[(EE, EE)].re,
            Observable::SigmaZ => m[(0, 0)].re - m[(1, 1)].re,
            Observable::SigmaX => 2.0 * m[(0, 1)].re,
            Observable::Trace => rho.trace().re,
            Observable::TraceImag => rho.trace().im,
            Observable::MinEigenvalue => rho.min_eigenvalue(),
        }
    }
}

/// Named observables; `trace` and `min_eigenvalue` are always present.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    entries: Vec<(String, Observable)>,
}

impl ObservableSet {
    pub fn parse<S: AsRef<str>>(names: &[S], labels: &[&str]) -> Result<Self> {
        let mut entries = Vec::new();
        for name in names {
            let name = name.as_ref();
            entries.push((name.to_string(), Observable::parse(name, labels)?));
        }
        for required in ["trace", "min_eigenvalue"] {
            if !entries.iter().any(|(n, _)| n == required) {
                entries.push((required.to_string(), Observable::parse(required, labels)?));
            }
        }
        Ok(Self { entries })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eval(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.entries.iter().map(|(_, o)| o.eval(rho)).collect()
    }
}

/// Time series of every observable in `set`, one column per observable.
pub fn evaluate_observables(set: &ObservableSet, series: &[DensityMatrix]) -> Vec<(String, Vec<f64>)> {
    set.entries
        .iter()
        .map(|(name, obs)| (name.clone(), series.iter().map(|rho| obs.eval(rho)).collect()))
        .collect()
}
