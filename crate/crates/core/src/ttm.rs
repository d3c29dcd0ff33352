//! Transfer-tensor route for time-independent problems.
//!
//! Transfer tensors `T_j` are extracted from a series of bath-only
//! dynamical maps so that `ρ_n = Σ_j T_j ρ_{n-j}`. Jump operators are then
//! added on top of the transfer-tensor recurrence with a symmetric split of
//! the dissipative exponential:
//!
//! ```text
//! ρ_n = G_½ Σ_j T_j G_½ ρ_{n-j},    G_½ = exp(-i 𝓛_D dt/2)
//! ```
//!
//! which reduces to the bare recurrence for `𝓛_D = 0` and to Strang
//! splitting when the bath is Markovian.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouville::{DensityMatrix, SuperOperator};
use crate::path_integral::DynamicalMapSeries;
use crate::propagator::propagator_static;

#[derive(Clone, Debug, PartialEq)]
pub struct TransferTensorSet {
    pub dt: f64,
    pub tensors: Vec<SuperOperator>,
}

impl TransferTensorSet {
    pub fn dim(&self) -> usize {
        self.tensors.first().map(SuperOperator::dim).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Frobenius norm of each tensor.
    pub fn norms(&self) -> Vec<f64> {
        self.tensors.iter().map(|t| t.matrix().norm()).collect()
    }

    /// Drop the tail past the last tensor whose norm reaches `threshold`.
    pub fn truncated(&self, threshold: f64) -> TransferTensorSet {
        let keep = self
            .norms()
            .iter()
            .rposition(|&n| n >= threshold)
            .map_or(1, |i| i + 1);
        TransferTensorSet {
            dt: self.dt,
            tensors: self.tensors[..keep.min(self.tensors.len())].to_vec(),
        }
    }

    /// Maps `𝓔_1..𝓔_n` regenerated from the tensors.
    pub fn reconstruct(&self, n: usize) -> Vec<SuperOperator> {
        let d = self.dim();
        let mut maps: Vec<SuperOperator> = vec![SuperOperator::identity(d)];
        for step in 1..=n {
            let mut next = SuperOperator::zeros(d);
            for (j, t) in self.tensors.iter().enumerate().take(step) {
                next = next.add(&t.compose(&maps[step - j - 1]));
            }
            maps.push(next);
        }
        maps.remove(0);
        maps
    }

    /// Largest elementwise deviation between the regenerated and the
    /// supplied maps.
    pub fn reconstruction_residual(&self, maps: &DynamicalMapSeries) -> f64 {
        self.reconstruct(maps.len())
            .iter()
            .zip(&maps.maps)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// `T_n = 𝓔_n - Σ_{m<n} T_m 𝓔_{n-m}` for `n = 1..=l_mem` (all maps when
/// `l_mem` is `None`).
pub fn extract_transfer_tensors(maps: &DynamicalMapSeries, l_mem: Option<usize>) -> Result<TransferTensorSet> {
    let l_mem = l_mem.unwrap_or(maps.len());
    if l_mem == 0 || maps.len() < l_mem {
        return Err(Error::InsufficientMaps {
            required: l_mem.max(1),
            available: maps.len(),
        });
    }
    let mut tensors: Vec<SuperOperator> = Vec::with_capacity(l_mem);
    for n in 1..=l_mem {
        let mut t = maps.map(n);
        for (m, tm) in tensors.iter().enumerate() {
            t = t.sub(&tm.compose(&maps.map(n - m - 1)));
        }
        tensors.push(t);
    }
    Ok(TransferTensorSet { dt: maps.dt, tensors })
}

/// Discretized memory kernel `𝒦_k = (T_k - (1 - i 𝓛₀ dt) δ_{k1}) / dt²`.
pub fn memory_kernel_view(tensors: &TransferTensorSet, l0: &SuperOperator) -> Result<Vec<SuperOperator>> {
    let dt = tensors.dt;
    if let Some(first) = tensors.tensors.first() {
        if first.dim() != l0.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: l0.dim(),
            });
        }
    }
    let bare = SuperOperator::identity(l0.dim()).sub(&l0.scale(Complex64::new(0.0, dt)));
    let inv_dt2 = Complex64::new(1.0 / (dt * dt), 0.0);
    Ok(tensors
        .tensors
        .iter()
        .enumerate()
        .map(|(k, t)| if k == 0 { t.sub(&bare) } else { t.clone() }.scale(inv_dt2))
        .collect())
}

/// Propagate `n_steps` with the transfer tensors plus the dissipative
/// Liouvillian `lindbladian` (time-independent), split symmetrically.
pub fn propagate_ttm_lindblad(
    tensors: &TransferTensorSet,
    lindbladian: &SuperOperator,
    rho0: &DensityMatrix,
    n_steps: usize,
) -> Result<Vec<DensityMatrix>> {
    let d = rho0.dim();
    if tensors.is_empty() {
        return Err(Error::InsufficientMaps {
            required: 1,
            available: 0,
        });
    }
    for found in [tensors.dim(), lindbladian.dim()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    let half = propagator_static(lindbladian, 0.5 * tensors.dt)?;
    let rho0 = rho0.vectorize();
    // history[m] = G_½ ρ_m
    let mut history = vec![half.apply(&rho0)];
    let mut out = Vec::with_capacity(n_steps);
    for n in 1..=n_steps {
        let mut y = nalgebra::DVector::<Complex64>::zeros(d * d);
        for (j, t) in tensors.tensors.iter().enumerate().take(n) {
            y += t.apply(&history[n - j - 1]);
        }
        let rho = half.apply(&y);
        history.push(half.apply(&rho));
        out.push(DensityMatrix::from_vector(&rho)?);
    }
    Ok(out)
}
