//! Harmonic baths described by their spectral density, the bath response
//! function, and the discretized influence-functional coefficients.
//!
//! Baths never materialize explicit modes; everything is computed from
//! `J(ω)` by frequency quadrature.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::liouville::{ensure_square, Operator};
use crate::quadrature::{integrate, QuadratureOptions};

/// Frequency cutoff of the quadrature in units of `ω_c`.
pub const CUTOFF_MULTIPLE: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectralDensity {
    /// `J(ω) = (π/2) ξ ω exp(-ω/ω_c)`
    OhmicExponential { xi: f64, omega_c: f64 },
}

impl SpectralDensity {
    pub fn ohmic(xi: f64, omega_c: f64) -> Result<Self> {
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(invalid("xi", "must be finite and non-negative"));
        }
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(invalid("omega_c", "must be finite and positive"));
        }
        Ok(SpectralDensity::OhmicExponential { xi, omega_c })
    }

    pub fn eval(&self, omega: f64) -> f64 {
        match *self {
            SpectralDensity::OhmicExponential { xi, omega_c } => {
                std::f64::consts::FRAC_PI_2 * xi * omega * (-omega / omega_c).exp()
            }
        }
    }

    pub fn is_trivial(&self) -> bool {
        match *self {
            SpectralDensity::OhmicExponential { xi, .. } => xi == 0.0,
        }
    }

    /// Upper limit of the frequency integrals.
    pub fn cutoff(&self) -> f64 {
        match *self {
            SpectralDensity::OhmicExponential { omega_c, .. } => CUTOFF_MULTIPLE * omega_c,
        }
    }

    /// `J(ω)/ω`, finite at `ω = 0`.
    fn over_omega(&self, omega: f64) -> f64 {
        match *self {
            SpectralDensity::OhmicExponential { xi, omega_c } => {
                std::f64::consts::FRAC_PI_2 * xi * (-omega / omega_c).exp()
            }
        }
    }
}

fn invalid(name: &str, reason: &str) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.to_string(),
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && !beta.is_nan() {
        Ok(())
    } else {
        Err(invalid("beta", "must be positive (use infinity for zero temperature)"))
    }
}

/// `coth(βω/2)`, equal to 1 at zero temperature.
fn thermal_factor(beta: f64, omega: f64) -> f64 {
    if beta.is_infinite() {
        1.0
    } else {
        (0.5 * beta * omega).tanh().recip()
    }
}

fn oscillation_pieces(cutoff: f64, t: f64) -> usize {
    ((cutoff * t.abs() / std::f64::consts::PI).ceil() as usize).clamp(8, 4096)
}

/// Bath response function
/// `C(t) = (1/π) ∫₀^∞ J(ω) [coth(βω/2) cos ωt - i sin ωt] dω`.
pub fn bath_correlation(spec: &SpectralDensity, beta: f64, t: f64) -> Result<Complex64> {
    check_beta(beta)?;
    if spec.is_trivial() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let cutoff = spec.cutoff();
    let opts = QuadratureOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        initial_pieces: oscillation_pieces(cutoff, t),
        ..Default::default()
    };
    let integral = integrate(
        |w| {
            let j = spec.eval(w);
            let (s, c) = (w * t).sin_cos();
            Complex64::new(j * thermal_factor(beta, w) * c, -j * s)
        },
        0.0,
        cutoff,
        &opts,
    )?;
    Ok(integral / std::f64::consts::PI)
}

/// `x - sin x`, accurate for small `x`.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x - x.sin()
    }
}

/// `Φ(τ) = ∫₀^τ dt' ∫₀^{t'} dt'' C(t' - t'')`, the integral of the response
/// function over a triangle of side `τ`.
pub fn correlation_triangle_integral(spec: &SpectralDensity, beta: f64, tau: f64) -> Result<Complex64> {
    check_beta(beta)?;
    if spec.is_trivial() || tau == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let cutoff = spec.cutoff();
    let opts = QuadratureOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        initial_pieces: oscillation_pieces(cutoff, tau),
        ..Default::default()
    };
    let integral = integrate(
        |w| {
            let jw = spec.over_omega(w);
            let half = (0.5 * w * tau).sin();
            // J/ω² [coth (1 - cos ωτ) - i (ωτ - sin ωτ)]
            Complex64::new(
                jw * thermal_factor(beta, w) * 2.0 * half * half / w,
                -jw * x_minus_sin(w * tau) / w,
            )
        },
        0.0,
        cutoff,
        &opts,
    )?;
    Ok(integral / std::f64::consts::PI)
}

/// `∫_{ℓΔ}^{(ℓ+1)Δ} dt' ∫_0^Δ dt'' C(t' - t'')` for lag `ℓ ≥ 1`.
fn correlation_square_integral(spec: &SpectralDensity, beta: f64, dt: f64, lag: usize) -> Result<Complex64> {
    let cutoff = spec.cutoff();
    let shift = lag as f64 * dt;
    let opts = QuadratureOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        initial_pieces: oscillation_pieces(cutoff, shift + dt),
        ..Default::default()
    };
    let integral = integrate(
        |w| {
            let jw = spec.over_omega(w);
            let half = (0.5 * w * dt).sin();
            let weight = jw * 4.0 * half * half / w;
            let (s, c) = (w * shift).sin_cos();
            Complex64::new(weight * thermal_factor(beta, w) * c, -weight * s)
        },
        0.0,
        cutoff,
        &opts,
    )?;
    Ok(integral / std::f64::consts::PI)
}

/// A harmonic bath coupled through a system operator diagonal in the
/// simulation basis.
#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec {
    pub spectral_density: SpectralDensity,
    /// Inverse temperature; `f64::INFINITY` for zero temperature.
    pub beta: f64,
    coupling: Vec<f64>,
}

impl BathSpec {
    pub fn new(spectral_density: SpectralDensity, beta: f64, coupling_op: &Operator) -> Result<Self> {
        let d = ensure_square(coupling_op)?;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    worst = worst.max(coupling_op[(i, j)].norm());
                } else {
                    worst = worst.max(coupling_op[(i, i)].im.abs());
                }
            }
        }
        if worst != 0.0 {
            return Err(Error::CouplingNotDiagonal { magnitude: worst });
        }
        Self::from_diagonal(
            spectral_density,
            beta,
            (0..d).map(|i| coupling_op[(i, i)].re).collect(),
        )
    }

    pub fn from_diagonal(spectral_density: SpectralDensity, beta: f64, coupling: Vec<f64>) -> Result<Self> {
        check_beta(beta)?;
        if coupling.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("bath coupling".into()));
        }
        Ok(Self {
            spectral_density,
            beta,
            coupling,
        })
    }

    /// Diagonal of the coupling operator `ŝ`.
    pub fn coupling(&self) -> &[f64] {
        &self.coupling
    }

    pub fn dim(&self) -> usize {
        self.coupling.len()
    }

    pub fn correlation(&self, t: f64) -> Result<Complex64> {
        bath_correlation(&self.spectral_density, self.beta, t)
    }

    pub fn eta_table(&self, dt: f64, max_lag: usize) -> Result<EtaTable> {
        EtaTable::new(&self.spectral_density, self.beta, dt, max_lag)
    }
}

/// Influence-functional coefficients for a piecewise-constant path on a
/// uniform grid of width `dt`.
///
/// `η_{kk'} = ∫_{t_{k-1}}^{t_k} dt' ∫_{t_{k'-1}}^{t_{k'}} dt'' C(t' - t'')` for
/// `k > k'`, and the triangle `t'' < t'` inside one interval for `k = k'`.
/// On a uniform grid these depend only on the lag `k - k'`, so only lags
/// `0..=max_lag` are stored; larger lags are truncated.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaTable {
    dt: f64,
    by_lag: Vec<Complex64>,
}

impl EtaTable {
    pub fn new(spec: &SpectralDensity, beta: f64, dt: f64, max_lag: usize) -> Result<Self> {
        check_beta(beta)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", "must be finite and positive"));
        }
        if spec.is_trivial() {
            return Ok(Self {
                dt,
                by_lag: vec![Complex64::new(0.0, 0.0); max_lag + 1],
            });
        }
        let by_lag = (0..=max_lag)
            .into_par_iter()
            .map(|lag| {
                if lag == 0 {
                    correlation_triangle_integral(spec, beta, dt)
                } else {
                    correlation_square_integral(spec, beta, dt, lag)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dt, by_lag })
    }

    /// Table from explicit per-lag values.
    pub fn from_lags(dt: f64, by_lag: Vec<Complex64>) -> Self {
        Self { dt, by_lag }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn max_lag(&self) -> usize {
        self.by_lag.len().saturating_sub(1)
    }

    pub fn lags(&self) -> &[Complex64] {
        &self.by_lag
    }

    pub fn lag(&self, lag: usize) -> Complex64 {
        self.by_lag.get(lag).copied().unwrap_or_default()
    }

    /// `η_{kk'}` for `k ≥ k'`; zero beyond the stored memory.
    pub fn eta(&self, k: usize, k_prime: usize) -> Complex64 {
        assert!(k >= k_prime, "eta is defined for k >= k'");
        self.lag(k - k_prime)
    }
}

/// Influence functional of one bath for a path segment:
/// `exp(-Σ_{k≥k'} (s⁺_k - s⁻_k)(η_{kk'} s⁺_{k'} - η*_{kk'} s⁻_{k'}))`.
///
/// Pairs whose lag exceeds the table's memory are dropped.
pub fn influence_weight(etas: &EtaTable, s_plus: &[f64], s_minus: &[f64]) -> Complex64 {
    assert_eq!(s_plus.len(), s_minus.len());
    influence_phase(etas, s_plus, s_minus).exp()
}

/// Exponent of [`influence_weight`].
pub(crate) fn influence_phase(etas: &EtaTable, s_plus: &[f64], s_minus: &[f64]) -> Complex64 {
    let mut phase = Complex64::new(0.0, 0.0);
    for k in 0..s_plus.len() {
        let diff = s_plus[k] - s_minus[k];
        if diff == 0.0 {
            continue;
        }
        let first = k.saturating_sub(etas.max_lag());
        for kp in first..=k {
            let eta = etas.lag(k - kp);
            phase -= diff * (eta * s_plus[kp] - eta.conj() * s_minus[kp]);
        }
    }
    phase
}
