//! One-step forward-backward propagators `K(t + Δt ← t)`.
//!
//! For a static Liouvillian `K = exp(-i 𝓛 Δt)`. For a time-dependent one,
//! `dK/dt = -i 𝓛(t) K` is integrated from `K(t_start) = I` with an adaptive
//! Dormand–Prince 5(4) scheme, sampling `𝓛(t)` at the stage times so the
//! result is properly time-ordered.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::liouville::{Liouvillian, SuperOperator};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// `exp(-i 𝓛 dt)` by scaling and squaring with a Padé kernel.
pub fn propagator_static(liouvillian: &SuperOperator, dt: f64) -> Result<SuperOperator> {
    if !liouvillian.is_finite() || !dt.is_finite() {
        return Err(Error::NonFinite("Liouvillian".into()));
    }
    let scaled = liouvillian.matrix() * (MINUS_I * dt);
    let k = SuperOperator::from_matrix(liouvillian.dim(), scaled.exp())?;
    if !k.is_finite() {
        return Err(Error::NonFinite("matrix exponential".into()));
    }
    Ok(k)
}

/// Single-interval propagation request for a time-dependent Liouvillian.
#[derive(Clone, Copy, Debug)]
pub struct PropagatorRequest<'a> {
    pub liouvillian: &'a Liouvillian,
    pub t_start: f64,
    pub dt: f64,
    pub tolerance: f64,
}

impl<'a> PropagatorRequest<'a> {
    pub fn new(liouvillian: &'a Liouvillian, t_start: f64, dt: f64) -> Self {
        Self {
            liouvillian,
            t_start,
            dt,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt".into(),
                reason: "must be finite and positive".into(),
            });
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-2) {
            return Err(Error::InvalidParameter {
                name: "tolerance".into(),
                reason: "must lie in (0, 1e-2]".into(),
            });
        }
        if !self.t_start.is_finite() {
            return Err(Error::NonFinite("t_start".into()));
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type Matrix = DMatrix<Complex64>;

fn rhs(liouvillian: &Liouvillian, t: f64, k: &Matrix) -> Matrix {
    liouvillian.generator_at(t).matrix() * k
}

/// `K(t_start + dt ← t_start)` for a possibly time-dependent Liouvillian.
pub fn propagator_timedep(req: &PropagatorRequest<'_>) -> Result<SuperOperator> {
    req.validate()?;
    let d = req.liouvillian.dim();
    let n = d * d;
    let t_end = req.t_start + req.dt;
    let tol = req.tolerance;
    let min_step = req.dt * 1e-12;

    let mut t = req.t_start;
    let mut y = Matrix::identity(n, n);
    let mut f0 = rhs(req.liouvillian, t, &y);
    let norm = f0.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut h = (0.1 * tol.powf(0.2) / norm).min(req.dt);
    let mut stages: Vec<Matrix> = Vec::with_capacity(7);

    while t < t_end {
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        stages.clear();
        stages.push(f0.clone());
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in stages.iter().enumerate() {
                if A[s][j] != 0.0 {
                    ys += kj * Complex64::new(h * A[s][j], 0.0);
                }
            }
            if s == 6 {
                // FSAL: the seventh stage point is the 5th-order solution
                let f = rhs(req.liouvillian, t + h, &ys);
                stages.push(f);
                stages.push(ys);
                break;
            }
            stages.push(rhs(req.liouvillian, t + C[s] * h, &ys));
        }
        let y_new = stages.pop().expect("solution pushed above");

        let mut err = 0.0f64;
        for idx in 0..y.len() {
            let mut e = Complex64::new(0.0, 0.0);
            for (s, ks) in stages.iter().enumerate() {
                if E[s] != 0.0 {
                    e += ks[idx] * E[s];
                }
            }
            let scale = tol + tol * y[idx].norm().max(y_new[idx].norm());
            err = err.max((e * h).norm() / scale);
        }
        if !err.is_finite() {
            return Err(Error::NonFinite("time-dependent propagator".into()));
        }

        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            f0 = stages.pop().expect("FSAL stage present");
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if t < t_end && h < min_step {
            return Err(Error::StepSizeUnderflow { t, step: h });
        }
    }
    SuperOperator::from_matrix(d, y)
}

/// Step propagators `K_j = K(j dt ← (j-1) dt)` for `j = 1..=n_steps`.
///
/// A time-independent Liouvillian is exponentiated once and the result
/// repeated; otherwise each step is integrated independently.
pub fn propagator_series(
    liouvillian: &Liouvillian,
    dt: f64,
    n_steps: usize,
    tolerance: f64,
) -> Result<Vec<SuperOperator>> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter {
            name: "n_steps".into(),
            reason: "must be at least 1".into(),
        });
    }
    if liouvillian.is_time_independent() {
        PropagatorRequest::new(liouvillian, 0.0, dt)
            .with_tolerance(tolerance)
            .validate()?;
        let k = propagator_static(&liouvillian.at(0.0), dt)?;
        return Ok(vec![k; n_steps]);
    }
    (0..n_steps)
        .into_par_iter()
        .map(|j| {
            propagator_timedep(
                &PropagatorRequest::new(liouvillian, j as f64 * dt, dt).with_tolerance(tolerance),
            )
        })
        .collect()
}
