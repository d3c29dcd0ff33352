//! Discretized forward-backward path integral with Lindbladian step
//! propagators.
//!
//! A path is a sequence of Liouville indices `s_0, …, s_N`, each fusing the
//! forward and backward system states `(s⁺, s⁻)` into the row-major index
//! `s⁺ d + s⁻`. Its weight is
//!
//! ```text
//! vec(ρ₀)[s_0] · Π_j K_j[s_j, s_{j-1}] · Π_baths F[{s_j}]
//! ```
//!
//! where `K_j` is the one-step propagator of the full (system + jump
//! operator) Liouvillian over `[t_{j-1}, t_j]` and `F` is the Feynman–Vernon
//! influence functional.
//!
//! The bath sees a piecewise-constant system path on a half-step grid: each
//! step `[t_{j-1}, t_j]` is cut into two slots of width `dt/2`, and each slot
//! is assigned to one path point according to a [`BathSplitting`]. The
//! influence functional is then evaluated with an [`EtaTable`] of slot width
//! `dt/2`.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bath::{influence_phase, BathSpec, EtaTable};
use crate::error::{Error, Result};
use crate::liouville::{DensityMatrix, SuperOperator};

/// Default cap on the augmented tensor size.
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;
/// Default cap on the number of explicitly enumerated paths.
pub const DEFAULT_PATH_BUDGET: f64 = 2e8;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How the bath interaction time is shared between path points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BathSplitting {
    /// Point `j` is felt by the bath on `[t_j - dt/2, t_j + dt/2]` (clipped
    /// to the simulated interval). Symmetric Trotter splitting of the system
    /// step, second-order accurate in `dt`.
    #[default]
    Symmetric,
    /// Point `j ≥ 1` is felt on the step that ends at it, `[t_{j-1}, t_j]`;
    /// the initial point has no bath interaction. First-order accurate.
    Trailing,
}

impl BathSplitting {
    /// Path point that owns half-step slot `h`.
    fn owner(self, slot: usize) -> usize {
        match self {
            BathSplitting::Symmetric => slot.div_ceil(2),
            BathSplitting::Trailing => slot / 2 + 1,
        }
    }

    /// Half-step slots owned by `point` (the later one may lie in the future).
    fn slot_iter(self, point: usize) -> std::ops::Range<usize> {
        match (self, point) {
            (BathSplitting::Symmetric, 0) => 0..1,
            (BathSplitting::Symmetric, p) => 2 * p - 1..2 * p + 1,
            (BathSplitting::Trailing, 0) => 0..0,
            (BathSplitting::Trailing, p) => 2 * p - 2..2 * p,
        }
    }
}

/// One bath as seen by the path integral: the slot-level η table and the
/// diagonal of its coupling operator.
#[derive(Clone, Debug)]
pub struct PathBath {
    etas: EtaTable,
    coupling: Vec<f64>,
    memory: usize,
}

impl PathBath {
    /// Tables for time step `dt`, covering interactions between path points
    /// up to `memory` steps apart.
    pub fn new(spec: &BathSpec, dt: f64, memory: usize) -> Result<Self> {
        let etas = spec.eta_table(0.5 * dt, 2 * memory + 1)?;
        Ok(Self {
            etas,
            coupling: spec.coupling().to_vec(),
            memory,
        })
    }

    /// Wrap a precomputed slot table (slot width `dt/2`).
    pub fn from_table(etas: EtaTable, coupling: Vec<f64>) -> Self {
        let memory = etas.max_lag().saturating_sub(1) / 2;
        Self {
            etas,
            coupling,
            memory,
        }
    }

    pub fn etas(&self) -> &EtaTable {
        &self.etas
    }

    pub fn coupling(&self) -> &[f64] {
        &self.coupling
    }

    /// Largest point lag the table covers.
    pub fn memory(&self) -> usize {
        self.memory
    }

    fn is_trivial(&self) -> bool {
        self.etas.lags().iter().all(|e| *e == ZERO) || self.coupling.iter().all(|s| *s == 0.0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PathIntegralOptions {
    /// Number of past steps whose influence-functional couplings are kept.
    pub k_max: usize,
    /// Maximum bytes for the augmented tensor.
    pub memory_budget: u64,
    /// Maximum number of paths the brute-force sum may enumerate.
    pub path_budget: f64,
    pub splitting: BathSplitting,
}

impl PathIntegralOptions {
    pub fn new(k_max: usize) -> Self {
        Self {
            k_max,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            path_budget: DEFAULT_PATH_BUDGET,
            splitting: BathSplitting::default(),
        }
    }
}

/// Bytes the iterative scheme needs for `k_max` at Hilbert dimension `dim`.
pub fn augmented_tensor_bytes(dim: usize, k_max: usize) -> u128 {
    let liouville = (dim * dim) as u128;
    let entry = std::mem::size_of::<Complex64>() as u128;
    (liouville.saturating_pow(k_max as u32) + liouville.saturating_pow(k_max as u32 + 1)) * entry
}

fn check_memory_budget(dim: usize, k_max: usize, budget: u64) -> Result<()> {
    let required = augmented_tensor_bytes(dim, k_max);
    if required <= budget as u128 {
        return Ok(());
    }
    let max_fitting_k_max = (1..k_max)
        .rev()
        .find(|&k| augmented_tensor_bytes(dim, k) <= budget as u128)
        .unwrap_or(0);
    Err(Error::MemoryBudgetExceeded {
        required,
        budget: budget as u128,
        dim,
        max_fitting_k_max,
    })
}

fn check_inputs(propagators: &[SuperOperator], baths: &[PathBath], dim: usize) -> Result<()> {
    if propagators.is_empty() {
        return Err(Error::InvalidParameter {
            name: "n_steps".into(),
            reason: "need at least one step propagator".into(),
        });
    }
    for k in propagators {
        if k.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k.dim(),
            });
        }
    }
    for b in baths {
        if b.coupling.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.coupling.len(),
            });
        }
    }
    Ok(())
}

/// Forward and backward coupling values of every Liouville index.
fn liouville_couplings(coupling: &[f64]) -> Vec<(f64, f64)> {
    let d = coupling.len();
    (0..d * d).map(|s| (coupling[s / d], coupling[s % d])).collect()
}

/// Exact sum over all forward-backward paths with the full, untruncated
/// influence functional. Returns `ρ(t_n)` for `n = 1..=N`.
///
/// Every bath table must cover point lags up to `N`.
pub fn brute_force_pi(
    propagators: &[SuperOperator],
    baths: &[PathBath],
    rho0: &DensityMatrix,
    opts: &PathIntegralOptions,
) -> Result<Vec<DensityMatrix>> {
    let d = rho0.dim();
    check_inputs(propagators, baths, d)?;
    let n_steps = propagators.len();
    let liouville = d * d;
    let paths: f64 = (1..=n_steps).map(|n| (liouville as f64).powi(n as i32 + 1)).sum();
    if paths > opts.path_budget {
        return Err(Error::PathBudgetExceeded {
            paths,
            budget: opts.path_budget,
        });
    }
    for b in baths {
        if b.etas.max_lag() < 2 * n_steps + 1 {
            return Err(Error::InvalidParameter {
                name: "bath memory".into(),
                reason: format!(
                    "brute-force sum needs eta tables covering {n_steps} steps, got {}",
                    b.memory
                ),
            });
        }
    }

    let active: Vec<&PathBath> = baths.iter().filter(|b| !b.is_trivial()).collect();
    let values: Vec<Vec<(f64, f64)>> = active.iter().map(|b| liouville_couplings(&b.coupling)).collect();
    let mut walker = BruteForceWalker {
        propagators,
        active: &active,
        values: &values,
        splitting: opts.splitting,
        path: Vec::with_capacity(n_steps + 1),
        results: vec![DVector::zeros(liouville); n_steps],
        s_plus: vec![0.0; 2 * n_steps],
        s_minus: vec![0.0; 2 * n_steps],
    };
    let v0 = rho0.vectorize();
    for s0 in 0..liouville {
        if v0[s0] == ZERO {
            continue;
        }
        walker.path.push(s0);
        walker.descend(v0[s0]);
        walker.path.pop();
    }
    walker
        .results
        .iter()
        .map(DensityMatrix::from_vector)
        .collect()
}

struct BruteForceWalker<'a> {
    propagators: &'a [SuperOperator],
    active: &'a [&'a PathBath],
    values: &'a [Vec<(f64, f64)>],
    splitting: BathSplitting,
    path: Vec<usize>,
    results: Vec<DVector<Complex64>>,
    s_plus: Vec<f64>,
    s_minus: Vec<f64>,
}

impl BruteForceWalker<'_> {
    fn descend(&mut self, amplitude: Complex64) {
        let n = self.path.len() - 1;
        if n >= 1 {
            let weight = amplitude * self.influence(n);
            self.results[n - 1][self.path[n]] += weight;
        }
        if n == self.propagators.len() {
            return;
        }
        let k = self.propagators[n].matrix();
        let last = self.path[n];
        for next in 0..k.nrows() {
            let element = k[(next, last)];
            if element == ZERO {
                continue;
            }
            self.path.push(next);
            self.descend(amplitude * element);
            self.path.pop();
        }
    }

    /// Full influence functional of the path up to `t_n`.
    fn influence(&mut self, n: usize) -> Complex64 {
        let slots = 2 * n;
        let mut phase = ZERO;
        for (bath, values) in self.active.iter().zip(self.values) {
            for h in 0..slots {
                let (plus, minus) = values[self.path[self.splitting.owner(h)]];
                self.s_plus[h] = plus;
                self.s_minus[h] = minus;
            }
            phase += influence_phase(&bath.etas, &self.s_plus[..slots], &self.s_minus[..slots]);
        }
        phase.exp()
    }
}

/// Pairwise influence factor between a slot owner and a partner point,
/// `exp(-Σ_b (x⁺ - x⁻)(c y⁺ - c* y⁻))`, tabulated as `table[y * D + x]`.
struct PairFactor {
    table: Vec<Complex64>,
}

impl PairFactor {
    fn new(coefficients: &[Complex64], values: &[Vec<(f64, f64)>], liouville: usize) -> Self {
        let mut table = vec![ONE; liouville * liouville];
        for y in 0..liouville {
            for x in 0..liouville {
                let mut phase = ZERO;
                for (c, vals) in coefficients.iter().zip(values) {
                    let (xp, xm) = vals[x];
                    let (yp, ym) = vals[y];
                    phase -= (xp - xm) * (c * yp - c.conj() * ym);
                }
                table[y * liouville + x] = phase.exp();
            }
        }
        Self { table }
    }
}

/// Sum of slot-level η over the pairs (new slot owned by `owner`, slot of
/// `partner`) created when the step adding slots `new_slots` is taken.
fn pair_coefficient(
    etas: &EtaTable,
    splitting: BathSplitting,
    new_slots: [usize; 2],
    owner: usize,
    partner: usize,
) -> Complex64 {
    let mut total = ZERO;
    for h in new_slots {
        if splitting.owner(h) != owner {
            continue;
        }
        for hp in splitting.slot_iter(partner) {
            if hp <= h {
                total += etas.lag(h - hp);
            }
        }
    }
    total
}

/// Iterative finite-memory propagation of the augmented path tensor.
/// Returns `ρ(t_n)` for `n = 1..=N`.
///
/// Influence-functional couplings are kept between points inside a sliding
/// window of `k_max + 1` consecutive points; for `k_max ≥ N` the result is
/// the full path sum.
pub fn iterative_pi(
    propagators: &[SuperOperator],
    baths: &[PathBath],
    rho0: &DensityMatrix,
    opts: &PathIntegralOptions,
) -> Result<Vec<DensityMatrix>> {
    let d = rho0.dim();
    propagate_vector(propagators, baths, d, &rho0.vectorize(), opts)?
        .iter()
        .map(DensityMatrix::from_vector)
        .collect()
}

fn propagate_vector(
    propagators: &[SuperOperator],
    baths: &[PathBath],
    d: usize,
    v0: &DVector<Complex64>,
    opts: &PathIntegralOptions,
) -> Result<Vec<DVector<Complex64>>> {
    check_inputs(propagators, baths, d)?;
    let k_max = opts.k_max;
    if k_max == 0 {
        return Err(Error::InvalidParameter {
            name: "k_max".into(),
            reason: "must be at least 1".into(),
        });
    }
    check_memory_budget(d, k_max, opts.memory_budget)?;
    for b in baths {
        if b.etas.max_lag() < 2 * k_max.min(propagators.len()) + 1 {
            return Err(Error::InvalidParameter {
                name: "bath memory".into(),
                reason: format!("eta table covers {} steps, k_max is {k_max}", b.memory),
            });
        }
    }

    let liouville = d * d;
    let splitting = opts.splitting;
    let active: Vec<&PathBath> = baths.iter().filter(|b| !b.is_trivial()).collect();
    let values: Vec<Vec<(f64, f64)>> = active.iter().map(|b| liouville_couplings(&b.coupling)).collect();

    // tensor over points [lo..=n], oldest index most significant
    let mut tensor: Vec<Complex64> = v0.iter().copied().collect();
    let mut lo = 0usize;
    let mut out = Vec::with_capacity(propagators.len());

    for (n, k) in propagators.iter().enumerate() {
        let new_slots = [2 * n, 2 * n + 1];
        let window: Vec<usize> = (lo..=n).collect();
        let factor = |owner: usize, partner: usize| -> Option<PairFactor> {
            if active.is_empty() {
                return None;
            }
            let coeffs: Vec<Complex64> = active
                .iter()
                .map(|b| pair_coefficient(&b.etas, splitting, new_slots, owner, partner))
                .collect();
            if coeffs.iter().all(|c| *c == ZERO) {
                None
            } else {
                Some(PairFactor::new(&coeffs, &values, liouville))
            }
        };

        // couplings of the slot owned by the current last point
        let old_owner: Vec<(usize, PairFactor)> = window
            .iter()
            .enumerate()
            .filter_map(|(pos, &j)| factor(n, j).map(|f| (pos, f)))
            .collect();
        if !old_owner.is_empty() {
            let place = strides(window.len(), liouville);
            tensor.par_iter_mut().enumerate().for_each(|(a, entry)| {
                let x = a % liouville;
                for (pos, f) in &old_owner {
                    let y = (a / place[*pos]) % liouville;
                    *entry *= f.table[y * liouville + x];
                }
            });
        }

        // couplings of the new point
        let new_owner: Vec<(usize, PairFactor)> = window
            .iter()
            .enumerate()
            .filter_map(|(pos, &j)| factor(n + 1, j).map(|f| (pos, f)))
            .collect();
        let self_factor: Vec<Complex64> = match factor(n + 1, n + 1) {
            Some(f) => (0..liouville).map(|s| f.table[s * liouville + s]).collect(),
            None => vec![ONE; liouville],
        };

        let m = window.len();
        let place = strides(m, liouville);
        // column-major copy: kcol[last * D + next] = K[next, last]
        let kcol: Vec<Complex64> = k.matrix().iter().copied().collect();
        let mut extended = vec![ZERO; tensor.len() * liouville];
        extended
            .par_chunks_mut(liouville)
            .zip(tensor.par_iter())
            .enumerate()
            .for_each(|(a, (row, &amp))| {
                if amp == ZERO {
                    return;
                }
                let last = a % liouville;
                let column = &kcol[last * liouville..(last + 1) * liouville];
                for s in 0..liouville {
                    row[s] = amp * column[s] * self_factor[s];
                }
                for (pos, f) in &new_owner {
                    let y = (a / place[*pos]) % liouville;
                    let partner = &f.table[y * liouville..(y + 1) * liouville];
                    for s in 0..liouville {
                        row[s] *= partner[s];
                    }
                }
            });

        let mut rho = DVector::<Complex64>::zeros(liouville);
        for chunk in extended.chunks(liouville) {
            for (r, v) in rho.iter_mut().zip(chunk) {
                *r += v;
            }
        }
        if rho.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(format!("path-integral step {}", n + 1)));
        }
        out.push(rho);

        if m + 1 > k_max {
            let rest = extended.len() / liouville;
            let mut reduced = vec![ZERO; rest];
            reduced.par_iter_mut().enumerate().for_each(|(r, acc)| {
                for a0 in 0..liouville {
                    *acc += extended[a0 * rest + r];
                }
            });
            tensor = reduced;
            lo += 1;
        } else {
            tensor = extended;
        }
    }
    Ok(out)
}

/// Place values of a row-major index over `m` digits of base `base`.
fn strides(m: usize, base: usize) -> Vec<usize> {
    (0..m).map(|pos| base.pow((m - 1 - pos) as u32)).collect()
}

/// Dynamical maps `𝓔(j dt)`, `j = 1..=N`, with `𝓔(0) = I` implied.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicalMapSeries {
    pub dt: f64,
    pub maps: Vec<SuperOperator>,
}

impl DynamicalMapSeries {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.maps.first().map(SuperOperator::dim).unwrap_or(0)
    }

    /// `𝓔(n dt)`; `n = 0` gives the identity.
    pub fn map(&self, n: usize) -> SuperOperator {
        if n == 0 {
            SuperOperator::identity(self.dim())
        } else {
            self.maps[n - 1].clone()
        }
    }
}

/// Dynamical maps obtained by running [`iterative_pi`] from every matrix unit
/// `|i⟩⟨j|` and assembling the results column by column.
pub fn dynamical_maps(
    propagators: &[SuperOperator],
    baths: &[PathBath],
    dt: f64,
    opts: &PathIntegralOptions,
) -> Result<DynamicalMapSeries> {
    let d = propagators.first().map(SuperOperator::dim).ok_or_else(|| Error::InvalidParameter {
        name: "n_steps".into(),
        reason: "need at least one step propagator".into(),
    })?;
    let liouville = d * d;
    let mut columns = Vec::with_capacity(liouville);
    for unit in 0..liouville {
        let mut v0 = DVector::<Complex64>::zeros(liouville);
        v0[unit] = ONE;
        columns.push(propagate_vector(propagators, baths, d, &v0, opts)?);
    }
    let maps = (0..propagators.len())
        .map(|n| {
            let m = nalgebra::DMatrix::from_fn(liouville, liouville, |row, col| columns[col][n][row]);
            SuperOperator::from_matrix(d, m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DynamicalMapSeries { dt, maps })
}
