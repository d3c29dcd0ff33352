//! Hilbert- and Liouville-space objects.
//!
//! Density matrices are vectorized in row-major order: element `(i, j)` of a
//! `d x d` matrix lands at index `i * d + j`. With this convention a left
//! action `A ρ` becomes `(A ⊗ I) vec(ρ)` and a right action `ρ B` becomes
//! `(I ⊗ Bᵀ) vec(ρ)`. Column-major vectorization is deliberately not offered.
//!
//! Liouvillians are stored so that `dρ/dt = -i 𝓛 vec(ρ)` (ħ = 1).

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex operator on the system Hilbert space.
pub type Operator = DMatrix<Complex64>;

/// Absolute tolerance for Hermiticity and unit trace at construction.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn ensure_square(m: &Operator) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Largest elementwise deviation `|m_ij - conj(m_ji)|`.
pub fn hermiticity_residual(m: &Operator) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn ensure_hermitian(m: &Operator, what: &str) -> Result<usize> {
    let d = ensure_square(m)?;
    let deviation = hermiticity_residual(m);
    if deviation > CONSTRUCTION_TOL {
        return Err(Error::NotHermitian {
            what: what.to_string(),
            deviation,
        });
    }
    Ok(d)
}

fn ensure_finite(m: &Operator, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Row-major vectorization of a square matrix.
pub fn vectorize(m: &Operator) -> DVector<Complex64> {
    let d = m.nrows();
    DVector::from_fn(d * m.ncols(), |k, _| m[(k / d, k % d)])
}

/// Inverse of [`vectorize`]. The vector length must be a perfect square.
pub fn unvectorize(v: &DVector<Complex64>) -> Result<Operator> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: v.len(),
        });
    }
    Ok(Operator::from_fn(d, d, |i, j| v[i * d + j]))
}

/// `vec(I)` for a `d`-level system.
pub fn vectorized_identity(d: usize) -> DVector<Complex64> {
    DVector::from_fn(d * d, |k, _| if k / d == k % d { ONE } else { ZERO })
}

/// Reduced density matrix of the system.
///
/// [`DensityMatrix::new`] enforces Hermiticity and unit trace. States that
/// come out of a propagation are wrapped with [`DensityMatrix::from_propagated`],
/// which keeps whatever trace drift the propagation produced so it can be
/// monitored.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    elements: Operator,
}

impl DensityMatrix {
    pub fn new(elements: Operator) -> Result<Self> {
        ensure_finite(&elements, "density matrix")?;
        ensure_hermitian(&elements, "density matrix")?;
        let trace = elements.trace();
        if (trace - ONE).norm() > CONSTRUCTION_TOL {
            return Err(Error::InvalidTrace { trace: trace.re });
        }
        Ok(Self { elements })
    }

    /// Pure basis state `|k⟩⟨k|`.
    pub fn basis_state(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::InvalidParameter {
                name: "basis index".into(),
                reason: format!("{k} out of range for dimension {d}"),
            });
        }
        let mut m = Operator::zeros(d, d);
        m[(k, k)] = ONE;
        Ok(Self { elements: m })
    }

    /// Wrap the output of a propagation without re-validating it.
    pub fn from_propagated(elements: Operator) -> Self {
        Self { elements }
    }

    pub fn from_vector(v: &DVector<Complex64>) -> Result<Self> {
        Ok(Self::from_propagated(unvectorize(v)?))
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn matrix(&self) -> &Operator {
        &self.elements
    }

    pub fn into_matrix(self) -> Operator {
        self.elements
    }

    pub fn vectorize(&self) -> DVector<Complex64> {
        vectorize(&self.elements)
    }

    pub fn trace(&self) -> Complex64 {
        self.elements.trace()
    }

    pub fn population(&self, k: usize) -> f64 {
        self.elements[(k, k)].re
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.elements)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.elements)
    }
}

pub(crate) fn min_hermitian_eigenvalue(m: &Operator) -> f64 {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    herm.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Linear map on vectorized `d x d` matrices, stored as a `d² x d²` matrix.
///
/// Liouvillians, step propagators, dynamical maps and transfer tensors all
/// share this representation.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    elements: DMatrix<Complex64>,
}

impl SuperOperator {
    pub fn from_matrix(dim: usize, elements: DMatrix<Complex64>) -> Result<Self> {
        let n = dim * dim;
        if elements.nrows() != n || elements.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: elements.nrows().max(elements.ncols()),
            });
        }
        Ok(Self { dim, elements })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            elements: DMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            elements: DMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// Hilbert-space dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.elements
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.elements
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &SuperOperator) -> SuperOperator {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            elements: &self.elements * &other.elements,
        }
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.elements * v
    }

    pub fn apply_to(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_propagated(
            unvectorize(&self.apply(&rho.vectorize())).expect("square by construction"),
        )
    }

    pub fn scale(&self, factor: Complex64) -> SuperOperator {
        Self {
            dim: self.dim,
            elements: &self.elements * factor,
        }
    }

    pub fn add(&self, other: &SuperOperator) -> SuperOperator {
        Self {
            dim: self.dim,
            elements: &self.elements + &other.elements,
        }
    }

    pub fn sub(&self, other: &SuperOperator) -> SuperOperator {
        Self {
            dim: self.dim,
            elements: &self.elements - &other.elements,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.elements
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |vec(I)† A - vec(I)†|`; zero for a trace-preserving map.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        (0..n)
            .map(|col| {
                let s: Complex64 = (0..d).map(|i| self.elements[(i * d + i, col)]).sum();
                let target = if col / d == col % d { ONE } else { ZERO };
                (s - target).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max |vec(I)† A|`; zero for a generator of trace-preserving dynamics.
    pub fn trace_annihilation_residual(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|col| {
                (0..d)
                    .map(|i| self.elements[(i * d + i, col)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_residual() <= tol
    }

    /// Largest Hermiticity residual of the images of the Hermitian basis
    /// `{|i⟩⟨i|, |i⟩⟨j| + |j⟩⟨i|, i(|i⟩⟨j| - |j⟩⟨i|)}`.
    pub fn hermiticity_preservation_residual(&self) -> f64 {
        hermitian_basis(self.dim)
            .iter()
            .map(|h| hermiticity_residual(&unvectorize(&self.apply(&vectorize(h))).unwrap()))
            .fold(0.0, f64::max)
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
    pub fn choi_matrix(&self) -> Operator {
        let d = self.dim;
        let mut choi = Operator::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let image = self.elements.column(i * d + j);
                for a in 0..d {
                    for b in 0..d {
                        choi[(i * d + a, j * d + b)] = image[a * d + b];
                    }
                }
            }
        }
        choi
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.choi_matrix())
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.elements.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &SuperOperator) -> f64 {
        self.elements
            .iter()
            .zip(other.elements.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Real basis of Hermitian `d x d` matrices.
pub fn hermitian_basis(d: usize) -> Vec<Operator> {
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in i..d {
            let mut re = Operator::zeros(d, d);
            re[(i, j)] = ONE;
            re[(j, i)] = ONE;
            basis.push(re);
            if i != j {
                let mut im = Operator::zeros(d, d);
                im[(i, j)] = I;
                im[(j, i)] = -I;
                basis.push(im);
            }
        }
    }
    basis
}

/// Scalar function of time used for field envelopes and jump rates.
#[derive(Clone)]
pub enum TimeFunction {
    Constant(f64),
    /// `offset + amplitude * cos(frequency * t + phase)`
    Cosine {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl TimeFunction {
    pub fn cosine(amplitude: f64, frequency: f64) -> Self {
        TimeFunction::Cosine {
            offset: 0.0,
            amplitude,
            frequency,
            phase: 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant(c) => *c,
            TimeFunction::Cosine {
                offset,
                amplitude,
                frequency,
                phase,
            } => offset + amplitude * (frequency * t + phase).cos(),
            TimeFunction::Custom(f) => f(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            TimeFunction::Constant(_) => true,
            TimeFunction::Cosine {
                amplitude,
                frequency,
                ..
            } => *amplitude == 0.0 || *frequency == 0.0,
            TimeFunction::Custom(_) => false,
        }
    }
}

impl Default for TimeFunction {
    fn default() -> Self {
        TimeFunction::Constant(1.0)
    }
}

impl fmt::Debug for TimeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFunction::Constant(c) => write!(f, "Constant({c})"),
            TimeFunction::Cosine {
                offset,
                amplitude,
                frequency,
                phase,
            } => write!(
                f,
                "Cosine {{ offset: {offset}, amplitude: {amplitude}, frequency: {frequency}, phase: {phase} }}"
            ),
            TimeFunction::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Time-dependent term `envelope(t) * operator` of a system Hamiltonian.
#[derive(Clone, Debug)]
pub struct FieldTerm {
    pub envelope: TimeFunction,
    pub operator: Operator,
}

/// `H(t) = H_static + Σ_i envelope_i(t) V_i` with every piece Hermitian.
#[derive(Clone, Debug)]
pub struct SystemHamiltonian {
    static_part: Operator,
    field_terms: Vec<FieldTerm>,
}

impl SystemHamiltonian {
    pub fn new(static_part: Operator) -> Result<Self> {
        ensure_finite(&static_part, "Hamiltonian")?;
        ensure_hermitian(&static_part, "Hamiltonian")?;
        Ok(Self {
            static_part,
            field_terms: Vec::new(),
        })
    }

    pub fn with_field(mut self, envelope: TimeFunction, operator: Operator) -> Result<Self> {
        ensure_finite(&operator, "field operator")?;
        let d = ensure_hermitian(&operator, "field operator")?;
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d,
            });
        }
        self.field_terms.push(FieldTerm { envelope, operator });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.static_part.nrows()
    }

    pub fn static_part(&self) -> &Operator {
        &self.static_part
    }

    pub fn field_terms(&self) -> &[FieldTerm] {
        &self.field_terms
    }

    pub fn is_time_independent(&self) -> bool {
        self.field_terms
            .iter()
            .all(|f| f.envelope.is_constant() || f.operator.iter().all(|z| *z == ZERO))
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut h = self.static_part.clone();
        for term in &self.field_terms {
            let e = term.envelope.eval(t);
            if e != 0.0 {
                h += &term.operator * Complex64::new(e, 0.0);
            }
        }
        h
    }
}

/// Lindblad jump operator with a (possibly negative, possibly
/// time-dependent) rate multiplying its dissipator.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub matrix: Operator,
    pub rate: TimeFunction,
}

impl JumpOperator {
    pub fn new(matrix: Operator) -> Result<Self> {
        Self::with_rate(matrix, TimeFunction::default())
    }

    pub fn with_rate(matrix: Operator, rate: TimeFunction) -> Result<Self> {
        ensure_square(&matrix)?;
        ensure_finite(&matrix, "jump operator")?;
        Ok(Self { matrix, rate })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `H ⊗ I - I ⊗ H*` in row-major convention, i.e. `vec([H, ρ])`.
pub fn build_l0(h: &Operator) -> Result<SuperOperator> {
    let d = ensure_square(h)?;
    let id = Operator::identity(d, d);
    let m = h.kronecker(&id) - id.kronecker(&h.conjugate());
    SuperOperator::from_matrix(d, m)
}

/// Dissipative part of the Liouvillian at time `t`:
/// `i Σ_n γ_n(t) [L⊗L* - ½(L†L ⊗ I + I ⊗ LᵀL*)]`, so that
/// `-i 𝓛_D vec(ρ) = vec(Σ_n γ_n (L ρ L† - ½{L†L, ρ}))`.
pub fn build_lindbladian(dim: usize, ops: &[JumpOperator], t: f64) -> Result<SuperOperator> {
    let id = Operator::identity(dim, dim);
    let mut total = DMatrix::<Complex64>::zeros(dim * dim, dim * dim);
    for op in ops {
        if op.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.dim(),
            });
        }
        let gamma = op.rate.eval(t);
        if gamma == 0.0 {
            continue;
        }
        let l = &op.matrix;
        let l_conj = l.conjugate();
        let ldl = l.adjoint() * l;
        let ltlc = l.transpose() * &l_conj;
        let dissipator =
            l.kronecker(&l_conj) - (ldl.kronecker(&id) + id.kronecker(&ltlc)) * Complex64::new(0.5, 0.0);
        total += dissipator * (I * gamma);
    }
    SuperOperator::from_matrix(dim, total)
}

/// Full Liouvillian `𝓛(t) = 𝓛₀(t) + 𝓛_D(t)` of a system Hamiltonian plus
/// jump operators.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    hamiltonian: SystemHamiltonian,
    jumps: Vec<JumpOperator>,
}

impl Liouvillian {
    pub fn new(hamiltonian: SystemHamiltonian, jumps: Vec<JumpOperator>) -> Result<Self> {
        let d = hamiltonian.dim();
        for j in &jumps {
            if j.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: j.dim(),
                });
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &SystemHamiltonian {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    /// Same Hamiltonian with the jump operators removed.
    pub fn without_jumps(&self) -> Liouvillian {
        Self {
            hamiltonian: self.hamiltonian.clone(),
            jumps: Vec::new(),
        }
    }

    pub fn is_time_independent(&self) -> bool {
        self.hamiltonian.is_time_independent() && self.jumps.iter().all(|j| j.rate.is_constant())
    }

    pub fn has_nonnegative_rates_at(&self, t: f64) -> bool {
        self.jumps.iter().all(|j| j.rate.eval(t) >= 0.0)
    }

    pub fn hamiltonian_part(&self, t: f64) -> SuperOperator {
        build_l0(&self.hamiltonian.at(t)).expect("square by construction")
    }

    pub fn dissipative_part(&self, t: f64) -> SuperOperator {
        build_lindbladian(self.dim(), &self.jumps, t).expect("dimensions checked in new")
    }

    pub fn at(&self, t: f64) -> SuperOperator {
        self.hamiltonian_part(t).add(&self.dissipative_part(t))
    }

    /// Generator `G(t) = -i 𝓛(t)` of `d vec(ρ)/dt = G vec(ρ)`.
    pub fn generator_at(&self, t: f64) -> SuperOperator {
        self.at(t).scale(-I)
    }
}
