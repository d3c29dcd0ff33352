//! Numerically exact open-system dynamics that combines Feynman–Vernon
//! influence functionals for harmonic baths with Lindblad jump operators
//! and time-dependent system Hamiltonians.
//!
//! The pipeline is:
//!
//! 1. [`liouville`] builds row-major vectorized Liouvillians from a
//!    [`SystemHamiltonian`] and a set of [`JumpOperator`]s.
//! 2. [`propagator`] turns the (possibly time-dependent) Liouvillian into
//!    one forward-backward step propagator per time step.
//! 3. [`bath`] discretizes the bath response into an [`EtaTable`].
//! 4. [`path_integral`] sums over forward-backward system paths, either by
//!    brute force or by iterative finite-memory tensor propagation.
//! 5. [`ttm`] is the transfer-tensor route for time-independent problems,
//!    used as an independent cross-check.
//!
//! Units have ħ = 1 throughout.

pub mod bath;
pub mod error;
pub mod liouville;
pub mod models;
pub mod path_integral;
pub mod propagator;
pub mod quadrature;
pub mod ttm;

pub use bath::{BathSpec, EtaTable, SpectralDensity};
pub use error::{Error, Result};
pub use liouville::{
    DensityMatrix, JumpOperator, Liouvillian, Operator, SuperOperator, SystemHamiltonian,
    TimeFunction,
};
pub use path_integral::{BathSplitting, DynamicalMapSeries, PathBath, PathIntegralOptions};
pub use ttm::TransferTensorSet;

pub use num_complex::Complex64;
