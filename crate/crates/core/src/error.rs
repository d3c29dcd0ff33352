use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("{what} is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { what: String, deviation: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    InvalidTrace { trace: f64 },

    #[error("bath coupling operator has off-diagonal entry of magnitude {magnitude:.3e}")]
    CouplingNotDiagonal { magnitude: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("adaptive integration step underflow at t = {t} (step {step:.3e})")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("quadrature did not converge (estimated error {error:.3e})")]
    QuadratureNonConvergence { error: f64 },

    #[error(
        "path enumeration of {paths:.3e} paths exceeds the budget of {budget:.3e}; \
         reduce the number of steps"
    )]
    PathBudgetExceeded { paths: f64, budget: f64 },

    #[error(
        "augmented tensor needs {required} bytes but the budget is {budget} bytes; \
         for d = {dim} the largest memory length that fits is {max_fitting_k_max}"
    )]
    MemoryBudgetExceeded {
        required: u128,
        budget: u128,
        dim: usize,
        max_fitting_k_max: usize,
    },

    #[error("need at least {required} dynamical maps, got {available}")]
    InsufficientMaps { required: usize, available: usize },

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),
}
