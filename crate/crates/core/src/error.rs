use thiserror::Error;

/// Failures raised by the numerical kernels and the observables built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dominant eigenvalue is degenerate (|l1| = {lambda1:e}, |l2| = {lambda2:e})")]
    DegenerateDominant { lambda1: f64, lambda2: f64 },

    #[error("magnitude-dominant eigenvalue {0:e} is not positive")]
    NonPositiveDominant(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NotConverged { sweeps: usize, off: f64 },

    #[error("gauge map requires x < 0, got x = {0}")]
    NotNegativeX(f64),

    #[error("chain length {len} exceeds the limit {max}")]
    ChainTooLong { len: usize, max: usize },

    #[error("chain length {0} is below the minimum of 2")]
    ChainTooShort(usize),

    #[error("site {site} outside 1..={len}")]
    SiteOutOfRange { site: usize, len: usize },

    #[error("separation {r} outside the admissible range for chain length {len}")]
    SeparationOutOfRange { r: usize, len: usize },

    #[error("correlator vanishes: only {admissible} admissible points (need {needed})")]
    CorrelatorVanishes { admissible: usize, needed: usize },

    #[error("correlator does not decay (fitted slope {0:e})")]
    NonDecaying(f64),

    #[error("string order has no plateau: relative change {0:e} between r and 2r")]
    NoPlateau(f64),

    #[error("finite-difference stencil failed at a = {at}: {source}")]
    StencilFailure { at: f64, source: Box<Error> },

    #[error("function is not unimodal on [{lo}, {hi}]")]
    NotUnimodal { lo: f64, hi: f64 },

    #[error("state carries a non-zero single-site magnetization ({0:e})")]
    Magnetized(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
