use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spectrum parse error: {0}")]
    Parse(String),

    #[error("spectrum needs at least two eigenvalues, got {0}")]
    SpectrumTooShort(usize),

    #[error("eigenvalue {0} is repeated; only simple spectra are supported")]
    NonSimpleSpectrum(f64),

    #[error("eigenvalue {0} is not finite")]
    NonFinite(f64),

    #[error("spectrum is not symmetric about zero")]
    NotSymmetric,

    #[error("spectrum is not integer valued")]
    NonIntegerSpectrum,

    /// No rational normalization exists; carries the centered-only form.
    #[error("spectral gaps are not commensurable (centered by {shift})")]
    IncommensurableGaps { centered: Vec<f64>, shift: f64 },

    #[error("spectrum does not admit perfect state transfer")]
    NotAdmissible,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid Jacobi matrix: {0}")]
    InvalidJacobi(String),

    #[error("recurrence broke down at step {step}: relative norm {norm:e}")]
    Breakdown { step: usize, norm: f64 },

    #[error("eigensolver did not converge for eigenvalue {index} within {sweeps} sweeps")]
    Convergence { index: usize, sweeps: usize },

    #[error("cosine frequency {0} is not a nonnegative integer")]
    NonIntegerFrequency(String),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(&'static str),

    #[error("interval does not isolate exactly one root ({roots} found)")]
    NotIsolating { roots: usize },

    /// The return amplitude nearly touches zero without changing sign.
    #[error("near-tangency at t = {time}: |A| = {value:e} without sign change")]
    NumericUncertain { time: f64, value: f64 },
}
