//! Persymmetric Jacobi matrices from spectra, perfect state transfer, and
//! exact certification of early state exclusion in spin chains.
//!
//! A spectrum determines a unique persymmetric Jacobi matrix. If the spectral
//! gaps pass the parity test the chain transfers a state from one end to the
//! other at `T = π/d`. Early state exclusion is a zero of the return amplitude
//! `A(t)` before `T`; for symmetric integer spectra those zeros are counted
//! exactly with Sturm sequences.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod ese;
pub mod families;
pub mod format;
pub mod poly;
pub mod reconstruct;
pub mod spectrum;
pub mod trieig;

pub use dynamics::{amplitude_series, amplitude_series_exact, verify_pst, CosineSeries, ExactCosineSeries};
pub use error::{Error, Result};
pub use ese::{cosine_to_poly, detect_ese, EseReport, Method};
pub use families::{conjecture_scan, family_ese, family_no_ese, FamilyCase, ScanRecord};
pub use poly::RatPolynomial;
pub use reconstruct::{reconstruct_general, reconstruct_symmetric, JacobiMatrix};
pub use spectrum::{normalize, to_symmetric, validate_pst, PstInfo, Spectrum, SymmetricSpectrum};
pub use trieig::eigen_tridiagonal;
