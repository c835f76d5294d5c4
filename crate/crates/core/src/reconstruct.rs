//! Inverse eigenvalue problem for persymmetric Jacobi matrices.
//!
//! A persymmetric Jacobi matrix is determined by its spectrum alone. Its
//! spectral measure at site 0 is `w_j / Σ w` with
//! `w_j = Π_{i≠j} 1/|λ_j − λ_i|`, and the entries follow from the monic
//! orthogonal polynomials of that measure:
//!
//! ```text
//! p_i(t) = (t − a_i) p_{i−1}(t) − b_{i−1}² p_{i−2}(t)
//! a_i    = ⟨t p_{i−1}, p_{i−1}⟩_w / ‖p_{i−1}‖²_w
//! b_i    = ‖p_i‖_w / ‖p_{i−1}‖_w
//! ```
//!
//! Polynomials are carried as their values at the eigenvalues
//! ([`NodalPolynomial`]), so inner products are plain weighted sums.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{Spectrum, SymmetricSpectrum};

/// Relative size (against the spectral span) below which a new recurrence
/// direction is considered numerically lost.
pub const BREAKDOWN_TOL: f64 = 1e-13;
/// Tolerance for the persymmetry check on reconstructed matrices.
pub const PERSYMMETRY_TOL: f64 = 1e-12;

/// Real symmetric tridiagonal matrix with positive couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct JacobiMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<MatrixJson> for JacobiMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        if m.n != m.a.len() {
            return Err(Error::InvalidJacobi(format!("n = {} but {} diagonal entries", m.n, m.a.len())));
        }
        JacobiMatrix::new(m.a, m.b)
    }
}

impl From<JacobiMatrix> for MatrixJson {
    fn from(j: JacobiMatrix) -> Self {
        MatrixJson { n: j.diag.len(), a: j.diag, b: j.offdiag }
    }
}

impl JacobiMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidJacobi("empty diagonal".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidJacobi(format!(
                "{} diagonal entries need {} couplings, got {}",
                diag.len(),
                diag.len() - 1,
                offdiag.len()
            )));
        }
        if diag.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidJacobi("non-finite diagonal entry".into()));
        }
        if let Some(b) = offdiag.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::InvalidJacobi(format!("coupling {b} is not positive")));
        }
        Ok(Self { diag, offdiag })
    }

    /// Zero-diagonal matrix with the given couplings.
    pub fn from_couplings(offdiag: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0; offdiag.len() + 1], offdiag)
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// `max |a_i − a_{n+1−i}|, |b_i − b_{n−i}|`.
    pub fn persymmetry_residual(&self) -> f64 {
        let n = self.diag.len();
        let a = (0..n).map(|i| (self.diag[i] - self.diag[n - 1 - i]).abs());
        let m = self.offdiag.len();
        let b = (0..m).map(|i| (self.offdiag[i] - self.offdiag[m - 1 - i]).abs());
        a.chain(b).fold(0.0, f64::max)
    }

    pub fn is_persymmetric(&self) -> bool {
        let scale = self.norm_bound().max(1.0);
        self.persymmetry_residual() <= PERSYMMETRY_TOL * scale
    }

    /// `c·J + λ·I`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(
            self.diag.iter().map(|a| scale * a + shift).collect(),
            self.offdiag.iter().map(|b| scale * b).collect(),
        )
    }

    /// Gershgorin bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiag[i - 1] } else { 0.0 };
                let right = if i + 1 < n { self.offdiag[i] } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.diag.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.offdiag[i];
                m[i + 1][i] = self.offdiag[i];
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

/// Spectral weights `w_j = Π_{i≠j} 1/|λ_j − λ_i|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub nodes: Vec<f64>,
    pub w: Vec<f64>,
}

impl Weights {
    /// `w_j / Σ w`, evaluated in log space so that wide spectra neither
    /// overflow nor underflow.
    pub fn measure(&self) -> Vec<f64> {
        let logs: Vec<f64> = (0..self.nodes.len()).map(|j| log_weight(&self.nodes, j)).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let unnormalized: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = unnormalized.iter().sum();
        unnormalized.iter().map(|u| u / total).collect()
    }
}

fn log_weight(nodes: &[f64], j: usize) -> f64 {
    -nodes
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, l)| (nodes[j] - l).abs().ln())
        .sum::<f64>()
}

pub fn compute_weights(spectrum: &Spectrum) -> Weights {
    let nodes = spectrum.values().to_vec();
    let w = (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, l)| 1.0 / (nodes[j] - l).abs())
                .product()
        })
        .collect();
    Weights { nodes, w }
}

/// Exact weights of an integer spectrum.
pub fn compute_weights_exact(spectrum: &Spectrum) -> Result<Vec<BigRational>> {
    let ints = spectrum.integers().ok_or(Error::NonIntegerSpectrum)?;
    Ok((0..ints.len())
        .map(|j| {
            let denom = ints
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .fold(BigInt::from(1), |acc, (_, &l)| acc * BigInt::from((ints[j] - l).abs()));
            BigRational::new(BigInt::from(1), denom)
        })
        .collect())
}

/// A polynomial represented by its values at the spectral nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalPolynomial {
    pub values: Vec<f64>,
    pub degree: usize,
}

impl NodalPolynomial {
    pub fn constant(n: usize) -> Self {
        Self { values: vec![1.0; n], degree: 0 }
    }

    /// `⟨self, other⟩` under the discrete measure `measure`.
    pub fn inner(&self, other: &NodalPolynomial, measure: &[f64]) -> f64 {
        self.values.iter().zip(&other.values).zip(measure).map(|((f, g), w)| f * g * w).sum()
    }

    pub fn norm(&self, measure: &[f64]) -> f64 {
        self.inner(self, measure).sqrt()
    }
}

/// Reconstructs the unique persymmetric Jacobi matrix with this spectrum.
pub fn reconstruct_general(spectrum: &Spectrum) -> Result<JacobiMatrix> {
    let measure = compute_weights(spectrum).measure();
    let (a, b) = stieltjes(spectrum.values(), &measure, false)?;
    JacobiMatrix::new(a, b)
}

/// Zero-diagonal reconstruction for spectra symmetric about zero: the
/// recurrence reduces to `p_i(t) = t·p_{i−1}(t) − b_{i−1}² p_{i−2}(t)`.
pub fn reconstruct_symmetric(sp: &SymmetricSpectrum) -> Result<JacobiMatrix> {
    let spectrum = sp.to_spectrum();
    let measure = compute_weights(&spectrum).measure();
    let (a, b) = stieltjes(spectrum.values(), &measure, true)?;
    JacobiMatrix::new(a, b)
}

/// Discretized Stieltjes procedure on orthonormalized nodal polynomials.
///
/// Each new polynomial is re-orthogonalized against all previous ones; in
/// exact arithmetic that projection is zero, in floating point it keeps the
/// recurrence accurate up to order ~100.
fn stieltjes(nodes: &[f64], measure: &[f64], zero_diagonal: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = nodes.len();
    let span = nodes[n - 1] - nodes[0];
    let mut diag = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n.saturating_sub(1));
    let mut basis: Vec<NodalPolynomial> = vec![NodalPolynomial::constant(n)];

    for i in 0..n {
        let current = &basis[i];
        let shifted = NodalPolynomial {
            values: current.values.iter().zip(nodes).map(|(p, t)| t * p).collect(),
            degree: current.degree + 1,
        };
        let a = if zero_diagonal { 0.0 } else { shifted.inner(current, measure) };
        diag.push(a);
        if i + 1 == n {
            break;
        }
        let mut next = shifted;
        for (k, value) in next.values.iter_mut().enumerate() {
            *value -= a * current.values[k];
            if i > 0 {
                *value -= offdiag[i - 1] * basis[i - 1].values[k];
            }
        }
        for _ in 0..2 {
            for prev in &basis {
                let proj = next.inner(prev, measure);
                for (v, p) in next.values.iter_mut().zip(&prev.values) {
                    *v -= proj * p;
                }
            }
        }
        let b = next.norm(measure);
        if !(b > BREAKDOWN_TOL * span) {
            return Err(Error::Breakdown { step: i + 1, norm: b / span });
        }
        next.values.iter_mut().for_each(|v| *v /= b);
        offdiag.push(b);
        basis.push(next);
    }
    Ok((diag, offdiag))
}

/// Jacobi entries in exact arithmetic: `a_i` and `b_i²` are rational for
/// integer spectra even when `b_i` is not.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactJacobi {
    pub diag: Vec<BigRational>,
    pub offdiag_squared: Vec<BigRational>,
}

impl ExactJacobi {
    pub fn to_float(&self) -> Result<JacobiMatrix> {
        JacobiMatrix::new(
            self.diag.iter().map(ratio_to_f64).collect(),
            self.offdiag_squared.iter().map(|b2| ratio_to_f64(b2).sqrt()).collect(),
        )
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a scaled division for very large numerators/denominators.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// The monic recurrence carried out over the rationals.
pub fn reconstruct_exact(spectrum: &Spectrum) -> Result<ExactJacobi> {
    let ints = spectrum.integers().ok_or(Error::NonIntegerSpectrum)?;
    let nodes: Vec<BigRational> = ints.iter().map(|&v| BigRational::from_integer(v.into())).collect();
    let w = compute_weights_exact(spectrum)?;
    let n = nodes.len();
    let inner = |f: &[BigRational], g: &[BigRational]| -> BigRational {
        (0..n).fold(BigRational::zero(), |acc, j| acc + &f[j] * &g[j] * &w[j])
    };

    let mut diag = Vec::with_capacity(n);
    let mut offdiag_squared: Vec<BigRational> = Vec::with_capacity(n - 1);
    let mut prev: Vec<BigRational> = vec![BigRational::zero(); n];
    let mut current: Vec<BigRational> = vec![BigRational::from_integer(1.into()); n];
    let mut current_norm = inner(&current, &current);
    for i in 0..n {
        let shifted: Vec<BigRational> = current.iter().zip(&nodes).map(|(p, t)| p * t).collect();
        let a = inner(&shifted, &current) / &current_norm;
        diag.push(a.clone());
        if i + 1 == n {
            break;
        }
        let next: Vec<BigRational> = (0..n)
            .map(|k| {
                let mut v = &shifted[k] - &a * &current[k];
                if i > 0 {
                    v -= &offdiag_squared[i - 1] * &prev[k];
                }
                v
            })
            .collect();
        let next_norm = inner(&next, &next);
        if !next_norm.is_positive() {
            return Err(Error::Breakdown { step: i + 1, norm: 0.0 });
        }
        offdiag_squared.push(&next_norm / &current_norm);
        prev = std::mem::replace(&mut current, next);
        current_norm = next_norm;
    }
    Ok(ExactJacobi { diag, offdiag_squared })
}

/// Couplings `(b1, b2, b3)` of the 7×7 persymmetric matrix with spectrum
/// `{0, ±x, ±y, ±z}`.
pub fn closed_form_7x7(x: f64, y: f64, z: f64) -> Result<[f64; 3]> {
    if !(0.0 < x && x < y && y < z) {
        return Err(Error::Domain(format!("need 0 < x < y < z, got ({x}, {y}, {z})")));
    }
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let d = x2 - y2 + z2;
    Ok([x * z / d.sqrt(), ((y2 - x2) * (z2 - y2) / d).sqrt(), (d / 2.0).sqrt()])
}

/// Squared couplings of [`closed_form_7x7`] for integer `x < y < z`.
pub fn closed_form_7x7_squared(x: i64, y: i64, z: i64) -> Result<[BigRational; 3]> {
    if !(0 < x && x < y && y < z) {
        return Err(Error::Domain(format!("need 0 < x < y < z, got ({x}, {y}, {z})")));
    }
    let r = |v: i64| BigRational::from_integer(BigInt::from(v));
    let (x2, y2, z2) = (r(x * x), r(y * y), r(z * z));
    let d = &x2 - &y2 + &z2;
    Ok([
        &x2 * &z2 / &d,
        (&y2 - &x2) * (&z2 - &y2) / &d,
        &d / r(2),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::to_symmetric;

    fn parse(s: &str) -> Spectrum {
        s.parse().unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn weights_examples() {
        let w = compute_weights(&parse("-1,1"));
        assert_eq!(w.w, vec![0.5, 0.5]);
        let w = compute_weights(&parse("0,1,2"));
        assert_eq!(w.w, vec![0.5, 1.0, 0.5]);
        let w = compute_weights(&parse("0,±1,±2,±3"));
        assert!((w.w[6] - 1.0 / 720.0).abs() < 1e-18);
        assert!(w.w.iter().all(|&x| x > 0.0));

        let exact = compute_weights_exact(&parse("0,±1,±2,±3")).unwrap();
        assert_eq!(exact[6], rat(1, 720));
        assert_eq!(exact[3], rat(1, 36));
    }

    #[test]
    fn measure_is_normalized_weights() {
        let w = compute_weights(&parse("0,1,2"));
        assert_eq!(w.measure(), vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn reconstruct_three_point_example() {
        let j = reconstruct_general(&parse("0,1,2")).unwrap();
        for a in j.diag() {
            assert!((a - 1.0).abs() < 1e-14);
        }
        for b in j.offdiag() {
            assert!((b - 0.5f64.sqrt()).abs() < 1e-14);
        }
        let exact = reconstruct_exact(&parse("0,1,2")).unwrap();
        assert_eq!(exact.diag, vec![rat(1, 1); 3]);
        assert_eq!(exact.offdiag_squared, vec![rat(1, 2); 2]);
    }

    #[test]
    fn reconstruct_two_by_two() {
        let j = reconstruct_general(&parse("-1,1")).unwrap();
        assert_eq!(j.diag(), &[0.0, 0.0]);
        assert!((j.offdiag()[0] - 1.0).abs() < 1e-15);
        let j = reconstruct_symmetric(&to_symmetric(&parse("±1")).unwrap()).unwrap();
        assert_eq!(j.offdiag(), &[1.0]);
    }

    #[test]
    fn symmetric_reconstruction_matches_closed_form() {
        let j = reconstruct_symmetric(&to_symmetric(&parse("0,±1,±2,±3")).unwrap()).unwrap();
        let expected = [1.224745, 1.581139, 1.732051, 1.732051, 1.581139, 1.224745];
        for (b, e) in j.offdiag().iter().zip(expected) {
            assert!((b - e).abs() < 5e-7, "{b} vs {e}");
        }
        assert!(j.diag().iter().all(|&a| a == 0.0));

        let j = reconstruct_symmetric(&to_symmetric(&parse("0,±3,±4,±5")).unwrap()).unwrap();
        let b = j.offdiag();
        assert!((b[0] - 5.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((b[1] - 3.5f64.sqrt()).abs() < 1e-12);
        assert!((b[2] - 3.0).abs() < 1e-12);
        assert!(j.persymmetry_residual() < 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        let [b1, b2, b3] = closed_form_7x7(1.0, 2.0, 3.0).unwrap();
        assert!((b1 - 3.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((b2 - 2.5f64.sqrt()).abs() < 1e-15);
        assert!((b3 - 3f64.sqrt()).abs() < 1e-15);
        let [b1, b2, b3] = closed_form_7x7(3.0, 4.0, 5.0).unwrap();
        assert!((b1 - 15.0 / 18f64.sqrt()).abs() < 1e-14);
        assert!((b2 - (63.0f64 / 18.0).sqrt()).abs() < 1e-14);
        assert!((b3 - 3.0).abs() < 1e-15);
        assert!(matches!(closed_form_7x7(2.0, 1.0, 3.0), Err(Error::Domain(_))));
        assert!(matches!(closed_form_7x7(0.0, 1.0, 3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn exact_squares_match_closed_form() {
        for (x, y, z) in [(1, 2, 3), (3, 4, 5), (1, 4, 7), (3, 6, 11)] {
            let s = SymmetricSpectrum::from_integers(&[x, y, z], true).unwrap().to_spectrum();
            let exact = reconstruct_exact(&s).unwrap();
            let [b1, b2, b3] = closed_form_7x7_squared(x, y, z).unwrap();
            assert!(exact.diag.iter().all(|a| a.is_zero()));
            assert_eq!(exact.offdiag_squared, vec![b1.clone(), b2.clone(), b3.clone(), b3, b2, b1]);
        }
    }

    #[test]
    fn general_diagonal_for_shifted_spectrum() {
        let j = reconstruct_general(&parse("0,±1,±2,±3").affine(1.0, 2.5).unwrap()).unwrap();
        assert!(j.diag().iter().all(|a| (a - 2.5).abs() < 1e-12));
        assert!(j.is_persymmetric());
    }

    #[test]
    fn breakdown_on_degenerate_measure() {
        let r = stieltjes(&[0.0, 1.0, 2.0], &[0.5, 0.5, 0.0], false);
        assert!(matches!(r, Err(Error::Breakdown { step: 2, .. })), "{r:?}");
        // Close nodes alone do not break the recurrence.
        assert!(reconstruct_general(&Spectrum::new(vec![0.0, 2e-12, 1e3]).unwrap()).is_ok());
    }

    #[test]
    fn jacobi_validation_and_json() {
        assert!(JacobiMatrix::new(vec![0.0, 0.0], vec![-1.0]).is_err());
        assert!(JacobiMatrix::new(vec![0.0, 0.0], vec![]).is_err());
        let j = JacobiMatrix::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(text, r#"{"n":2,"a":[0.0,0.0],"b":[1.0]}"#);
        let back: JacobiMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, j);
        assert!(serde_json::from_str::<JacobiMatrix>(r#"{"n":3,"a":[0,0],"b":[1]}"#).is_err());
    }
}
