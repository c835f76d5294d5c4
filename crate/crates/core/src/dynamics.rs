//! Time evolution under a Jacobi Hamiltonian.
//!
//! For a spectrum symmetric about zero the return amplitude
//! `A(t) = ⟨e^{−iJt} e_0, e_0⟩` is real:
//!
//! ```text
//! A(t) = c_0 + Σ_k c_k cos(λ_k t),   c_k ∝ Π_{i≠k} 1/|λ_k² − λ_i²|
//! ```
//!
//! where the product runs over the nonnegative eigenvalues. General matrices
//! go through the eigendecomposition instead.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::format::fmt17;
use crate::reconstruct::{ratio_to_f64, JacobiMatrix};
use crate::spectrum::SymmetricSpectrum;
use crate::trieig::eigen_tridiagonal;

/// Fidelity deficit under which a transfer counts as perfect.
pub const PST_TOL: f64 = 1e-9;

/// `c0 + Σ c_k cos(λ_k t)` with floating coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineSeries {
    pub c0: f64,
    /// `(frequency, coefficient)`, frequencies positive and increasing.
    pub terms: Vec<(f64, f64)>,
}

impl CosineSeries {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.terms.iter().fold(self.c0, |acc, (freq, c)| acc + c * (freq * t).cos())
    }

    /// `d^k/dt^k` evaluated at `t`.
    pub fn derivative(&self, order: u32, t: f64) -> f64 {
        let base = if order == 0 { self.c0 } else { 0.0 };
        self.terms.iter().fold(base, |acc, (freq, c)| {
            let phase = freq * t + order as f64 * PI / 2.0;
            acc + c * freq.powi(order as i32) * phase.cos()
        })
    }

    /// `A(c·t)`: the series of the matrix `c·J`.
    pub fn scaled(&self, factor: f64) -> CosineSeries {
        CosineSeries {
            c0: self.c0,
            terms: self.terms.iter().map(|(f, c)| (f * factor, *c)).collect(),
        }
    }
}

pub fn evaluate(series: &CosineSeries, t: f64) -> f64 {
    series.evaluate(t)
}

/// Cosine series with exact rational coefficients and frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCosineSeries {
    pub c0: BigRational,
    pub terms: Vec<(BigRational, BigRational)>,
}

impl ExactCosineSeries {
    pub fn to_float(&self) -> CosineSeries {
        CosineSeries {
            c0: ratio_to_f64(&self.c0),
            terms: self.terms.iter().map(|(f, c)| (ratio_to_f64(f), ratio_to_f64(c))).collect(),
        }
    }

    /// Substitutes `t = θ / divisor`, dividing every frequency.
    pub fn rescale_time(&self, divisor: &BigRational) -> ExactCosineSeries {
        ExactCosineSeries {
            c0: self.c0.clone(),
            terms: self.terms.iter().map(|(f, c)| (f / divisor, c.clone())).collect(),
        }
    }

    /// `c0 + Σ c_k`, which is `A(0) = 1` for amplitude series.
    pub fn sum(&self) -> BigRational {
        self.terms.iter().fold(self.c0.clone(), |acc, (_, c)| acc + c)
    }
}

/// Return amplitude series of the persymmetric matrix with this spectrum.
pub fn amplitude_series(sp: &SymmetricSpectrum) -> CosineSeries {
    let positive = sp.positive();
    let logs: Vec<f64> = if sp.includes_zero() {
        let nodes: Vec<f64> = std::iter::once(0.0).chain(positive.iter().copied()).collect();
        (0..nodes.len()).map(|k| -log_square_gap_product(&nodes, k)).collect()
    } else {
        (0..positive.len())
            .map(|k| -positive[k].ln() - log_square_gap_product(positive, k))
            .collect()
    };
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = raw.iter().sum();
    let mut coeffs = raw.into_iter().map(|r| r / total);
    let c0 = if sp.includes_zero() { coeffs.next().expect("zero node") } else { 0.0 };
    CosineSeries { c0, terms: positive.iter().copied().zip(coeffs).collect() }
}

fn log_square_gap_product(nodes: &[f64], k: usize) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, l)| (nodes[k] * nodes[k] - l * l).abs().ln())
        .sum()
}

/// Exact version of [`amplitude_series`] for integer spectra.
pub fn amplitude_series_exact(sp: &SymmetricSpectrum) -> Result<ExactCosineSeries> {
    let positive = sp.positive_integers().ok_or(Error::NonIntegerSpectrum)?;
    let big = |v: i64| BigInt::from(v);
    let square_gap_product = |nodes: &[i64], k: usize| -> BigInt {
        nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .fold(BigInt::one(), |acc, (_, &l)| acc * (big(nodes[k]).pow(2) - big(l).pow(2)).abs())
    };
    let inverse: Vec<BigRational> = if sp.includes_zero() {
        let nodes: Vec<i64> = std::iter::once(0).chain(positive.iter().copied()).collect();
        (0..nodes.len())
            .map(|k| BigRational::new(BigInt::one(), square_gap_product(&nodes, k)))
            .collect()
    } else {
        (0..positive.len())
            .map(|k| BigRational::new(BigInt::one(), big(positive[k]) * square_gap_product(positive, k)))
            .collect()
    };
    let total = inverse.iter().fold(BigRational::zero(), |acc, v| acc + v);
    let mut coeffs = inverse.into_iter().map(|v| v / &total);
    let c0 = if sp.includes_zero() { coeffs.next().expect("zero node") } else { BigRational::zero() };
    let terms = positive
        .iter()
        .map(|&l| BigRational::from_integer(big(l)))
        .zip(coeffs)
        .collect();
    Ok(ExactCosineSeries { c0, terms })
}

/// Explicit return amplitude of the 7×7 chain with spectrum `{0, ±x, ±y, ±z}`.
pub fn amplitude_order7(x: f64, y: f64, z: f64, t: f64) -> Result<f64> {
    if !(0.0 < x && x < y && y < z) {
        return Err(Error::Domain(format!("need 0 < x < y < z, got ({x}, {y}, {z})")));
    }
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let denom = 2.0 * y2 * (z2 - x2) * (x2 - y2 + z2);
    let numer = (y2 - x2) * (z2 - x2) * (z2 - y2)
        + y2 * z2 * (z2 - y2) * (x * t).cos()
        + x2 * z2 * (z2 - x2) * (y * t).cos()
        + x2 * y2 * (y2 - x2) * (z * t).cos();
    Ok(numer / denom)
}

/// `Σ_j m_j e^{−iλ_j t}` with real weights `m_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialSeries {
    /// `(λ_j, m_j)`.
    pub terms: Vec<(f64, f64)>,
}

/// End-to-end amplitude `⟨e_N, e^{−iJt} e_0⟩`, `m_j = v_j[0]·v_j[n−1]`.
pub type TransferSeries = ExponentialSeries;

impl ExponentialSeries {
    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(lambda, m)| Complex64::from_polar(m, -lambda * t))
            .sum()
    }
}

pub fn transfer_series(j: &JacobiMatrix) -> Result<TransferSeries> {
    let decomp = eigen_tridiagonal(j)?;
    let (first, last) = decomp.boundary_components();
    Ok(ExponentialSeries {
        terms: decomp.values.iter().zip(first.iter().zip(&last)).map(|(&l, (a, b))| (l, a * b)).collect(),
    })
}

/// Return amplitude `⟨e^{−iJt} e_0, e_0⟩`, `m_j = v_j[0]²`.
pub fn return_series(j: &JacobiMatrix) -> Result<ExponentialSeries> {
    let decomp = eigen_tridiagonal(j)?;
    let (first, _) = decomp.boundary_components();
    Ok(ExponentialSeries {
        terms: decomp.values.iter().zip(&first).map(|(&l, a)| (l, a * a)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PstCheck {
    pub fidelity: f64,
    pub phase: f64,
}

impl PstCheck {
    pub fn is_perfect(&self) -> bool {
        1.0 - self.fidelity <= PST_TOL
    }
}

pub fn verify_pst(j: &JacobiMatrix, time: f64) -> Result<PstCheck> {
    let f = transfer_series(j)?.evaluate(time);
    Ok(PstCheck { fidelity: f.norm().min(1.0), phase: f.arg() })
}

/// Dense `n×n` matrix, row-major.
pub type DenseMatrix = Vec<Vec<f64>>;

fn identity(n: usize) -> DenseMatrix {
    (0..n).map(|i| (0..n).map(|k| if i == k { 1.0 } else { 0.0 }).collect()).collect()
}

fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|k| (0..n).map(|l| a[i][l] * b[l][k]).sum()).collect())
        .collect()
}

/// `J_j = Π_{i≠j} (J − λ_i I) / (λ_j − λ_i)`: the spectral projector onto
/// the `j`-th eigenvalue (ascending order).
pub fn frobenius_covariant(j: &JacobiMatrix, index: usize) -> Result<DenseMatrix> {
    let values = eigen_tridiagonal(j)?.values;
    if index >= values.len() {
        return Err(Error::Domain(format!("eigenvalue index {index} out of range")));
    }
    let n = values.len();
    let dense = j.to_dense();
    let mut acc = identity(n);
    for (i, &lambda) in values.iter().enumerate() {
        if i == index {
            continue;
        }
        let denom = values[index] - lambda;
        let mut factor = dense.clone();
        for (r, row) in factor.iter_mut().enumerate() {
            row[r] -= lambda;
            row.iter_mut().for_each(|x| *x /= denom);
        }
        acc = matmul(&acc, &factor);
    }
    Ok(acc)
}

/// One row of plot data: site-occupation probabilities at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilitySample {
    pub t: f64,
    pub p_first: f64,
    pub p_last: f64,
}

/// `|⟨e_0|ψ(t)⟩|²` and `|⟨e_N|ψ(t)⟩|²` on `points` equispaced times in
/// `[0, t_end]`, endpoints included.
pub fn probability_curves(j: &JacobiMatrix, t_end: f64, points: usize) -> Result<Vec<ProbabilitySample>> {
    if points < 2 {
        return Err(Error::Domain("need at least two grid points".into()));
    }
    let back = return_series(j)?;
    let across = transfer_series(j)?;
    Ok((0..points)
        .map(|i| {
            let t = t_end * i as f64 / (points - 1) as f64;
            ProbabilitySample { t, p_first: back.evaluate(t).norm_sqr(), p_last: across.evaluate(t).norm_sqr() }
        })
        .collect())
}

/// CSV with header `t,p_first,p_last`, 17 significant digits.
pub fn write_probability_csv<W: Write>(mut out: W, samples: &[ProbabilitySample]) -> io::Result<()> {
    writeln!(out, "t,p_first,p_last")?;
    for s in samples {
        writeln!(out, "{},{},{}", fmt17(s.t), fmt17(s.p_first), fmt17(s.p_last))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruct::reconstruct_symmetric;
    use crate::spectrum::{to_symmetric, Spectrum};

    fn sym(s: &str) -> SymmetricSpectrum {
        to_symmetric(&s.parse::<Spectrum>().unwrap()).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn coeffs(series: &ExactCosineSeries) -> Vec<BigRational> {
        std::iter::once(series.c0.clone()).chain(series.terms.iter().map(|(_, c)| c.clone())).collect()
    }

    #[test]
    fn exact_series_examples() {
        let s = amplitude_series_exact(&sym("0,±1,±2,±3")).unwrap();
        assert_eq!(coeffs(&s), vec![rat(5, 16), rat(15, 32), rat(3, 16), rat(1, 32)]);
        let s = amplitude_series_exact(&sym("0,±1,±4,±5")).unwrap();
        assert_eq!(coeffs(&s), vec![rat(27, 64), rat(30, 64), rat(5, 64), rat(2, 64)]);
        let s = amplitude_series_exact(&sym("0,±1,±6,±7")).unwrap();
        assert_eq!(coeffs(&s), vec![rat(260, 576), rat(273, 576), rat(28, 576), rat(15, 576)]);
        assert_eq!(s.sum(), rat(1, 1));
    }

    #[test]
    fn float_series_matches_exact() {
        for text in ["0,±1,±2,±3", "0,±3,±4,±5", "±1,±3", "±1,±2,±5"] {
            let sp = sym(text);
            let f = amplitude_series(&sp);
            let e = amplitude_series_exact(&sp).unwrap().to_float();
            assert!((f.c0 - e.c0).abs() < 1e-15);
            for (a, b) in f.terms.iter().zip(&e.terms) {
                assert_eq!(a.0, b.0);
                assert!((a.1 - b.1).abs() < 1e-15);
            }
            assert!((f.evaluate(0.0) - 1.0).abs() < 1e-15);
            assert!(f.terms.iter().all(|(_, c)| *c >= 0.0));
        }
    }

    #[test]
    fn even_order_series_has_no_constant() {
        let s = amplitude_series_exact(&sym("±1,±3")).unwrap();
        assert!(s.c0.is_zero());
        assert_eq!(s.sum(), rat(1, 1));
    }

    #[test]
    fn evaluate_examples() {
        let s = amplitude_series(&sym("0,±1,±2,±3"));
        assert_eq!(evaluate(&s, 0.0), 1.0);
        assert!(s.evaluate(PI).abs() < 1e-15);
        let s = amplitude_series(&sym("0,±3,±4,±5"));
        let expected = (-18.0 - 16.0 * 2f64.sqrt()) / 64.0;
        assert!((s.evaluate(PI / 4.0) - expected).abs() < 1e-15);
        assert!((expected + 0.63480).abs() < 1e-5);
    }

    #[test]
    fn order7_formula_examples() {
        assert!((amplitude_order7(1.0, 2.0, 3.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(amplitude_order7(3.0, 4.0, 5.0, PI).unwrap().abs() < 1e-15);
        let expected = (-18.0 - 16.0 * 2f64.sqrt()) / 64.0;
        assert!((amplitude_order7(3.0, 4.0, 5.0, PI / 4.0).unwrap() - expected).abs() < 1e-15);
        assert!(amplitude_order7(3.0, 3.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn derivatives_of_series() {
        let s = amplitude_series(&sym("0,±3,±4,±5"));
        // Sixth derivative at π: 25200/64.
        assert!((s.derivative(6, PI) - 25200.0 / 64.0).abs() < 1e-9);
        assert!(s.derivative(1, PI).abs() < 1e-12);
        assert!(s.derivative(3, PI).abs() < 1e-10);
    }

    #[test]
    fn transfer_examples() {
        let j = JacobiMatrix::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let f = transfer_series(&j).unwrap();
        assert!((f.evaluate(PI / 2.0).norm() - 1.0).abs() < 1e-15);
        assert!(f.evaluate(0.0).norm() < 1e-15);
        let t = 0.3;
        assert!((f.evaluate(t) - Complex64::new(0.0, -t.sin())).norm() < 1e-15);

        let j = reconstruct_symmetric(&sym("0,±1,±2,±3")).unwrap();
        let f = transfer_series(&j).unwrap();
        assert!((f.evaluate(PI).norm() - 1.0).abs() < 1e-12);
        assert!(f.evaluate(0.0).norm() < 1e-14);
    }

    #[test]
    fn verify_pst_examples() {
        let j = reconstruct_symmetric(&sym("0,±1,±2,±3")).unwrap();
        let check = verify_pst(&j, PI).unwrap();
        assert!(check.is_perfect());
        assert!((check.phase.abs() - PI).abs() < 1e-8);
        assert!(!verify_pst(&j, PI / 2.0).unwrap().is_perfect());

        let j = reconstruct_symmetric(&sym("0,±3,±4,±5")).unwrap();
        assert!(verify_pst(&j, PI).unwrap().is_perfect());
    }

    #[test]
    fn covariants() {
        let j = JacobiMatrix::new(vec![7.0], vec![]).unwrap();
        assert_eq!(frobenius_covariant(&j, 0).unwrap(), vec![vec![1.0]]);

        let j = JacobiMatrix::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let plus = frobenius_covariant(&j, 1).unwrap();
        for row in &plus {
            for x in row {
                assert!((x - 0.5).abs() < 1e-15);
            }
        }
        assert!(frobenius_covariant(&j, 2).is_err());
    }

    #[test]
    fn covariants_reproduce_return_amplitude() {
        let sp = sym("0,±1,±2,±3");
        let j = reconstruct_symmetric(&sp).unwrap();
        let values = eigen_tridiagonal(&j).unwrap().values;
        let projectors: Vec<DenseMatrix> = (0..7).map(|k| frobenius_covariant(&j, k).unwrap()).collect();
        let mut sum = vec![vec![0.0; 7]; 7];
        for p in &projectors {
            // Idempotent.
            let sq = matmul(p, p);
            for r in 0..7 {
                for c in 0..7 {
                    assert!((sq[r][c] - p[r][c]).abs() < 1e-8);
                    sum[r][c] += p[r][c];
                }
            }
        }
        for (r, row) in sum.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                assert!((x - if r == c { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
        let series = amplitude_series(&sp);
        for step in 0..=50 {
            let t = PI * step as f64 / 50.0;
            let sylvester: Complex64 = values
                .iter()
                .zip(&projectors)
                .map(|(l, p)| Complex64::from_polar(p[0][0], -l * t))
                .sum();
            assert!((sylvester - Complex64::new(series.evaluate(t), 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn csv_layout() {
        let j = reconstruct_symmetric(&sym("0,±1,±2,±3")).unwrap();
        let rows = probability_curves(&j, PI, 3).unwrap();
        let mut buf = Vec::new();
        write_probability_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,p_first,p_last");
        assert_eq!(lines.len(), 4);
        let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first[0], 0.0);
        assert!((first[1] - 1.0).abs() < 1e-12 && first[2] < 1e-12);
        assert!(rows[2].p_last > 1.0 - 1e-12);
        assert!(probability_curves(&j, PI, 1).is_err());
    }
}
