//! Symmetric tridiagonal eigensolver: implicit QL with Wilkinson shifts,
//! accumulating the rotations into the eigenvector matrix.

use crate::error::{Error, Result};
use crate::reconstruct::JacobiMatrix;

/// Iteration cap per eigenvalue.
pub const MAX_SWEEPS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[j]` is the unit eigenvector for `values[j]`; its first
    /// nonzero component is positive.
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// `(v_j[0], v_j[n−1])` for every `j`.
    pub fn boundary_components(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.values.len();
        let first = self.vectors.iter().map(|v| v[0]).collect();
        let last = self.vectors.iter().map(|v| v[n - 1]).collect();
        (first, last)
    }
}

pub fn eigen_tridiagonal(j: &JacobiMatrix) -> Result<EigenDecomposition> {
    eigen_symmetric_tridiagonal(j.diag(), j.offdiag())
}

/// Same as [`eigen_tridiagonal`] but accepts zero (or negative) couplings.
pub fn eigen_symmetric_tridiagonal(diag: &[f64], offdiag: &[f64]) -> Result<EigenDecomposition> {
    let n = diag.len();
    assert_eq!(offdiag.len() + 1, n, "tridiagonal shape mismatch");
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    // z[k][j]: component k of eigenvector j.
    let mut z = vec![vec![0.0; n]; n];
    for (k, row) in z.iter_mut().enumerate() {
        row[k] = 1.0;
    }

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::Convergence { index: l, sweeps: MAX_SWEEPS });
            }
            // Wilkinson shift from the leading 2×2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&j| d[j]).collect();
    let vectors = order
        .iter()
        .map(|&j| {
            let mut v: Vec<f64> = z.iter().map(|row| row[j]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let lead = v.iter().find(|x| x.abs() > 1e-13 * norm).copied().unwrap_or(1.0);
            let scale = lead.signum() / norm;
            v.iter_mut().for_each(|x| *x *= scale);
            v
        })
        .collect();
    Ok(EigenDecomposition { values, vectors })
}

/// `v_j[0]` and `v_j[n−1]` of every eigenvector.
pub fn boundary_components(decomp: &EigenDecomposition) -> (Vec<f64>, Vec<f64>) {
    decomp.boundary_components()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruct::{compute_weights, reconstruct_symmetric};
    use crate::spectrum::{to_symmetric, Spectrum};

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn one_by_one() {
        let e = eigen_symmetric_tridiagonal(&[5.0], &[]).unwrap();
        assert_eq!(e.values, vec![5.0]);
        assert_eq!(e.vectors, vec![vec![1.0]]);
    }

    #[test]
    fn two_by_two() {
        let j = JacobiMatrix::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let e = eigen_tridiagonal(&j).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let expected = [[H, -H], [H, H]];
        for (v, x) in e.vectors.iter().zip(expected) {
            assert!((v[0] - x[0]).abs() < 1e-15 && (v[1] - x[1]).abs() < 1e-15);
        }
        let (first, last) = e.boundary_components();
        assert!((first[0] - H).abs() < 1e-15 && (first[1] - H).abs() < 1e-15);
        assert!((last[0] + H).abs() < 1e-15 && (last[1] - H).abs() < 1e-15);
    }

    #[test]
    fn diagonal_matrix_gives_unit_vectors() {
        let e = eigen_symmetric_tridiagonal(&[3.0, -1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
        assert_eq!(e.vectors, vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);
    }

    #[test]
    fn recovers_reconstructed_spectrum() {
        let s: Spectrum = "0,±1,±2,±3".parse().unwrap();
        let j = reconstruct_symmetric(&to_symmetric(&s).unwrap()).unwrap();
        let e = eigen_tridiagonal(&j).unwrap();
        for (got, want) in e.values.iter().zip(s.values()) {
            assert!((got - want).abs() < 1e-10);
        }
        // Site-0 spectral measure equals the normalized weights.
        let measure = compute_weights(&s).measure();
        let (first, last) = e.boundary_components();
        for k in 0..7 {
            assert!((first[k] * first[k] - measure[k]).abs() < 1e-10);
            assert!((first[k].abs() - last[k].abs()).abs() < 1e-10);
        }
        let total: f64 = first.iter().map(|v| v * v).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn residual_and_orthonormality() {
        let diag = [1.0, -2.0, 0.5, 3.0, 0.0, -1.5];
        let off = [0.7, 1.1, 0.2, 2.0, 0.9];
        let j = JacobiMatrix::new(diag.to_vec(), off.to_vec()).unwrap();
        let e = eigen_tridiagonal(&j).unwrap();
        let norm = j.norm_bound();
        for (lambda, v) in e.values.iter().zip(&e.vectors) {
            let jv = j.mul_vec(v);
            let res: f64 = jv.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
            assert!(res <= 1e-10 * norm);
        }
        for a in 0..6 {
            for b in 0..6 {
                let dot: f64 = e.vectors[a].iter().zip(&e.vectors[b]).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
