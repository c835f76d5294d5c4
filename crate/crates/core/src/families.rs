//! The two order-7 theorem families, their checkable sub-claims, and the
//! divisibility scanner over `{0, ±a, ±b, ±c}`.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::amplitude_series_exact;
use crate::error::{Error, Result};
use crate::ese::{certified_count, even_derivative_at_pi};
use crate::spectrum::SymmetricSpectrum;

/// Environment variable capping scanner threads.
pub const THREADS_ENV: &str = "PSTLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Positive part `(1, 2m, 2m+1)`: never excludes.
    NoEse,
    /// Positive part `(2m+1, 2m+2, 2m+3)`: excludes `2m` times.
    Ese,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCase {
    pub family: Family,
    pub m: u32,
    pub spectrum: SymmetricSpectrum,
    pub expected_ese: usize,
}

impl FamilyCase {
    pub fn new(family: Family, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("family index m must be at least 1".into()));
        }
        let k = i64::from(m);
        let (positive, expected_ese) = match family {
            Family::NoEse => ([1, 2 * k, 2 * k + 1], 0),
            Family::Ese => ([2 * k + 1, 2 * k + 2, 2 * k + 3], 2 * m as usize),
        };
        let spectrum = SymmetricSpectrum::from_integers(&positive, true)?;
        Ok(Self { family, m, spectrum, expected_ese })
    }

    pub fn positive(&self) -> [i64; 3] {
        let p = self.spectrum.positive_integers().expect("integer family");
        [p[0], p[1], p[2]]
    }

    /// Certified ESE count.
    pub fn certify(&self) -> Result<usize> {
        certified_count(&self.spectrum)
    }
}

pub fn family_no_ese(m: u32) -> Result<FamilyCase> {
    FamilyCase::new(Family::NoEse, m)
}

pub fn family_ese(m: u32) -> Result<FamilyCase> {
    FamilyCase::new(Family::Ese, m)
}

/// Explicit return amplitude of the no-ESE family member `m`.
pub fn no_ese_amplitude(m: u32, t: f64) -> f64 {
    let m = f64::from(m);
    let numerator = m * (1.0 + 2.0 * m) * (1.0 + 4.0 * m) * (t.cos() + 1.0)
        + m * (2.0 * m - 1.0) * (((2.0 * m + 1.0) * t).cos() + 1.0)
        + (1.0 + m) * (1.0 + 2.0 * m) * ((2.0 * m * t).cos() - 1.0);
    numerator / (16.0 * m * m * (1.0 + m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestPoint {
    pub k: u32,
    pub t: f64,
    /// Closed-form value of `A(t_k)`.
    pub predicted: f64,
}

impl TestPoint {
    pub fn predicts_positive(&self) -> bool {
        self.k % 2 == 0
    }
}

/// `t_k = kπ/(2m+2)`, `0 ≤ k ≤ 2m−1`, for the ESE family member `m`. The
/// amplitude alternates in sign across them, which forces `2m` roots.
pub fn ese_test_points(m: u32) -> Vec<TestPoint> {
    let mf = f64::from(m);
    let step = PI / (2.0 * mf + 2.0);
    let q = 2.0 * mf * mf + 4.0 * mf + 3.0;
    let p2 = (mf + 1.0) * (mf + 1.0);
    (0..2 * m)
        .map(|k| {
            let t = f64::from(k) * step;
            let predicted = if k % 2 == 0 {
                let l = f64::from(k / 2);
                0.5 * (1.0 + (l * PI / (mf + 1.0)).cos())
            } else {
                let poly = 8.0 * mf.powi(4) + 32.0 * mf.powi(3) + 36.0 * mf * mf + 8.0 * mf - 3.0;
                -(poly + 4.0 * p2 * q * t.cos()) / (8.0 * p2 * q)
            };
            TestPoint { k, t, predicted }
        })
        .collect()
}

/// Exact `A^{(6)}(π), A^{(8)}(π), A^{(10)}(π), A^{(12)}(π)`.
pub fn pi_derivatives(sp: &SymmetricSpectrum) -> Result<[BigRational; 4]> {
    let series = amplitude_series_exact(sp)?;
    Ok([
        even_derivative_at_pi(&series, 3)?,
        even_derivative_at_pi(&series, 4)?,
        even_derivative_at_pi(&series, 5)?,
        even_derivative_at_pi(&series, 6)?,
    ])
}

/// Signs (`1`, `0`, `−1`) of [`pi_derivatives`]; `[1, −1, 1, −1]` for both
/// families.
pub fn pi_derivative_signs(sp: &SymmetricSpectrum) -> Result<[i8; 4]> {
    Ok(pi_derivatives(sp)?.map(|v| sign_of(&v)))
}

fn sign_of(v: &BigRational) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// The cubic `R(x)` with `A(t) ≈ (t−π)⁶ R((t−π)²)` to twelfth order at `π`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorantReport {
    pub m: u32,
    /// `r_i = A^{(6+2i)}(π)/(6+2i)!`.
    pub coefficients: [BigRational; 4],
    /// Discriminant of `R'`, `4r₂² − 12r₁r₃`.
    pub derivative_discriminant: BigRational,
    /// The single real root of `R`.
    pub root: Option<f64>,
    /// `R((2π/(2m+1))²)`, evaluated with a rational upper bound of `π`.
    pub value_at_bound: BigRational,
    /// Every sub-claim that failed.
    pub failures: Vec<&'static str>,
}

impl MinorantReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that `R` is strictly decreasing with one positive root and stays
/// positive up to `x = (2π/(2m+1))²`, so the twelfth-order Taylor polynomial
/// has no zero in `(π − 2π/(2m+1), π)`.
pub fn taylor_minorant_check(m: u32) -> Result<MinorantReport> {
    let case = family_no_ese(m)?;
    let derivatives = pi_derivatives(&case.spectrum)?;
    let mut factorial = BigRational::one();
    let mut next = 1u32;
    let coefficients = [6u32, 8, 10, 12].map(|order| {
        while next <= order {
            factorial *= BigRational::from_integer(next.into());
            next += 1;
        }
        &derivatives[(order as usize - 6) / 2] / &factorial
    });
    let [r0, r1, r2, r3] = coefficients.clone();
    let four = BigRational::from_integer(4.into());
    let twelve = BigRational::from_integer(12.into());
    let derivative_discriminant = &four * &r2 * &r2 - &twelve * &r1 * &r3;

    let mut failures = Vec::new();
    if !derivative_discriminant.is_negative() {
        failures.push("R' has real roots");
    }
    if !r3.is_negative() {
        failures.push("leading coefficient is not negative");
    }
    if !r0.is_positive() {
        failures.push("R(0) is not positive");
    }
    let eval = |x: &BigRational| &r0 + x * (&r1 + x * (&r2 + x * &r3));

    // Rational π⁺ ≥ π: the next double above the rounded constant.
    let pi_hi = BigRational::from_float(f64::from_bits(PI.to_bits() + 1)).expect("finite");
    let width = pi_hi * BigRational::from_integer(2.into()) / BigRational::from_integer((2 * m + 1).into());
    let bound = &width * &width;
    let value_at_bound = eval(&bound);
    if !value_at_bound.is_positive() {
        failures.push("R is not positive at the bound");
    }

    let root = if failures.is_empty() { cubic_root(&coefficients) } else { None };
    if failures.is_empty() && root.is_none_or(|x| x <= 0.0) {
        failures.push("no positive root found");
    }
    Ok(MinorantReport { m, coefficients, derivative_discriminant, root, value_at_bound, failures })
}

/// Real root of a strictly decreasing cubic with positive value at zero.
fn cubic_root(c: &[BigRational; 4]) -> Option<f64> {
    let f: Vec<f64> = c.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    let eval = |x: f64| f[0] + x * (f[1] + x * (f[2] + x * f[3]));
    let (mut lo, mut hi) = (0.0, 1.0);
    while eval(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `|sin 2ms − sin (2m+1)s| ≤ 2 sin(s/2)` on `[0, 2π]`, up to `1e−12`.
pub fn sine_gap_inequality(m: u32, s: f64) -> bool {
    let m = f64::from(m);
    ((2.0 * m * s).sin() - ((2.0 * m + 1.0) * s).sin()).abs() <= 2.0 * (s / 2.0).sin() + 1e-12
}

/// One spectrum `{0, ±a, ±b, ±c}` of the divisibility scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScanRecord {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    /// `b` and `c` are multiples of `a`.
    pub divisible: bool,
    pub ese_count: usize,
    /// Divisible spectra are expected to never exclude, the rest to exclude.
    pub agrees: bool,
}

impl ScanRecord {
    pub fn new(a: i64, b: i64, c: i64, ese_count: usize) -> Self {
        let divisible = b % a == 0 && c % a == 0;
        Self { a, b, c, divisible, ese_count, agrees: divisible != (ese_count > 0) }
    }
}

/// Coprime `0 < a < b < c ≤ z_max` with `a`, `b−a`, `c−b` odd, i.e. `T = π`.
pub fn admissible_triples(z_max: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    for a in (1..=z_max).step_by(2) {
        for b in (a + 1..=z_max).step_by(2) {
            for c in (b + 1..=z_max).step_by(2) {
                if a.gcd(&b).gcd(&c) == 1 {
                    out.push((a, b, c));
                }
            }
        }
    }
    out
}

/// Thread cap from [`THREADS_ENV`]; `None` leaves the pool default.
pub fn scan_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Exact ESE counts for every admissible triple, in lexicographic order.
pub fn conjecture_scan(z_max: i64) -> Result<Vec<ScanRecord>> {
    if z_max < 3 {
        return Err(Error::Domain(format!("z_max must be at least 3, got {z_max}")));
    }
    let triples = admissible_triples(z_max);
    let work = || -> Result<Vec<ScanRecord>> {
        triples
            .par_iter()
            .map(|&(a, b, c)| {
                let sp = SymmetricSpectrum::from_integers(&[a, b, c], true)?;
                Ok(ScanRecord::new(a, b, c, certified_count(&sp)?))
            })
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(scan_threads().unwrap_or(0))
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    // `collect` keeps input order, which is already lexicographic.
    pool.install(work)
}

/// Records that disagree with the divisibility rule.
pub fn counterexamples(records: &[ScanRecord]) -> Vec<ScanRecord> {
    records.iter().filter(|r| !r.agrees).copied().collect()
}

pub fn write_scan_csv<W: Write>(mut out: W, records: &[ScanRecord]) -> io::Result<()> {
    writeln!(out, "a,b,c,divisible,ese_count,agrees")?;
    for r in records {
        writeln!(out, "{},{},{},{},{},{}", r.a, r.b, r.c, r.divisible, r.ese_count, r.agrees)?;
    }
    Ok(())
}

pub fn write_scan_json<W: Write>(mut out: W, records: &[ScanRecord]) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    writeln!(out)
}

/// `r` as `p/q`, or `p` when integral.
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::amplitude_series;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn family_members() {
        let c = family_no_ese(1).unwrap();
        assert_eq!(c.positive(), [1, 2, 3]);
        assert_eq!(c.expected_ese, 0);
        let c = family_ese(1).unwrap();
        assert_eq!(c.positive(), [3, 4, 5]);
        assert_eq!(c.expected_ese, 2);
        let c = family_ese(7).unwrap();
        assert_eq!(c.positive(), [15, 16, 17]);
        assert_eq!(c.expected_ese, 14);
        assert!(family_ese(0).is_err());
        for m in 1..6 {
            for case in [family_no_ese(m).unwrap(), family_ese(m).unwrap()] {
                let info = crate::spectrum::validate_pst(&case.spectrum.to_spectrum());
                assert_eq!(info.first_time, Some(PI));
                assert_eq!(case.certify().unwrap(), case.expected_ese);
            }
        }
    }

    #[test]
    fn explicit_amplitude_matches_series() {
        for m in [1, 2, 3, 10] {
            let series = amplitude_series(&family_no_ese(m).unwrap().spectrum);
            for i in 0..200 {
                let t = PI * f64::from(i) / 199.0;
                assert!((no_ese_amplitude(m, t) - series.evaluate(t)).abs() < 1e-12);
            }
        }
        assert!((no_ese_amplitude(1, 0.0) - 1.0).abs() < 1e-15);
        let t: f64 = 0.7;
        let case2 = (27.0 + 30.0 * t.cos() + 5.0 * (4.0 * t).cos() + 2.0 * (5.0 * t).cos()) / 64.0;
        assert!((no_ese_amplitude(2, t) - case2).abs() < 1e-15);
        let case3 = (260.0 + 273.0 * t.cos() + 28.0 * (6.0 * t).cos() + 15.0 * (7.0 * t).cos()) / 576.0;
        assert!((no_ese_amplitude(3, t) - case3).abs() < 1e-15);
    }

    #[test]
    fn test_point_values() {
        let points = ese_test_points(1);
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].predicted, 1.0);
        let expected = (-18.0 - 16.0 * 2f64.sqrt()) / 64.0;
        assert!((points[1].predicted - expected).abs() < 1e-15);
        assert!((points[1].t - PI / 4.0).abs() < 1e-15);
        assert!((ese_test_points(2)[2].predicted - 0.75).abs() < 1e-15);
        for m in 1..=12 {
            let series = amplitude_series(&family_ese(m).unwrap().spectrum);
            for p in ese_test_points(m) {
                let a = series.evaluate(p.t);
                assert!((a - p.predicted).abs() < 1e-12, "m={m} k={}", p.k);
                assert_eq!(a > 0.0, p.predicts_positive());
            }
        }
    }

    #[test]
    fn derivative_signs() {
        let sp = family_ese(1).unwrap().spectrum;
        let d = pi_derivatives(&sp).unwrap();
        assert_eq!(d[0], rat(25200, 64));
        assert_eq!(pi_derivative_signs(&sp).unwrap(), [1, -1, 1, -1]);
        assert_eq!(pi_derivative_signs(&family_no_ese(1).unwrap().spectrum).unwrap(), [1, -1, 1, -1]);
        let real = SymmetricSpectrum::new(vec![1.5, 2.0, 3.0], true).unwrap();
        assert_eq!(pi_derivative_signs(&real), Err(Error::NonIntegerSpectrum));
    }

    #[test]
    fn odd_derivatives_vanish_at_pi() {
        let series = amplitude_series(&family_ese(2).unwrap().spectrum);
        for order in [1, 3, 5, 7] {
            assert!(series.derivative(order, PI).abs() < 1e-9);
        }
    }

    #[test]
    fn minorant() {
        for m in [1, 2, 3, 4, 10] {
            let r = taylor_minorant_check(m).unwrap();
            assert!(r.holds(), "m={m}: {:?}", r.failures);
            assert!(r.coefficients[0].is_positive());
            assert!(r.root.unwrap() > 0.0);
        }
    }

    #[test]
    fn sine_inequality() {
        assert!(sine_gap_inequality(1, 0.0));
        assert!(sine_gap_inequality(1, PI));
        for m in 1..20 {
            for i in 0..=100 {
                assert!(sine_gap_inequality(m, 2.0 * PI * f64::from(i) / 100.0));
            }
        }
    }

    #[test]
    fn scan_records() {
        let triples = admissible_triples(7);
        assert!(triples.contains(&(1, 4, 7)) && triples.contains(&(3, 4, 5)));
        assert!(!triples.contains(&(3, 6, 9)) && !triples.contains(&(1, 2, 4)));
        assert!(triples.windows(2).all(|w| w[0] < w[1]));
        let records = conjecture_scan(11).unwrap();
        let find = |a, b, c| *records.iter().find(|r| (r.a, r.b, r.c) == (a, b, c)).unwrap();
        let r = find(1, 4, 7);
        assert!(r.divisible && r.ese_count == 0 && r.agrees);
        assert!(find(3, 6, 11).ese_count >= 1);
        assert!(find(3, 4, 9).ese_count >= 1);
        assert!(records.iter().all(|r| r.agrees == (r.divisible != (r.ese_count > 0))));
        assert!(conjecture_scan(2).is_err());
    }

    #[test]
    fn scan_writers() {
        let records = vec![ScanRecord::new(1, 4, 7, 0), ScanRecord::new(3, 6, 11, 2)];
        let mut csv = Vec::new();
        write_scan_csv(&mut csv, &records).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "a,b,c,divisible,ese_count,agrees\n1,4,7,true,0,true\n3,6,11,false,2,true\n"
        );
        let mut json = Vec::new();
        write_scan_json(&mut json, &records).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v[1]["ese_count"], 2);
        assert_eq!(v[0]["divisible"], true);
        assert!(counterexamples(&records).is_empty());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(rational_string(&rat(25200, 64)), "1575/4");
        assert_eq!(rational_string(&rat(-6, 3)), "-2");
        assert_eq!(rational_string(&rat(0, 5)), "0");
    }
}
