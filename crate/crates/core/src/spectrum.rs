//! Eigenvalue spectra: validation, symmetric views, normalization and the
//! perfect-state-transfer gap test.
//!
//! A chain realizes PST between its end sites iff it is persymmetric and every
//! consecutive eigenvalue gap is an odd multiple of `π/T`. For integer spectra
//! the test is exact: with `d = gcd(gaps)` the spectrum is admissible iff every
//! `gap / d` is odd, and the earliest transfer time is `T = π/d`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for duplicate detection and symmetry of real spectra.
pub const SIMPLE_TOL: f64 = 1e-12;
/// Relative tolerance for commensurability of real gaps.
pub const COMMENSURABLE_TOL: f64 = 1e-9;
/// Largest denominator tried when recognising a real ratio as rational.
const MAX_DENOMINATOR: i64 = 1_000_000;
/// Every real ratio has convergents with `q²·|x − p/q| < 1`; a rational ratio
/// seen through rounding noise has one far below that.
const RATIONAL_EVIDENCE: f64 = 1e-3;
/// Integers beyond this are not representable exactly in `f64`.
const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

/// A simple, ascending spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum {
    values: Vec<f64>,
    integers: Option<Vec<i64>>,
    symmetric: bool,
}

impl Spectrum {
    /// Sorts `values` and rejects non-finite entries and near-duplicates.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SpectrumTooShort(values.len()));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        values.sort_by(f64::total_cmp);
        for pair in values.windows(2) {
            if pair[1] - pair[0] <= SIMPLE_TOL {
                return Err(Error::NonSimpleSpectrum(pair[1]));
            }
        }
        let integers = if values.iter().all(|v| v.fract() == 0.0 && v.abs() < MAX_EXACT_INT) {
            Some(values.iter().map(|&v| v as i64).collect())
        } else {
            None
        };
        let symmetric = check_symmetric(&values, integers.as_deref());
        Ok(Self { values, integers, symmetric })
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| v as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The eigenvalues as exact integers, when every one of them is integral.
    pub fn integers(&self) -> Option<&[i64]> {
        self.integers.as_deref()
    }

    pub fn is_integer(&self) -> bool {
        self.integers.is_some()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `c·S + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Spectrum> {
        if !(scale > 0.0) {
            return Err(Error::Domain(format!("scale must be positive, got {scale}")));
        }
        Spectrum::new(self.values.iter().map(|v| scale * v + shift).collect())
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn check_symmetric(values: &[f64], integers: Option<&[i64]>) -> bool {
    let n = values.len();
    match integers {
        Some(ints) => (0..n).all(|j| ints[j] == -ints[n - 1 - j]),
        None => {
            let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            (0..n).all(|j| (values[j] + values[n - 1 - j]).abs() <= SIMPLE_TOL * scale)
        }
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Spectrum::new(values)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.values
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| format!("{v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Accepts `"0,±1,±4,±5"` (also `+-` for `±`) or a JSON array of numbers.
impl FromStr for Spectrum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('[') {
            let values: Vec<f64> =
                serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
            return Spectrum::new(values);
        }
        let mut values = Vec::new();
        for token in s.split(',') {
            let token = token.trim();
            if token.is_empty() {
                return Err(Error::Parse(format!("empty entry in {s:?}")));
            }
            let (pm, rest) = if let Some(rest) = token.strip_prefix('±') {
                (true, rest)
            } else if let Some(rest) = token.strip_prefix("+-") {
                (true, rest)
            } else {
                (false, token)
            };
            let v: f64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("not a number: {token:?}")))?;
            if pm {
                values.push(-v);
                values.push(v);
            } else {
                values.push(v);
            }
        }
        Spectrum::new(values)
    }
}

/// Positive half of a spectrum symmetric about zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSpectrum {
    positive: Vec<f64>,
    includes_zero: bool,
    integers: Option<Vec<i64>>,
}

impl SymmetricSpectrum {
    /// `positive` must be strictly increasing and positive.
    pub fn new(positive: Vec<f64>, includes_zero: bool) -> Result<Self> {
        if positive.is_empty() {
            return Err(Error::SpectrumTooShort(usize::from(includes_zero)));
        }
        if positive[0] <= 0.0 {
            return Err(Error::Domain("positive part must be > 0".into()));
        }
        let full = expand(&positive, includes_zero);
        let spectrum = Spectrum::new(full)?;
        Ok(Self::from_checked(&spectrum, includes_zero))
    }

    pub fn from_integers(positive: &[i64], includes_zero: bool) -> Result<Self> {
        Self::new(positive.iter().map(|&v| v as f64).collect(), includes_zero)
    }

    fn from_checked(spectrum: &Spectrum, includes_zero: bool) -> Self {
        let n = spectrum.len();
        let start = n / 2 + usize::from(includes_zero);
        Self {
            positive: spectrum.values[start..].to_vec(),
            includes_zero,
            integers: spectrum.integers.as_ref().map(|ints| ints[start..].to_vec()),
        }
    }

    pub fn positive(&self) -> &[f64] {
        &self.positive
    }

    pub fn positive_integers(&self) -> Option<&[i64]> {
        self.integers.as_deref()
    }

    pub fn includes_zero(&self) -> bool {
        self.includes_zero
    }

    /// Matrix order `2M` or `2M + 1`.
    pub fn order(&self) -> usize {
        2 * self.positive.len() + usize::from(self.includes_zero)
    }

    pub fn to_spectrum(&self) -> Spectrum {
        Spectrum::new(expand(&self.positive, self.includes_zero))
            .expect("symmetric spectrum is simple by construction")
    }
}

fn expand(positive: &[f64], includes_zero: bool) -> Vec<f64> {
    let mut full: Vec<f64> = positive.iter().rev().map(|v| -v).collect();
    if includes_zero {
        full.push(0.0);
    }
    full.extend_from_slice(positive);
    full
}

/// Splits a symmetric spectrum into its positive part and zero flag.
pub fn to_symmetric(spectrum: &Spectrum) -> Result<SymmetricSpectrum> {
    if !spectrum.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok(SymmetricSpectrum::from_checked(spectrum, spectrum.len() % 2 == 1))
}

/// Result of the PST gap test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PstInfo {
    pub admissible: bool,
    /// Earliest transfer time `π/d` implied by the gap condition.
    pub first_time: Option<f64>,
    /// `gap_k / d`; all odd when admissible. Empty when the gaps are
    /// incommensurable.
    pub gap_multipliers: Vec<u64>,
    /// Expected `arg⟨e_N, e^{-iJT} e_0⟩`, i.e. `-λ_max·T` wrapped to `(-π, π]`.
    pub phase_hint: Option<f64>,
}

impl PstInfo {
    fn rejected(gap_multipliers: Vec<u64>) -> Self {
        Self { admissible: false, first_time: None, gap_multipliers, phase_hint: None }
    }
}

/// Decides PST admissibility from the gap structure and returns the earliest
/// transfer time.
pub fn validate_pst(spectrum: &Spectrum) -> PstInfo {
    let (unit, multipliers) = match spectrum.integers() {
        Some(ints) => {
            let gaps: Vec<u64> = ints.windows(2).map(|w| (w[1] - w[0]) as u64).collect();
            let d = gaps.iter().fold(0u64, |acc, &g| acc.gcd(&g));
            (d as f64, gaps.iter().map(|g| g / d).collect::<Vec<_>>())
        }
        None => match commensurate_gaps(&spectrum.gaps()) {
            Some(found) => found,
            None => return PstInfo::rejected(Vec::new()),
        },
    };
    if multipliers.iter().any(|q| q % 2 == 0) {
        return PstInfo::rejected(multipliers);
    }
    let time = PI / unit;
    let top = *spectrum.values().last().expect("non-empty");
    PstInfo {
        admissible: true,
        first_time: Some(time),
        gap_multipliers: multipliers,
        phase_hint: Some(wrap_phase(-top * time)),
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Writes every gap as `d·n_k` with coprime integers `n_k`, if possible.
fn commensurate_gaps(gaps: &[f64]) -> Option<(f64, Vec<u64>)> {
    let smallest = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratios: Vec<f64> = gaps.iter().map(|g| g / smallest).collect();
    let (ints, unit_factor) = common_integer_form(&ratios)?;
    let unit = smallest * unit_factor;
    let ints: Vec<u64> = ints.into_iter().map(|n| n as u64).collect();
    gaps.iter()
        .zip(&ints)
        .all(|(g, &n)| (g - unit * n as f64).abs() <= COMMENSURABLE_TOL * g)
        .then_some((unit, ints))
}

/// For real ratios `r_j`, finds coprime integers `n_j` and a factor `u` with
/// `r_j ≈ u·n_j` (relative tolerance [`COMMENSURABLE_TOL`]).
fn common_integer_form(ratios: &[f64]) -> Option<(Vec<i64>, f64)> {
    let mut fractions = Vec::with_capacity(ratios.len());
    for &r in ratios {
        fractions.push(first_convergent_within(r, COMMENSURABLE_TOL, MAX_DENOMINATOR)?);
    }
    let lcm = fractions.iter().try_fold(1i64, |acc, &(_, q)| {
        let l = acc.lcm(&q);
        (l <= MAX_DENOMINATOR * MAX_DENOMINATOR).then_some(l)
    })?;
    let scaled: Vec<i64> = fractions.iter().map(|&(p, q)| p * (lcm / q)).collect();
    let g = scaled.iter().fold(0i64, |acc, &n| acc.gcd(&n));
    if g == 0 {
        return None;
    }
    Some((scaled.iter().map(|n| n / g).collect(), g as f64 / lcm as f64))
}

/// First continued-fraction convergent `p/q`, `q ≤ max_den`, with relative
/// error `e ≤ tol` and `q²·e ≤ RATIONAL_EVIDENCE`.
fn first_convergent_within(x: f64, tol: f64, max_den: i64) -> Option<(i64, i64)> {
    if !x.is_finite() || x.abs() > 1e15 {
        return None;
    }
    let magnitude = x.abs().max(1.0);
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let err = (x - h1 as f64 / k1 as f64).abs() / magnitude;
        if err <= tol && err * (k1 as f64).powi(2) <= RATIONAL_EVIDENCE {
            return Some((h1, k1));
        }
        rest = 1.0 / (rest - a);
    }
    None
}

/// A spectrum expressed as `scale · normalized + shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    /// Centered, coprime-integer form.
    pub spectrum: Spectrum,
    pub scale: f64,
    pub shift: f64,
}

/// Removes the mean and rescales to coprime integers.
///
/// Fails with [`Error::IncommensurableGaps`] (carrying the centered form) when
/// no rational normalization exists.
pub fn normalize(spectrum: &Spectrum) -> Result<Normalized> {
    if let Some(ints) = spectrum.integers() {
        let n = ints.len() as i128;
        let sum: i128 = ints.iter().map(|&v| v as i128).sum();
        let numerators: Vec<i128> = ints.iter().map(|&v| n * v as i128 - sum).collect();
        let g = numerators.iter().fold(0i128, |acc, &x| acc.gcd(&x));
        let normalized: Vec<i64> = numerators.iter().map(|&x| (x / g) as i64).collect();
        return Ok(Normalized {
            spectrum: Spectrum::from_integers(&normalized)?,
            scale: g as f64 / n as f64,
            shift: sum as f64 / n as f64,
        });
    }
    let values = spectrum.values();
    let shift = values.iter().sum::<f64>() / values.len() as f64;
    let mut centered: Vec<f64> = values.iter().map(|v| v - shift).collect();
    let span = values[values.len() - 1] - values[0];
    for c in centered.iter_mut() {
        if c.abs() <= COMMENSURABLE_TOL * span {
            *c = 0.0;
        }
    }
    let reference = centered
        .iter()
        .filter(|c| **c != 0.0)
        .map(|c| c.abs())
        .fold(f64::INFINITY, f64::min);
    let incommensurable = || Error::IncommensurableGaps { centered: centered.clone(), shift };
    let ratios: Vec<f64> = centered.iter().map(|c| c / reference).collect();
    let (ints, factor) = common_integer_form(&ratios).ok_or_else(incommensurable)?;
    let scale = reference * factor;
    let consistent = centered
        .iter()
        .zip(&ints)
        .all(|(c, &k)| (c - scale * k as f64).abs() <= COMMENSURABLE_TOL * span);
    if !consistent || ints.iter().any(|k| (k.abs() as f64) >= MAX_EXACT_INT) {
        return Err(incommensurable());
    }
    Ok(Normalized { spectrum: Spectrum::from_integers(&ints)?, scale, shift })
}
