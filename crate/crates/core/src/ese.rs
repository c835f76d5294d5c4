//! Early-state-exclusion detection.
//!
//! The return amplitude of a symmetric integer spectrum is a cosine
//! polynomial with integer frequencies, so `A(t) = P(cos t)` for a polynomial
//! `P` with rational coefficients. Zeros of `A` on `(0, T)` correspond one to
//! one with zeros of `P` on the matching `x`-interval, which Sturm sequences
//! count exactly. Spectra without that structure fall back to a sign scan.

use std::f64::consts::PI;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::dynamics::{amplitude_series, amplitude_series_exact, ExactCosineSeries};
use crate::error::{Error, Result};
use crate::poly::{rational_from_f64, rational_to_f64, Isolated, RatPolynomial, RootCounter, SturmSequence};
use crate::reconstruct::compute_weights;
use crate::spectrum::{normalize, to_symmetric, validate_pst, Spectrum, SymmetricSpectrum};

/// Grid resolution of the numeric fallback.
pub const SCAN_POINTS: usize = 10_000;
/// Target width of refined root times in the numeric fallback.
pub const SCAN_TIME_TOL: f64 = 1e-10;
/// `|A|` below this without a sign change is a near-tangency.
pub const TANGENCY_TOL: f64 = 1e-9;
/// Target width in `x = cos t` for exact refinement.
pub const ROOT_X_TOL: f64 = 1e-12;

/// `P` with `P(cos t) = c0 + Σ c_k cos(λ_k t)`, via `cos(n t) = T_n(cos t)`.
pub fn cosine_to_poly(series: &ExactCosineSeries) -> Result<RatPolynomial> {
    let mut frequencies = Vec::with_capacity(series.terms.len());
    for (freq, _) in &series.terms {
        if !freq.is_integer() || freq.numer().sign() == Sign::Minus {
            return Err(Error::NonIntegerFrequency(freq.to_string()));
        }
        let n = freq.to_integer().to_usize().ok_or_else(|| Error::NonIntegerFrequency(freq.to_string()))?;
        frequencies.push(n);
    }
    let top = frequencies.iter().copied().max().unwrap_or(0);
    let cheb = RatPolynomial::chebyshev_t_up_to(top);
    let mut poly = RatPolynomial::constant(series.c0.clone());
    for (&n, (_, c)) in frequencies.iter().zip(&series.terms) {
        poly = &poly + &cheb[n].scale(c);
    }
    Ok(poly)
}

/// Order of the zero of `P` at `x = −1`, i.e. at `t = π`.
pub fn multiplicity_at_minus_one(p: &RatPolynomial) -> usize {
    p.root_multiplicity(&-BigRational::one())
}

/// Distinct roots of `P` strictly inside `(lo, hi)`.
pub fn count_roots_open_interval(p: &RatPolynomial, lo: &BigRational, hi: &BigRational) -> Result<usize> {
    crate::poly::count_roots_open_interval(p, lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedRoot {
    pub x_lo: f64,
    pub x_hi: f64,
    pub x: f64,
    /// `arccos x ∈ (0, π)`.
    pub tau: f64,
}

/// Bisects the single root of `P` in `[lo, hi]` down to `1e−12` in `x`.
pub fn refine_root(p: &RatPolynomial, lo: &BigRational, hi: &BigRational) -> Result<RefinedRoot> {
    if p.is_zero() {
        return Err(Error::InvalidPolynomial("zero polynomial has no isolated roots"));
    }
    if lo > hi {
        return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
    }
    let at_lo = p.eval(lo).is_zero();
    let at_hi = p.eval(hi).is_zero();
    let inside = if lo < hi { RootCounter::new(p, lo, hi).total() } else { 0 };
    let roots = inside + usize::from(at_lo) + usize::from(at_hi && lo != hi);
    if roots != 1 {
        return Err(Error::NotIsolating { roots });
    }
    let (a, b) = if at_lo {
        (lo.clone(), lo.clone())
    } else if at_hi {
        (hi.clone(), hi.clone())
    } else {
        let counter = RootCounter::new(p, lo, hi);
        counter.refine(&Isolated::Interval(lo.clone(), hi.clone()), |a, b| b - a <= ROOT_X_TOL)
    };
    let (x_lo, x_hi) = (rational_to_f64(&a), rational_to_f64(&b));
    let x = rational_to_f64(&((&a + &b) / BigRational::from_integer(2.into())));
    Ok(RefinedRoot { x_lo, x_hi, x, tau: x.clamp(-1.0, 1.0).acos() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "exact-sturm")]
    ExactSturm,
    #[serde(rename = "numeric-scan")]
    NumericScan,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactSturm => "exact-sturm",
            Method::NumericScan => "numeric-scan",
        }
    }
}

/// One exclusion event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EseRoot {
    /// Isolating interval in `t`.
    pub lo: f64,
    pub hi: f64,
    pub tau: f64,
    /// Multiplicity as a zero of `A`; even values mark tangential zeros.
    #[serde(skip)]
    pub multiplicity: usize,
}

impl EseRoot {
    pub fn is_tangential(&self) -> bool {
        self.multiplicity % 2 == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EseReport {
    pub spectrum: Vec<f64>,
    pub pst_time: f64,
    pub method: Method,
    pub count: usize,
    /// Increasing in `tau`.
    pub roots: Vec<EseRoot>,
}

impl Serialize for EseReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            spectrum: &'a [f64],
            #[serde(rename = "T")]
            pst_time: f64,
            method: Method,
            count: usize,
            roots: &'a [EseRoot],
        }
        Wire {
            spectrum: &self.spectrum,
            pst_time: self.pst_time,
            method: self.method,
            count: self.count,
            roots: &self.roots,
        }
        .serialize(serializer)
    }
}

/// `A` in the variable `x = cos θ`, `θ = σ·t` for the coprime integer form of
/// a symmetric spectrum.
#[derive(Debug, Clone)]
pub struct ExactAmplitude {
    pub poly: RatPolynomial,
    /// Time substitution `θ = sigma · t_normalized`.
    pub sigma: BigRational,
    /// Lower end of the `x`-range: `−1` (odd order) or `0` (even order).
    pub x_lo: BigRational,
    /// Upper end of the `θ`-range: `π` or `π/2`.
    pub theta_max: f64,
}

impl ExactAmplitude {
    /// For a symmetric integer spectrum in coprime form.
    pub fn new(sp: &SymmetricSpectrum) -> Result<Self> {
        let full = sp.to_spectrum();
        let ints = full.integers().ok_or(Error::NonIntegerSpectrum)?;
        let info = validate_pst(&full);
        if !info.admissible {
            return Err(Error::NotAdmissible);
        }
        let d = ints.windows(2).fold(0i64, |acc, w| acc.gcd(&(w[1] - w[0])));
        let (sigma, x_lo, theta_max) = if sp.includes_zero() {
            (BigRational::from_integer(d.into()), -BigRational::one(), PI)
        } else {
            (BigRational::new(d.into(), 2.into()), BigRational::zero(), PI / 2.0)
        };
        let series = amplitude_series_exact(sp)?.rescale_time(&sigma);
        let poly = cosine_to_poly(&series)?;
        Ok(Self { poly, sigma, x_lo, theta_max })
    }

    fn counter(&self) -> RootCounter {
        RootCounter::new(&self.poly, &self.x_lo, &BigRational::one())
    }

    /// Certified number of distinct zeros of `A` on `(0, T)`.
    pub fn count(&self) -> usize {
        self.counter().total()
    }
}

/// Certified ESE count of a symmetric integer spectrum, without isolating
/// the roots.
pub fn certified_count(sp: &SymmetricSpectrum) -> Result<usize> {
    let normalized = normalize(&sp.to_spectrum())?;
    let sym = to_symmetric(&normalized.spectrum)?;
    Ok(ExactAmplitude::new(&sym)?.count())
}

/// Counts and locates the zeros of the return amplitude on `(0, T)`.
pub fn detect_ese(spectrum: &Spectrum) -> Result<EseReport> {
    let info = validate_pst(spectrum);
    let pst_time = info.first_time.filter(|_| info.admissible).ok_or(Error::NotAdmissible)?;
    match normalize(spectrum) {
        Ok(normalized) if normalized.spectrum.is_symmetric() => {
            let sym = to_symmetric(&normalized.spectrum)?;
            let mut report = detect_exact(&sym, normalized.scale)?;
            report.spectrum = spectrum.values().to_vec();
            report.pst_time = pst_time;
            Ok(report)
        }
        _ => scan_ese_numeric(spectrum),
    }
}

fn detect_exact(sym: &SymmetricSpectrum, scale: f64) -> Result<EseReport> {
    let amplitude = ExactAmplitude::new(sym)?;
    let counter = amplitude.counter();
    let degree = amplitude.poly.degree().unwrap_or(0);
    let grid = (8 * degree).max(64);
    let candidates: Vec<BigRational> = (1..grid)
        .map(|i| rational_from_f64((amplitude.theta_max * i as f64 / grid as f64).cos()))
        .collect();
    let isolated = counter.isolate(&candidates);
    let sigma = rational_to_f64(&amplitude.sigma);
    let to_time = |x: f64| x.clamp(-1.0, 1.0).acos() / sigma / scale;

    let repeated = counter.repeated_part();
    let mut roots: Vec<EseRoot> = isolated
        .iter()
        .map(|iso| {
            let (a, b) = counter.refine(iso, |a, b| b - a <= ROOT_X_TOL && a.acos() - b.acos() <= 1e-12);
            let mid = (&a + &b) / BigRational::from_integer(2.into());
            let multiplicity = match iso {
                Isolated::Exact(x) => amplitude.poly.root_multiplicity(x),
                Isolated::Interval(lo, hi) => 1 + repeated_multiplicity(repeated, lo, hi),
            };
            EseRoot {
                lo: to_time(rational_to_f64(&b)),
                hi: to_time(rational_to_f64(&a)),
                tau: to_time(rational_to_f64(&mid)),
                multiplicity,
            }
        })
        .collect();
    roots.sort_by(|p, q| p.tau.total_cmp(&q.tau));
    let full = sym.to_spectrum();
    Ok(EseReport {
        spectrum: full.values().iter().map(|v| v * scale).collect(),
        pst_time: amplitude.theta_max / sigma / scale,
        method: Method::ExactSturm,
        count: roots.len(),
        roots,
    })
}

/// Extra multiplicity of the single root inside `(lo, hi)`, read off the
/// repeated part `gcd(P, P')` and its own repeated parts.
fn repeated_multiplicity(repeated: &crate::poly::IntPoly, lo: &BigRational, hi: &BigRational) -> usize {
    let mut g = repeated.clone();
    let mut extra = 0;
    while g.degree().unwrap_or(0) > 0 {
        let sturm = SturmSequence::new(&g);
        if sturm.variations_at(lo) == sturm.variations_at(hi) {
            break;
        }
        extra += 1;
        g = sturm.gcd().clone();
    }
    extra
}

/// Sign-scan fallback on `SCAN_POINTS` grid points with bisection to
/// [`SCAN_TIME_TOL`].
///
/// Symmetric spectra give a real amplitude and roots are sign changes. For
/// other spectra `A` is complex and a zero cannot be certified numerically:
/// any minimum of `|A|` below [`TANGENCY_TOL`] is reported as
/// [`Error::NumericUncertain`].
pub fn scan_ese_numeric(spectrum: &Spectrum) -> Result<EseReport> {
    let info = validate_pst(spectrum);
    let pst_time = info.first_time.filter(|_| info.admissible).ok_or(Error::NotAdmissible)?;
    let mean = spectrum.values().iter().sum::<f64>() / spectrum.len() as f64;
    let centered = Spectrum::new(spectrum.values().iter().map(|v| v - mean).collect())?;
    let roots = if centered.is_symmetric() {
        let series = amplitude_series(&to_symmetric(&centered)?);
        scan_real(|t| series.evaluate(t), pst_time)?
    } else {
        let measure = compute_weights(&centered).measure();
        let nodes = centered.values().to_vec();
        let modulus = move |t: f64| -> f64 {
            let (re, im) = nodes.iter().zip(&measure).fold((0.0, 0.0), |(re, im), (l, w)| {
                (re + w * (l * t).cos(), im - w * (l * t).sin())
            });
            re.hypot(im)
        };
        scan_modulus(modulus, pst_time)?;
        Vec::new()
    };
    Ok(EseReport {
        spectrum: spectrum.values().to_vec(),
        pst_time,
        method: Method::NumericScan,
        count: roots.len(),
        roots,
    })
}

/// Number of trailing grid points where `|A|` is already inside the PST zero
/// at `T`.
fn terminal_window(values: &[f64]) -> usize {
    values.iter().rev().take_while(|v| v.abs() < TANGENCY_TOL).count()
}

fn scan_real(f: impl Fn(f64) -> f64, t_end: f64) -> Result<Vec<EseRoot>> {
    let step = t_end / SCAN_POINTS as f64;
    let times: Vec<f64> = (0..=SCAN_POINTS).map(|i| i as f64 * step).collect();
    let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
    let last = values.len() - 1 - terminal_window(&values).max(1);

    let mut roots = Vec::new();
    for i in 1..=last {
        let (a, b) = (values[i - 1], values[i]);
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            let next = values[i + 1];
            if next != 0.0 && next.signum() != a.signum() {
                roots.push(EseRoot { lo: times[i], hi: times[i], tau: times[i], multiplicity: 1 });
            } else {
                return Err(Error::NumericUncertain { time: times[i], value: 0.0 });
            }
            continue;
        }
        if a.signum() != b.signum() {
            let (lo, hi) = bisect_sign_change(&f, times[i - 1], times[i], a);
            roots.push(EseRoot { lo, hi, tau: 0.5 * (lo + hi), multiplicity: 1 });
        }
    }
    for i in 1..last {
        let (a, m, b) = (values[i - 1], values[i], values[i + 1]);
        if m.abs() <= a.abs() && m.abs() <= b.abs() && a.signum() == b.signum() && m.signum() == a.signum() {
            let (time, value) = minimize(|t| f(t).abs(), times[i - 1], times[i + 1]);
            if value < TANGENCY_TOL {
                return Err(Error::NumericUncertain { time, value });
            }
        }
    }
    Ok(roots)
}

fn scan_modulus(f: impl Fn(f64) -> f64, t_end: f64) -> Result<()> {
    let step = t_end / SCAN_POINTS as f64;
    let times: Vec<f64> = (0..=SCAN_POINTS).map(|i| i as f64 * step).collect();
    let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
    let last = values.len() - 1 - terminal_window(&values).max(1);
    for i in 1..last {
        if values[i] <= values[i - 1] && values[i] <= values[i + 1] {
            let (time, value) = minimize(&f, times[i - 1], times[i + 1]);
            if value < TANGENCY_TOL {
                return Err(Error::NumericUncertain { time, value });
            }
        }
    }
    Ok(())
}

fn bisect_sign_change(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> (f64, f64) {
    let sign = f_lo.signum();
    while hi - lo > SCAN_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v == 0.0 {
            return (mid, mid);
        }
        if v.signum() == sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Golden-section search for the minimum of a unimodal function.
fn minimize(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > SCAN_TIME_TOL {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d);
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t))
}

/// Exact `A^{(k)}(π)` for `k = 2n`, `n ≥ 1`: `(−1)^n Σ c_k λ_k^{2n} (−1)^{λ_k}`.
pub fn even_derivative_at_pi(series: &ExactCosineSeries, half_order: u32) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for (freq, c) in &series.terms {
        if !freq.is_integer() {
            return Err(Error::NonIntegerFrequency(freq.to_string()));
        }
        let lambda: BigInt = freq.to_integer();
        let mut term = c * BigRational::from_integer(lambda.pow(2 * half_order));
        if lambda.is_odd() {
            term = -term;
        }
        total += term;
    }
    if half_order % 2 == 1 {
        total = -total;
    }
    if half_order == 0 {
        total += &series.c0;
    }
    Ok(total)
}
