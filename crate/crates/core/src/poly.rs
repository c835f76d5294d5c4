//! Dense univariate polynomials over the rationals and exact real-root
//! counting with Sturm sequences.
//!
//! Counting runs on primitive integer polynomials: every Sturm remainder is a
//! sign-corrected pseudo-remainder with its content stripped, which keeps the
//! coefficient growth near the subresultant bound.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::reconstruct::ratio_to_f64;

/// Coefficients in ascending degree; no trailing zeros (the zero polynomial
/// is the empty list).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RatPolynomial {
    coeffs: Vec<BigRational>,
}

impl RatPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// `x − root`.
    pub fn linear_root(root: &BigRational) -> Self {
        Self::new(vec![-root.clone(), BigRational::one()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + ratio_to_f64(c))
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Quotient and remainder of division by a nonzero polynomial.
    pub fn div_rem(&self, divisor: &RatPolynomial) -> Result<(RatPolynomial, RatPolynomial)> {
        let dd = divisor.degree().ok_or(Error::InvalidPolynomial("division by zero polynomial"))?;
        let lead = divisor.leading().expect("nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((RatPolynomial::zero(), self.clone()));
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = &rem[k + dd] / lead;
            if !q.is_zero() {
                for (i, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + i] -= &q * d;
                }
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        Ok((RatPolynomial::new(quot), RatPolynomial::new(rem)))
    }

    /// Multiplicity of `root` as a zero; `0` for the zero polynomial.
    pub fn root_multiplicity(&self, root: &BigRational) -> usize {
        if self.is_zero() {
            return 0;
        }
        let factor = RatPolynomial::linear_root(root);
        let mut p = self.clone();
        let mut count = 0;
        loop {
            let (q, r) = p.div_rem(&factor).expect("nonzero divisor");
            if !r.is_zero() || q.is_zero() {
                return count;
            }
            count += 1;
            p = q;
        }
    }

    /// Removes every factor `(x − root)`.
    pub fn deflate(&self, root: &BigRational) -> RatPolynomial {
        let factor = RatPolynomial::linear_root(root);
        let mut p = self.clone();
        for _ in 0..self.root_multiplicity(root) {
            p = p.div_rem(&factor).expect("nonzero divisor").0;
        }
        p
    }

    /// Primitive integer polynomial with the same roots and a positive
    /// multiple of `self`.
    pub fn to_primitive(&self) -> IntPoly {
        let lcm = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
        IntPoly::new(ints).primitive()
    }

    /// Chebyshev polynomials `T_0, …, T_n` of the first kind.
    pub fn chebyshev_t_up_to(n: usize) -> Vec<RatPolynomial> {
        let mut out = vec![RatPolynomial::from_integers(&[1])];
        if n >= 1 {
            out.push(RatPolynomial::from_integers(&[0, 1]));
        }
        let two_x = RatPolynomial::from_integers(&[0, 2]);
        for k in 2..=n {
            let next = &(&two_x * &out[k - 1]) - &out[k - 2];
            out.push(next);
        }
        out
    }
}

impl Add for &RatPolynomial {
    type Output = RatPolynomial;

    fn add(self, rhs: &RatPolynomial) -> RatPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigRational::zero();
        RatPolynomial::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &RatPolynomial {
    type Output = RatPolynomial;

    fn sub(self, rhs: &RatPolynomial) -> RatPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &RatPolynomial {
    type Output = RatPolynomial;

    fn neg(self) -> RatPolynomial {
        RatPolynomial { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &RatPolynomial {
    type Output = RatPolynomial;

    fn mul(self, rhs: &RatPolynomial) -> RatPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return RatPolynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPolynomial::new(out)
    }
}

impl fmt::Display for RatPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if k == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Integer polynomial, ascending coefficients, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn leading(&self) -> &BigInt {
        self.coeffs.last().expect("nonzero polynomial")
    }

    /// Positive gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    pub fn primitive(self) -> IntPoly {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self;
        }
        IntPoly { coeffs: self.coeffs.into_iter().map(|c| c / &g).collect() }
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * BigInt::from(k)).collect())
    }

    pub fn to_rational(&self) -> RatPolynomial {
        RatPolynomial::new(self.coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    /// Sign of the value at `x`, exactly.
    pub fn sign_at(&self, x: &BigRational) -> Sign {
        if self.is_zero() {
            return Sign::NoSign;
        }
        // Homogenized Horner: Σ a_k p^k q^{n−k} has the sign of P(p/q) for q > 0.
        let (p, q) = (x.numer(), x.denom());
        let mut acc = BigInt::zero();
        let mut q_pow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * p + c * &q_pow;
            q_pow *= q;
        }
        acc.sign()
    }

    /// Sign at `+∞` (`positive`) or `−∞`.
    pub fn sign_at_infinity(&self, positive: bool) -> Sign {
        match self.degree() {
            None => Sign::NoSign,
            Some(d) => {
                let s = self.leading().sign();
                if positive || d % 2 == 0 {
                    s
                } else {
                    -s
                }
            }
        }
    }

    /// `(r, negated)` where `r` is a positive-or-negative multiple of
    /// `self mod divisor`: `r = κ·(self mod divisor)` with `κ < 0` iff
    /// `negated`.
    fn pseudo_remainder(&self, divisor: &IntPoly) -> (IntPoly, bool) {
        let dd = divisor.degree().expect("nonzero divisor");
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut negated = false;
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let top = rem.last().expect("nonempty").clone();
            let g = top.gcd(lead);
            let alpha = lead / &g;
            let beta = &top / &g;
            if alpha.is_negative() {
                negated = !negated;
            }
            if !alpha.is_one() {
                for c in rem.iter_mut() {
                    *c *= &alpha;
                }
            }
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &beta * d;
            }
            debug_assert!(rem.last().is_some_and(Zero::is_zero));
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (IntPoly { coeffs: rem }, negated)
    }

    /// Exact quotient by a polynomial known to divide `self` over ℚ,
    /// returned as a primitive integer polynomial.
    pub fn exact_quotient(&self, divisor: &IntPoly) -> IntPoly {
        let (q, r) = self.to_rational().div_rem(&divisor.to_rational()).expect("nonzero divisor");
        debug_assert!(r.is_zero(), "divisor does not divide");
        q.to_primitive()
    }
}

/// A Sturm chain `P, P', −rem(P, P'), …` reduced to primitive parts.
///
/// The chain may be built from a polynomial with repeated roots: its last
/// element is then `gcd(P, P')` and sign-variation differences still count
/// distinct roots at points where `P` does not vanish.
#[derive(Debug, Clone)]
pub struct SturmSequence {
    chain: Vec<IntPoly>,
}

impl SturmSequence {
    pub fn new(p: &IntPoly) -> Self {
        let mut chain = vec![p.clone()];
        if p.degree().unwrap_or(0) == 0 {
            return Self { chain };
        }
        chain.push(p.derivative().primitive());
        loop {
            let n = chain.len();
            let (rem, negated) = chain[n - 2].pseudo_remainder(&chain[n - 1]);
            if rem.is_zero() {
                break;
            }
            let rem = rem.primitive();
            // Next element is −(P_{k−1} mod P_k).
            let next = if negated { rem } else { IntPoly { coeffs: rem.coeffs.into_iter().map(|c| -c).collect() } };
            chain.push(next);
        }
        Self { chain }
    }

    pub fn chain(&self) -> &[IntPoly] {
        &self.chain
    }

    /// `gcd(P, P')` up to a constant.
    pub fn gcd(&self) -> &IntPoly {
        self.chain.last().expect("nonempty chain")
    }

    fn count_variations(signs: impl Iterator<Item = Sign>) -> usize {
        let mut last = Sign::NoSign;
        let mut changes = 0;
        for s in signs.filter(|s| *s != Sign::NoSign) {
            if last != Sign::NoSign && s != last {
                changes += 1;
            }
            last = s;
        }
        changes
    }

    pub fn variations_at(&self, x: &BigRational) -> usize {
        Self::count_variations(self.chain.iter().map(|p| p.sign_at(x)))
    }

    pub fn variations_at_infinity(&self, positive: bool) -> usize {
        Self::count_variations(self.chain.iter().map(|p| p.sign_at_infinity(positive)))
    }
}

/// Distinct real roots of `p` strictly inside `(lo, hi)`.
pub fn count_roots_open_interval(p: &RatPolynomial, lo: &BigRational, hi: &BigRational) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::InvalidPolynomial("zero polynomial has no isolated roots"));
    }
    if lo >= hi {
        return Err(Error::Domain(format!("empty interval ({lo}, {hi})")));
    }
    Ok(RootCounter::new(p, lo, hi).total())
}

/// Sturm machinery for `p` on `(lo, hi)`, with endpoint roots divided out.
#[derive(Debug, Clone)]
pub(crate) struct RootCounter {
    lo: BigRational,
    hi: BigRational,
    sturm: SturmSequence,
    /// Square-free part of the deflated polynomial.
    squarefree: IntPoly,
    v_lo: usize,
    v_hi: usize,
}

impl RootCounter {
    pub(crate) fn new(p: &RatPolynomial, lo: &BigRational, hi: &BigRational) -> Self {
        let deflated = p.deflate(lo).deflate(hi).to_primitive();
        let sturm = SturmSequence::new(&deflated);
        let gcd = sturm.gcd();
        let squarefree = if gcd.degree().unwrap_or(0) == 0 { deflated } else { deflated.exact_quotient(gcd) };
        let v_lo = sturm.variations_at(lo);
        let v_hi = sturm.variations_at(hi);
        Self { lo: lo.clone(), hi: hi.clone(), sturm, squarefree, v_lo, v_hi }
    }

    pub(crate) fn total(&self) -> usize {
        self.v_lo - self.v_hi
    }

    /// `gcd(p, p')` of the deflated polynomial.
    pub(crate) fn repeated_part(&self) -> &IntPoly {
        self.sturm.gcd()
    }

    /// Disjoint isolating intervals in increasing order. `candidates` are
    /// optional split points tried first with plain sign changes; if those do
    /// not account for every root the Sturm bisection takes over.
    pub(crate) fn isolate(&self, candidates: &[BigRational]) -> Vec<Isolated> {
        let total = self.total();
        if total == 0 {
            return Vec::new();
        }
        if let Some(found) = self.isolate_by_sign_changes(candidates, total) {
            return found;
        }
        let mut out = Vec::with_capacity(total);
        self.bisect(self.lo.clone(), self.hi.clone(), self.v_lo, self.v_hi, &mut out);
        out
    }

    fn isolate_by_sign_changes(&self, candidates: &[BigRational], total: usize) -> Option<Vec<Isolated>> {
        let mut points: Vec<BigRational> =
            candidates.iter().filter(|c| **c > self.lo && **c < self.hi).cloned().collect();
        points.sort();
        points.dedup();
        points.insert(0, self.lo.clone());
        points.push(self.hi.clone());
        let signs: Vec<Sign> = points.iter().map(|x| self.squarefree.sign_at(x)).collect();
        // Exact zeros and sign changes between nonzero neighbours are each a
        // certain root; if they account for the Sturm total, nothing else
        // hides between the points.
        let mut out = Vec::new();
        for i in 1..points.len() {
            if signs[i] == Sign::NoSign {
                out.push(Isolated::Exact(points[i].clone()));
            } else if signs[i - 1] != Sign::NoSign && signs[i] != signs[i - 1] {
                out.push(Isolated::Interval(points[i - 1].clone(), points[i].clone()));
            }
        }
        (out.len() == total).then_some(out)
    }

    fn bisect(&self, a: BigRational, b: BigRational, va: usize, vb: usize, out: &mut Vec<Isolated>) {
        let count = va - vb;
        match count {
            0 => {}
            1 => out.push(Isolated::Interval(a, b)),
            _ => {
                let two = BigRational::from_integer(2.into());
                let mid = (&a + &b) / two;
                let vm = self.sturm.variations_at(&mid);
                if self.squarefree.sign_at(&mid) == Sign::NoSign {
                    // Roots in (a, mid] = va − vm; mid itself is one of them.
                    self.bisect(a, mid.clone(), va, vm + 1, out);
                    out.push(Isolated::Exact(mid.clone()));
                    self.bisect(mid, b, vm, vb, out);
                } else {
                    self.bisect(a, mid.clone(), va, vm, out);
                    self.bisect(mid, b, vm, vb, out);
                }
            }
        }
    }

    /// Shrinks an isolating interval of the square-free part by exact
    /// bisection until `done(lo, hi)` holds.
    pub(crate) fn refine(
        &self,
        root: &Isolated,
        mut done: impl FnMut(f64, f64) -> bool,
    ) -> (BigRational, BigRational) {
        let (mut a, mut b) = match root {
            Isolated::Exact(x) => return (x.clone(), x.clone()),
            Isolated::Interval(a, b) => (a.clone(), b.clone()),
        };
        // Sign just right of `a`; a root at `a` is simple, so S' decides.
        let sa = match self.squarefree.sign_at(&a) {
            Sign::NoSign => self.squarefree.derivative().sign_at(&a),
            s => s,
        };
        let two = BigRational::from_integer(2.into());
        for _ in 0..200 {
            if done(ratio_to_f64(&a), ratio_to_f64(&b)) {
                break;
            }
            let mid = (&a + &b) / &two;
            let sm = self.squarefree.sign_at(&mid);
            if sm == Sign::NoSign {
                return (mid.clone(), mid);
            }
            if sm == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        (a, b)
    }
}

/// A root isolated either by an interval with a sign change of the
/// square-free part, or found exactly at a rational point.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Isolated {
    Interval(BigRational, BigRational),
    Exact(BigRational),
}

#[cfg(test)]
impl Isolated {
    fn bounds(&self) -> (&BigRational, &BigRational) {
        match self {
            Isolated::Interval(a, b) => (a, b),
            Isolated::Exact(x) => (x, x),
        }
    }
}

/// Exact rational for an `f64` (dyadic, so always representable).
pub(crate) fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub(crate) fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| ratio_to_f64(x))
}
