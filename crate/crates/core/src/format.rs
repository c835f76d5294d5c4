//! Deterministic number formatting shared by the CLI and CSV writers.

/// C-style `%.{sig}g`: shortest of fixed/scientific at `sig` significant
/// digits, trailing zeros stripped.
pub fn fmt_g(x: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Round first: the exponent can change (9.99… → 10.0).
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Text output precision.
pub fn fmt15(x: f64) -> String {
    fmt_g(x, 15)
}

/// CSV precision.
pub fn fmt17(x: f64) -> String {
    fmt_g(x, 17)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(fmt_g(std::f64::consts::PI, 15), "3.14159265358979");
        assert_eq!(fmt_g(std::f64::consts::PI, 17), "3.1415926535897931");
        assert_eq!(fmt_g(1.0, 15), "1");
        assert_eq!(fmt_g(0.0, 15), "0");
        assert_eq!(fmt_g(-2.5, 15), "-2.5");
        assert_eq!(fmt_g(1e-5, 15), "1e-05");
        assert_eq!(fmt_g(1.5e-4, 15), "0.00015");
        assert_eq!(fmt_g(1e15, 15), "1e+15");
        assert_eq!(fmt_g(123456789012345.0, 15), "123456789012345");
        assert_eq!(fmt_g(0.9999999999999999, 15), "1");
        assert_eq!(fmt_g(6.123233995736766e-17, 17), "6.123233995736766e-17");
    }
}
