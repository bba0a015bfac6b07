//! Exact integer/rational helpers shared by the table-grade math modules.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Ratio = BigRational;

/// Binomial coefficient C(n, k) as a big integer.
pub fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

pub fn rat_int<T: Into<BigInt>>(v: T) -> Ratio {
    Ratio::from_integer(v.into())
}

pub fn rat(num: i64, den: i64) -> Ratio {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn ratio_to_f64(r: &Ratio) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Falls back to a quotient of lossy conversions for magnitudes
        // outside f64 range of either component.
        let n = r.numer().to_f64().unwrap_or(f64::MAX);
        let d = r.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

/// Parses "p/q", plain integers, decimals, and scientific notation exactly.
///
/// "1e-6" becomes 1/1000000, "0.975" becomes 39/40. Used everywhere a CLI
/// or scenario parameter feeds the exact-arithmetic paths.
pub fn parse_ratio(s: &str) -> Result<Ratio, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|_| format!("bad numerator {p:?}"))?;
        let den: BigInt = q.trim().parse().map_err(|_| format!("bad denominator {q:?}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(Ratio::new(num, den));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e.parse().map_err(|_| format!("bad exponent {e:?}"))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let num: BigInt = digits.parse().map_err(|_| format!("bad number {s:?}"))?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut r = Ratio::from_integer(num);
    if scale >= 0 {
        r *= Ratio::from_integer(ten.pow(scale as u32));
    } else {
        r /= Ratio::from_integer(ten.pow((-scale) as u32));
    }
    Ok(r)
}

/// Formats a rational with `sig` significant digits, fixed-point inside
/// [1e-3, 1e6) and scientific outside. Output is deterministic.
pub fn decimal_sig(r: &Ratio, sig: usize) -> String {
    let v = ratio_to_f64(r);
    format_sig(v, sig)
}

pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-3..6).contains(&mag) {
        let dec = (sig as i32 - 1 - mag).max(0) as usize;
        format!("{v:.dec$}")
    } else {
        format!("{:.*e}", sig - 1, v)
    }
}

/// Formats a rational as "p/q" (or "p" when integral).
pub fn fraction_str(r: &Ratio) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn is_nonneg(r: &Ratio) -> bool {
    !r.is_negative()
}
