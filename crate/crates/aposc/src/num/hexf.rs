//! Hexadecimal floating point text, in the C99 `%a` style
//! (`0x1.921fb54442d18p+1`). The formatter is exact and the parser inverts it
//! bit for bit, so serialized coefficients survive round trips unchanged.

use crate::error::{Error, Result};

/// Format `x` exactly. Finite values only.
pub fn format_hex(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(Error::domain("hex float text requires a finite value"));
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_raw = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp_raw == 0 && mant == 0 {
        return Ok(format!("{sign}0x0p+0"));
    }
    let (lead, exp, mant) = if exp_raw == 0 {
        // subnormal: renormalize so the leading digit is 1
        let shift = mant.leading_zeros() as i64 - 11;
        let m = (mant << shift) & ((1u64 << 52) - 1);
        (1u64, -1022 - shift, m)
    } else {
        (1u64, exp_raw - 1023, mant)
    };
    let mut frac = String::new();
    let mut m = mant;
    while m != 0 {
        let digit = (m >> 48) & 0xf;
        frac.push(char::from_digit(digit as u32, 16).unwrap());
        m = (m << 4) & ((1u64 << 52) - 1);
    }
    let exp_sign = if exp < 0 { "-" } else { "+" };
    if frac.is_empty() {
        Ok(format!("{sign}0x{lead}p{exp_sign}{}", exp.abs()))
    } else {
        Ok(format!("{sign}0x{lead}.{frac}p{exp_sign}{}", exp.abs()))
    }
}

/// Parse hex float text. Accepts upper or lower case, an optional sign, and
/// mantissas of up to 28 hex digits.
pub fn parse_hex(s: &str) -> Result<f64> {
    let t = s.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let t = t
        .strip_prefix("0x")
        .or_else(|| t.strip_prefix("0X"))
        .ok_or_else(|| Error::parse(format!("hex float must start with 0x: {s:?}")))?;
    let p = t
        .find(['p', 'P'])
        .ok_or_else(|| Error::parse(format!("hex float must carry a p exponent: {s:?}")))?;
    let (mant_txt, exp_txt) = (&t[..p], &t[p + 1..]);
    let exp: i64 = exp_txt
        .parse()
        .map_err(|_| Error::parse(format!("bad hex float exponent: {s:?}")))?;
    let (int_txt, frac_txt) = match mant_txt.find('.') {
        Some(d) => (&mant_txt[..d], &mant_txt[d + 1..]),
        None => (mant_txt, ""),
    };
    if int_txt.is_empty() && frac_txt.is_empty() {
        return Err(Error::parse(format!("empty hex float mantissa: {s:?}")));
    }
    if int_txt.len() + frac_txt.len() > 28 {
        return Err(Error::parse("hex float mantissa too long".to_string()));
    }
    let mut acc: u128 = 0;
    for c in int_txt.chars().chain(frac_txt.chars()) {
        let d = c
            .to_digit(16)
            .ok_or_else(|| Error::parse(format!("bad hex digit {c:?} in {s:?}")))?;
        acc = acc * 16 + d as u128;
    }
    let exp_adj = exp - 4 * frac_txt.len() as i64;
    let mut v = acc as f64;
    // apply 2^exp_adj in two halves to dodge intermediate overflow
    let half = exp_adj / 2;
    let rest = exp_adj - half;
    if half.abs() > 1100 || rest.abs() > 1100 {
        return Err(Error::parse(format!("hex float exponent out of range: {s:?}")));
    }
    v *= 2f64.powi(half as i32);
    v *= 2f64.powi(rest as i32);
    Ok(if neg { -v } else { v })
}
