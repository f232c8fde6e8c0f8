//! Bit-exact hexadecimal text encoding for f64 values (C99 `%a` style).
//!
//! The mantissa hex digits are taken directly from the bit pattern, so a
//! format/parse round trip reproduces the input bits exactly. Only finite
//! values are representable.

const MANT_BITS: u32 = 52;
const MANT_MASK: u64 = (1 << MANT_BITS) - 1;
const EXP_MASK: u64 = 0x7ff;
const EXP_BIAS: i64 = 1023;

/// Formats a finite f64 as a hex-float string such as `0x1.921fb54442d18p+1`.
pub(crate) fn format_hex(v: f64) -> String {
    assert!(v.is_finite(), "hex floats cover finite values only");
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_field = (bits >> MANT_BITS) & EXP_MASK;
    let mantissa = bits & MANT_MASK;
    if exp_field == 0 {
        if mantissa == 0 {
            return format!("{sign}0x0p+0");
        }
        // Subnormal: leading digit 0, fixed exponent -1022.
        return format!("{sign}0x0.{mantissa:013x}p-1022");
    }
    let exp = exp_field as i64 - EXP_BIAS;
    format!("{sign}0x1.{mantissa:013x}p{exp:+}")
}

/// Parses a string produced by [`format_hex`] back to the identical f64.
pub(crate) fn parse_hex(s: &str) -> Option<f64> {
    let (negative, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix("0x")?;
    let (mantissa_part, exp_part) = rest.split_once('p')?;
    let exp: i64 = exp_part.parse().ok()?;
    let (lead, frac) = match mantissa_part.split_once('.') {
        Some((l, f)) => (l, f),
        None => (mantissa_part, ""),
    };
    if frac.len() > 13 {
        return None;
    }
    let mut mantissa: u64 = 0;
    for (i, c) in frac.chars().enumerate() {
        let digit = c.to_digit(16)? as u64;
        mantissa |= digit << (MANT_BITS as usize - 4 * (i + 1));
    }
    let bits = match lead {
        "0" => {
            if mantissa == 0 {
                0
            } else if exp == -1022 {
                mantissa
            } else {
                return None;
            }
        }
        "1" => {
            let exp_field = exp + EXP_BIAS;
            if !(1..=2046).contains(&exp_field) {
                return None;
            }
            ((exp_field as u64) << MANT_BITS) | mantissa
        }
        _ => return None,
    };
    let value = f64::from_bits(bits | if negative { 1 << 63 } else { 0 });
    Some(value)
}
