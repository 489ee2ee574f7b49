//! Helpers around [`rug::Float`], the high-precision real used throughout.

use rug::Float;

use crate::error::{Error, Result};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;

/// Precision used for the parameters of approximation functions.
pub const PARAM_PRECISION: u32 = 256;

/// Working precision for an operation reaching depth `depth`.
pub fn precision_for_depth(depth: u32) -> u32 {
    DEFAULT_PRECISION.max(depth + 64)
}

/// Boundary tolerance `2^(-bits/2)`.
pub fn tolerance(precision_bits: u32) -> Float {
    let mut t = Float::with_val(precision_bits, 1u32);
    t >>= precision_bits / 2;
    t
}

/// Parses a decimal (or scientific) literal at the given precision.
pub fn parse_decimal(text: &str, precision_bits: u32) -> Result<Float> {
    let trimmed = text.trim();
    let parsed = Float::parse(trimmed)
        .map_err(|e| Error::Parse(format!("bad real literal {trimmed:?}: {e}")))?;
    let value = Float::with_val(precision_bits, parsed);
    if !value.is_finite() {
        return Err(Error::Parse(format!("non-finite real literal {trimmed:?}")));
    }
    Ok(value)
}

/// Number of significant decimal digits that round-trip a `bits`-bit float.
pub fn round_trip_digits(bits: u32) -> usize {
    (f64::from(bits) * std::f64::consts::LOG10_2).ceil() as usize + 2
}

/// Shortest decimal rendering that parses back to the identical value at the same precision.
pub fn decimal_string(value: &Float) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let prec = value.prec();
    let max = round_trip_digits(prec);
    for digits in 1..max {
        let text = value.to_string_radix(10, Some(digits));
        if Float::parse(&text).map(|p| Float::with_val(prec, p)).as_ref() == Ok(value) {
            return trim_zeros(text);
        }
    }
    trim_zeros(value.to_string_radix(10, Some(max)))
}

/// Short decimal rendering for diagnostics.
pub fn short_string(value: &Float) -> String {
    trim_zeros(value.to_string_radix(10, Some(12)))
}

/// Drops trailing mantissa zeros and writes exponents in `[-7, 21)` positionally,
/// so `4.1421000e-1` becomes `0.41421`.
fn trim_zeros(text: String) -> String {
    let (mantissa, exponent) = match text.find('e') {
        Some(i) => (&text[..i], text[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (text.as_str(), 0),
    };
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let point = int_part.len() as i64 + exponent;
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        return "0".into();
    }
    if !(-7..21).contains(&point) {
        let (head, tail) = digits.split_at(1);
        let tail = if tail.is_empty() { String::new() } else { format!(".{tail}") };
        return format!("{sign}{head}{tail}e{}", point - 1);
    }
    let digits = digits.to_string();
    let body = if point <= 0 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
    };
    let body = body.trim_start_matches('0');
    let body = if body.is_empty() || body.starts_with('.') { format!("0{body}") } else { body.to_string() };
    format!("{sign}{body}")
}

pub(crate) mod serde_float {
    //! Serialize a `Float` as a round-trip decimal string.
    use rug::Float;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Float, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::decimal_string(value))
    }

    /// Accepts a decimal string or a JSON number, read at the parameter precision.
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Float, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => super::parse_decimal(&t, super::PARAM_PRECISION).map_err(serde::de::Error::custom),
            Raw::Number(v) => Ok(Float::with_val(super::PARAM_PRECISION, v)),
        }
    }
}
