//! Bit-exact text encoding of `f64` as hexadecimal floating point
//! (`0x1.8p+1` style), plus serde adapters.

use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("malformed hexadecimal float {0:?}")]
pub struct ParseHexFloatError(pub String);

const MANTISSA_BITS: u32 = 52;
const MANTISSA_MASK: u64 = (1 << MANTISSA_BITS) - 1;
const EXP_BIAS: i64 = 1023;

pub fn format(value: f64) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    let bits = value.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    if value.is_infinite() {
        return format!("{sign}inf");
    }
    let biased = ((bits >> MANTISSA_BITS) & 0x7ff) as i64;
    let mantissa = bits & MANTISSA_MASK;
    let (lead, exp) = match (biased, mantissa) {
        (0, 0) => return format!("{sign}0x0p+0"),
        (0, _) => (0, 1 - EXP_BIAS),
        _ => (1, biased - EXP_BIAS),
    };
    let mut out = format!("{sign}0x{lead}");
    if mantissa != 0 {
        let digits = format!("{mantissa:013x}");
        let _ = write!(out, ".{}", digits.trim_end_matches('0'));
    }
    let _ = write!(out, "p{exp:+}");
    out
}

pub fn parse(text: &str) -> Result<f64, ParseHexFloatError> {
    let err = || ParseHexFloatError(text.to_string());
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let signed = |v: f64| if negative { -v } else { v };
    match body {
        "inf" => return Ok(signed(f64::INFINITY)),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    let body = body.strip_prefix("0x").ok_or_else(err)?;
    let (significand, exponent) = body.split_once('p').ok_or_else(err)?;
    let exp: i64 = exponent.parse().map_err(|_| err())?;
    let (lead, frac) = match significand.split_once('.') {
        Some((l, f)) => (l, f),
        None => (significand, ""),
    };
    if frac.len() > 13 || !frac.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(err());
    }
    let mantissa = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(&format!("{frac:0<13}"), 16).map_err(|_| err())?
    };
    let bits = match lead {
        "0" if mantissa == 0 => 0,
        "0" if exp == 1 - EXP_BIAS => mantissa,
        "1" if (1 - EXP_BIAS..=EXP_BIAS).contains(&exp) => ((exp + EXP_BIAS) as u64) << MANTISSA_BITS | mantissa,
        _ => return Err(err()),
    };
    Ok(signed(f64::from_bits(bits)))
}

/// `#[serde(with = "hexfloat::scalar")]` for a single `f64`.
pub mod scalar {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "hexfloat::array")]` for `[f64; N]`.
pub mod array {
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(v: &[f64; N], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(N))?;
        for x in v {
            seq.serialize_element(&super::format(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[f64; N], D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        let values = texts
            .iter()
            .map(|t| super::parse(t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        values
            .try_into()
            .map_err(|v: Vec<f64>| D::Error::invalid_length(v.len(), &"a fixed-length float array"))
    }
}

/// `#[serde(with = "hexfloat::vec")]` for `Vec<f64>`.
pub mod vec {
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&super::format(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| super::parse(t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)
    }
}
