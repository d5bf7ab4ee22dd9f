//! Canonical text form of integers: lowercase big-endian hex without leading
//! zeros, with zero written as `"0"`.

use num_bigint::BigUint;
use num_traits::Num;

use crate::error::{Error, Result};

pub fn to_hex(v: &BigUint) -> String {
    v.to_str_radix(16)
}

/// Parses canonical hex only; uppercase digits, leading zeros and empty
/// strings are rejected so that every integer has exactly one spelling.
pub fn from_hex(s: &str) -> Result<BigUint> {
    let canonical = !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
        && (s == "0" || !s.starts_with('0'));
    if !canonical {
        return Err(Error::Hex(s.to_owned()));
    }
    BigUint::from_str_radix(s, 16).map_err(|_| Error::Hex(s.to_owned()))
}

/// `#[serde(with = "hex")]` for `BigUint` fields.
pub mod hex {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_hex(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        super::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "hex_bytes")]` for byte payloads.
pub mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
        let mut out = String::with_capacity(v.len() * 2);
        for b in v {
            out.push_str(&format!("{b:02x}"));
        }
        s.serialize_str(&out)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        if s.len() % 2 != 0
            || !s
                .bytes()
                .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
        {
            return Err(serde::de::Error::custom(format!(
                "malformed hex bytes {s:?}"
            )));
        }
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16).map_err(serde::de::Error::custom))
            .collect()
    }
}
