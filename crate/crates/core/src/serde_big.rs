//! Serde adapters that write big integers as decimal strings.

use rug::Integer;
use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

pub mod int_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Integer, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Integer, D::Error> {
        let s = String::deserialize(d)?;
        parse_integer(&s).map_err(D::Error::custom)
    }
}

pub(crate) fn parse_integer(s: &str) -> Result<Integer, String> {
    let t = s.trim();
    Integer::parse(t)
        .map(Integer::from)
        .map_err(|e| format!("bad integer {t:?}: {e}"))
}
