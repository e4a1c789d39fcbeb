//! JSON encoding of clopen indices: a JSON integer when the value fits in
//! `u64`, a decimal string otherwise. Both forms are accepted on input.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

use crate::cantor::ClopenIndex;

pub fn serialize<S: Serializer>(v: &ClopenIndex, s: S) -> Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(small) => s.serialize_u64(small),
        None => s.serialize_str(&v.to_string()),
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ClopenIndex, D::Error> {
    struct IndexVisitor;
    impl Visitor<'_> for IndexVisitor {
        type Value = ClopenIndex;
        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a non-negative integer or a decimal string")
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
            Ok(BigUint::from(v))
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
            u64::try_from(v)
                .map(BigUint::from)
                .map_err(|_| E::custom("negative index"))
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
            if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
                return Err(E::custom(format!("bad index string {v:?}")));
            }
            v.parse().map_err(E::custom)
        }
    }
    d.deserialize_any(IndexVisitor)
}

/// Wrapper so collections of indices can use the same encoding.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct JsonIndex(#[serde(with = "self")] pub ClopenIndex);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_and_big_round_trip() {
        let small = JsonIndex(BigUint::from(17u32));
        assert_eq!(serde_json::to_string(&small).unwrap(), "17");
        let big = JsonIndex(BigUint::from(1u32) << 100usize);
        let text = serde_json::to_string(&big).unwrap();
        assert_eq!(text, "\"1267650600228229401496703205376\"");
        assert_eq!(serde_json::from_str::<JsonIndex>(&text).unwrap(), big);
        assert_eq!(serde_json::from_str::<JsonIndex>("17").unwrap(), small);
        assert!(serde_json::from_str::<JsonIndex>("-1").is_err());
        assert!(serde_json::from_str::<JsonIndex>("\"1e3\"").is_err());
    }
}
