//! Deterministic canonical JSON serialization and hashing.
//!
//! Everything written to the ledger is hashed over its canonical bytes:
//! object keys sorted lexicographically by byte value, no insignificant
//! whitespace, integers in base 10. Floating-point values are rejected so
//! that hashed payloads stay bit-exact across platforms.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// 64 lowercase hex chars of all zeros; the `prev_hash` of chain starts.
pub const ZERO_HASH: &str = "0000000000000000000000000000000000000000000000000000000000000000";

/// Serialize a value to canonical JSON bytes.
///
/// serde_json's default map is a BTreeMap, so object keys come out sorted;
/// this function additionally walks the value to reject floats anywhere in
/// the tree.
pub fn canonical_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let v = serde_json::to_value(value)?;
    reject_floats(&v)?;
    Ok(serde_json::to_vec(&v)?)
}

/// Canonical JSON as a string, for line-delimited persistence and CLI output.
pub fn canonical_string<T: Serialize>(value: &T) -> Result<String> {
    let bytes = canonical_bytes(value)?;
    // canonical bytes are serde_json output, always valid UTF-8
    Ok(String::from_utf8(bytes).expect("canonical JSON is UTF-8"))
}

fn reject_floats(v: &Value) -> Result<()> {
    match v {
        Value::Number(n) if n.is_f64() => Err(Error::MalformedPayload(format!(
            "floating-point value {n} not allowed in hashed payloads"
        ))),
        Value::Array(items) => items.iter().try_for_each(reject_floats),
        Value::Object(map) => map.values().try_for_each(reject_floats),
        _ => Ok(()),
    }
}

/// SHA-256 of raw bytes, as 64 lowercase hex chars.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 over the canonical serialization of a value.
pub fn hash_canonical<T: Serialize>(value: &T) -> Result<String> {
    Ok(sha256_hex(&canonical_bytes(value)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_minified() {
        let v = json!({"zeta": 1, "alpha": {"b": 2, "a": 3}});
        assert_eq!(
            canonical_string(&v).unwrap(),
            r#"{"alpha":{"a":3,"b":2},"zeta":1}"#
        );
    }

    #[test]
    fn equal_values_equal_bytes() {
        let a = json!({"x": 1, "y": [1, 2, 3]});
        let b = json!({"y": [1, 2, 3], "x": 1});
        assert_eq!(canonical_bytes(&a).unwrap(), canonical_bytes(&b).unwrap());
    }

    #[test]
    fn floats_rejected() {
        let v = json!({"score": 0.5});
        assert!(matches!(
            canonical_bytes(&v),
            Err(Error::MalformedPayload(_))
        ));
        let nested = json!({"a": [1, {"b": 2.5}]});
        assert!(canonical_bytes(&nested).is_err());
    }

    #[test]
    fn sha256_of_empty_input() {
        // well-known digest of the empty byte string
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
