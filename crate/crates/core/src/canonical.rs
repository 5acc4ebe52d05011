//! Canonical JSON rendering.
//!
//! Documents are rendered through [`serde_json::Value`], whose object type is
//! an ordered `BTreeMap`, so keys always come out sorted. Integers are exact
//! and reals use the shortest decimal that round-trips to the same `f64`.

use serde::Serialize;
use serde_json::Value;

/// Render any serializable value as compact canonical JSON.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("value is representable as JSON");
    canonical_value(&value)
}

pub fn canonical_value(value: &Value) -> String {
    // `Value` objects are BTreeMaps, so plain serialization is already sorted.
    serde_json::to_string(value).expect("JSON values always serialize")
}
