use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the compact JSON serialization.
pub fn json_hash<T: Serialize>(value: &T) -> String {
    let text = serde_json::to_string(value).expect("config types serialize infallibly");
    sha256_hex(text.as_bytes())
}
