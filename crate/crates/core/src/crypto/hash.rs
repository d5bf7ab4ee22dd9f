//! Hashing to integers with per-use-site domain separation.
//!
//! Every use of the protocol's hash function carries one of the labels in
//! [`tag`]. The labels form a prefix-free set, so `label ‖ data` is an
//! unambiguous input encoding.

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

pub mod tag {
    /// Hash of the goods plaintext.
    pub const GOODS: &str = "h_a";
    /// Hash of the encrypted goods.
    pub const ENCRYPTED_GOODS: &str = "hd_a";
    /// Control hash of `y_b` inside `xx_b`.
    pub const VRES_CONTROL: &str = "y_b";
    /// CA signature over a goods certificate.
    pub const GOODS_CERT: &str = "cert";
    /// STTP signature over a recoverable certificate.
    pub const RECOVERABLE_CERT: &str = "rcert";
    /// Recovery authorization token.
    pub const AUTH_TOKEN: &str = "token";
    /// Mask that hides `d_bt` inside `w_bt`.
    pub const EXPONENT_MASK: &str = "d_bt-mask";
    /// Symmetric keystream blocks.
    pub const KEYSTREAM: &str = "sym";
    /// CA signature over the public-key registry.
    pub const REGISTRY: &str = "registry";
}

/// Raw SHA-256 of `tag ‖ data`.
pub fn digest(tag: &str, data: &[u8]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(tag.as_bytes());
    hasher.update(data);
    hasher.finalize().into()
}

/// `H(tag ‖ data)` read as a big-endian integer and reduced mod `m`.
pub fn hash_int(tag: &str, data: &[u8], m: &BigUint) -> BigUint {
    debug_assert!(*m >= BigUint::from(2u8));
    BigUint::from_bytes_be(&digest(tag, data)) % m
}

/// `2^256`, the modulus under which full digests are kept.
pub fn digest_space() -> BigUint {
    BigUint::from(1u8) << 256
}

/// Length-prefixed concatenation of fields, used before hashing structured values.
#[derive(Debug, Default, Clone)]
pub struct FieldEncoder {
    buf: Vec<u8>,
}

impl FieldEncoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(mut self, field: &[u8]) -> Self {
        self.buf
            .extend_from_slice(&(field.len() as u64).to_be_bytes());
        self.buf.extend_from_slice(field);
        self
    }

    pub fn int(self, field: &BigUint) -> Self {
        self.bytes(&field.to_bytes_be())
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}
