//! Deterministic keystream cipher for e-goods payloads.

use num_bigint::BigUint;
use num_traits::One;
use rand_chacha::rand_core::RngCore;

use super::arith::is_coprime;
use super::hash::{digest, tag, FieldEncoder};
use super::prime::random_range;
use crate::error::{Error, Result};

/// Goods encryption key `k_a`, valid under the RSA modulus that wraps it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricKey(BigUint);

impl SymmetricKey {
    /// Accepts `k` iff `1 < k < n` and `gcd(k, n) = 1`.
    pub fn new(k: BigUint, n: &BigUint) -> Result<Self> {
        if k <= BigUint::one() || k >= *n || !is_coprime(&k, n) {
            return Err(Error::InvalidKey);
        }
        Ok(Self(k))
    }

    /// Key material without any modulus check, e.g. a value recovered by unwrapping.
    pub fn from_raw(k: BigUint) -> Self {
        Self(k)
    }

    pub fn generate<R: RngCore>(rng: &mut R, n: &BigUint) -> Result<Self> {
        if *n <= BigUint::from(3u8) {
            return Err(Error::Domain("modulus too small for a symmetric key"));
        }
        loop {
            let k = random_range(rng, &BigUint::from(2u8), n);
            if is_coprime(&k, n) {
                return Ok(Self(k));
            }
        }
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    fn keystream_block(&self, index: u64) -> [u8; 32] {
        let input = FieldEncoder::new()
            .int(&self.0)
            .bytes(&index.to_be_bytes())
            .finish();
        digest(tag::KEYSTREAM, &input)
    }

    fn apply_keystream(&self, data: &[u8]) -> Vec<u8> {
        data.chunks(32)
            .enumerate()
            .flat_map(|(i, chunk)| {
                let block = self.keystream_block(i as u64);
                chunk
                    .iter()
                    .zip(block)
                    .map(|(b, k)| b ^ k)
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

/// `E_k(plaintext)`; output length equals input length.
pub fn sym_encrypt(key: &SymmetricKey, plaintext: &[u8]) -> Vec<u8> {
    key.apply_keystream(plaintext)
}

pub fn sym_decrypt(key: &SymmetricKey, ciphertext: &[u8]) -> Vec<u8> {
    key.apply_keystream(ciphertext)
}
