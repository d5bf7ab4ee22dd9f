//! Textbook (unpadded) RSA with a caller-chosen public exponent.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::arith::{is_coprime, mod_inv};
use super::prime::random_prime;
use crate::bigint::hex;
use crate::error::{Error, Result};

/// Prime pairs sampled before key generation gives up.
pub const KEYGEN_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PublicKey {
    #[serde(with = "hex")]
    pub e: BigUint,
    #[serde(with = "hex")]
    pub n: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub d: BigUint,
    pub n: BigUint,
}

/// Long-term RSA key material; the factors stay with the owner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsaKeyPair {
    #[serde(with = "hex")]
    pub n: BigUint,
    #[serde(with = "hex")]
    pub e: BigUint,
    #[serde(with = "hex")]
    pub d: BigUint,
    #[serde(with = "hex")]
    pub p: BigUint,
    #[serde(with = "hex")]
    pub q: BigUint,
}

impl PublicKey {
    pub fn new(e: BigUint, n: BigUint) -> Self {
        Self { e, n }
    }

    /// `m^e mod n`. Used both for encryption and for opening signatures.
    pub fn apply(&self, m: &BigUint) -> BigUint {
        m.modpow(&self.e, &self.n)
    }

    /// Checks `sig < n` and `sig^e ≡ digest (mod n)`.
    pub fn verify_digest(&self, digest: &BigUint, sig: &BigUint) -> bool {
        *sig < self.n && self.apply(sig) == digest % &self.n
    }
}

impl PrivateKey {
    /// `m^d mod n`.
    pub fn apply(&self, m: &BigUint) -> BigUint {
        m.modpow(&self.d, &self.n)
    }

    pub fn sign_digest(&self, digest: &BigUint) -> BigUint {
        self.apply(&(digest % &self.n))
    }
}

impl RsaKeyPair {
    /// Builds a key pair from explicit primes; fails when `e` is not a valid
    /// exponent for `φ(n) = (p-1)(q-1)`.
    pub fn from_primes(p: BigUint, q: BigUint, e: BigUint) -> Result<Self> {
        if p == q {
            return Err(Error::Domain("RSA primes must be distinct"));
        }
        let phi = (&p - 1u8) * (&q - 1u8);
        if e <= BigUint::one() || e >= phi || !is_coprime(&e, &phi) {
            return Err(Error::NotInvertible);
        }
        let d = mod_inv(&e, &phi)?;
        Ok(Self {
            n: &p * &q,
            e,
            d,
            p,
            q,
        })
    }

    pub fn public(&self) -> PublicKey {
        PublicKey::new(self.e.clone(), self.n.clone())
    }

    pub fn private(&self) -> PrivateKey {
        PrivateKey {
            d: self.d.clone(),
            n: self.n.clone(),
        }
    }

    pub fn phi(&self) -> BigUint {
        (&self.p - 1u8) * (&self.q - 1u8)
    }
}

fn check_keygen_args(bits: u64, e: &BigUint) -> Result<()> {
    if bits < 16 {
        return Err(Error::Domain("modulus must have at least 16 bits"));
    }
    if e.is_even() || *e < BigUint::from(3u8) {
        return Err(Error::Domain("public exponent must be odd and at least 3"));
    }
    Ok(())
}

/// Generates a key pair whose modulus has exactly `bits` bits and whose public
/// exponent is exactly `e`. Deterministic in `seed`.
pub fn rsa_keygen_with_exponent(bits: u64, e: &BigUint, seed: u64) -> Result<RsaKeyPair> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    keygen_from_rng(bits, e, &mut rng)
}

/// Same as [`rsa_keygen_with_exponent`] but drawing from a caller-owned stream.
pub fn keygen_from_rng<R: RngCore>(bits: u64, e: &BigUint, rng: &mut R) -> Result<RsaKeyPair> {
    check_keygen_args(bits, e)?;
    let p_bits = bits.div_ceil(2);
    let q_bits = bits - p_bits;
    keygen_from_sampler(e, |which| {
        random_prime(rng, if which == 0 { p_bits } else { q_bits })
    })
}

/// Core retry loop. `sample(0)` yields the first prime and `sample(1)` the second.
pub fn keygen_from_sampler<F>(e: &BigUint, mut sample: F) -> Result<RsaKeyPair>
where
    F: FnMut(u8) -> Result<BigUint>,
{
    for _ in 0..KEYGEN_ATTEMPTS {
        let p = sample(0)?;
        let q = sample(1)?;
        match RsaKeyPair::from_primes(p, q, e.clone()) {
            Ok(pair) => return Ok(pair),
            Err(Error::NotInvertible) | Err(Error::Domain(_)) => continue,
            Err(other) => return Err(other),
        }
    }
    Err(Error::GenerationFailure {
        attempts: KEYGEN_ATTEMPTS,
    })
}
