//! Modular arithmetic over [`BigUint`].

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// `base^exp mod m`.
pub fn mod_pow(base: &BigUint, exp: &BigUint, m: &BigUint) -> Result<BigUint> {
    if *m < BigUint::from(2u8) {
        return Err(Error::Domain("modulus must be at least 2"));
    }
    Ok(base.modpow(exp, m))
}

/// Multiplicative inverse of `a` modulo `m`.
pub fn mod_inv(a: &BigUint, m: &BigUint) -> Result<BigUint> {
    if *m < BigUint::from(2u8) {
        return Err(Error::Domain("modulus must be at least 2"));
    }
    (a % m).modinv(m).ok_or(Error::NotInvertible)
}

pub fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    a.gcd(b)
}

pub fn is_coprime(a: &BigUint, b: &BigUint) -> bool {
    gcd(a, b).is_one()
}

/// `(a * b) mod m`, `m` non-zero.
pub fn mul_mod(a: &BigUint, b: &BigUint, m: &BigUint) -> BigUint {
    debug_assert!(!m.is_zero());
    (a * b) % m
}
