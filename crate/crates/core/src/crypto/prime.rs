//! Seeded random integers and probabilistic primality.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_chacha::rand_core::RngCore;

use super::arith::is_coprime;
use crate::error::{Error, Result};

/// Miller–Rabin rounds applied to every candidate that survives trial division.
pub const MILLER_RABIN_ROUNDS: usize = 40;

const SMALL_PRIMES: [u32; 53] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241,
];

/// Uniform integer with at most `bits` bits.
pub fn random_bits<R: RngCore>(rng: &mut R, bits: u64) -> BigUint {
    if bits == 0 {
        return BigUint::zero();
    }
    let len = bits.div_ceil(8) as usize;
    let mut bytes = vec![0u8; len];
    rng.fill_bytes(&mut bytes);
    let excess = (len as u64) * 8 - bits;
    bytes[0] &= 0xffu8 >> excess;
    BigUint::from_bytes_be(&bytes)
}

/// Uniform integer in `[0, bound)` by rejection sampling. `bound` must be non-zero.
pub fn random_below<R: RngCore>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "empty sampling range");
    let bits = bound.bits();
    loop {
        let candidate = random_bits(rng, bits);
        if candidate < *bound {
            return candidate;
        }
    }
}

/// Uniform integer in `[low, high)`.
pub fn random_range<R: RngCore>(rng: &mut R, low: &BigUint, high: &BigUint) -> BigUint {
    assert!(low < high, "empty sampling range");
    low + random_below(rng, &(high - low))
}

/// Miller–Rabin with [`MILLER_RABIN_ROUNDS`] random bases drawn from `rng`.
pub fn is_probable_prime<R: RngCore>(n: &BigUint, rng: &mut R) -> bool {
    let two = BigUint::from(2u8);
    if *n < two {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }

    let n_minus_one = n - 1u8;
    let s = n_minus_one.trailing_zeros().expect("n - 1 is non-zero");
    let d = &n_minus_one >> s;

    'witness: for _ in 0..MILLER_RABIN_ROUNDS {
        let a = random_range(rng, &two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
            if x.is_one() {
                return false;
            }
        }
        return false;
    }
    true
}

/// Prime with exactly `bits` bits whose two top bits are set, so that the
/// product of two such primes has exactly the sum of their bit lengths.
pub fn random_prime<R: RngCore>(rng: &mut R, bits: u64) -> Result<BigUint> {
    if bits < 3 {
        return Err(Error::Domain("prime bit length must be at least 3"));
    }
    let top = (BigUint::one() << (bits - 1)) | (BigUint::one() << (bits - 2));
    // Enough to find a prime with overwhelming probability for any bit length we use.
    let attempts = 64 * bits as usize + 1024;
    for _ in 0..attempts {
        let candidate = random_bits(rng, bits) | &top | BigUint::one();
        if is_probable_prime(&candidate, rng) {
            return Ok(candidate);
        }
    }
    Err(Error::GenerationFailure { attempts })
}

/// Prime `r` with `1 < r < bound` that is coprime to every modulus in `coprime_to`.
pub fn random_prime_below<R: RngCore>(
    rng: &mut R,
    bound: &BigUint,
    coprime_to: &[&BigUint],
) -> Result<BigUint> {
    let three = BigUint::from(3u8);
    if *bound <= three {
        return Err(Error::Domain("no prime randomizer fits below the bound"));
    }
    let attempts = 64 * bound.bits() as usize + 1024;
    for _ in 0..attempts {
        let mut candidate = random_range(rng, &BigUint::from(2u8), bound);
        if candidate.is_even() && candidate != BigUint::from(2u8) {
            candidate -= 1u8;
        }
        if is_probable_prime(&candidate, rng)
            && coprime_to.iter().all(|m| is_coprime(&candidate, m))
        {
            return Ok(candidate);
        }
    }
    Err(Error::GenerationFailure { attempts })
}
