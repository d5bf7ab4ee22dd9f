//! Integer-level cryptographic substrate.

pub mod arith;
pub mod cipher;
pub mod hash;
pub mod prime;
pub mod rsa;

pub use arith::{gcd, is_coprime, mod_inv, mod_pow, mul_mod};
pub use cipher::{sym_decrypt, sym_encrypt, SymmetricKey};
pub use hash::{digest_space, hash_int, tag, FieldEncoder};
pub use prime::{is_probable_prime, random_prime, random_prime_below, MILLER_RABIN_ROUNDS};
pub use rsa::{rsa_keygen_with_exponent, PrivateKey, PublicKey, RsaKeyPair};
