//! Verifiable and recoverable encrypted signatures over RSA, plus the key
//! wrapping, receipts, authorization tokens and evidence of origin built
//! around them.
//!
//! # Generation
//!
//! With `N = n_b * n_bt`, a shared public exponent `e = e_b = e_bt` and a
//! prime randomizer `r_b < min(n_b, n_bt)`:
//!
//! ```text
//! y_b  = r_b^e                          mod N
//! x_b  = r_b * h_a^d_b                  mod n_b    (= r_b * rec_b)
//! xx_b = r_b * hash(y_b)^d_bt           mod n_bt
//! ```
//!
//! # Verification
//!
//! Raising `x_b` and `xx_b` to the public exponent removes the private
//! exponents and leaves `r_b^e`, which the verifier only sees through `y_b`:
//!
//! ```text
//! x_b^e  ≡ (y_b mod n_b)  * h_a       (mod n_b)
//! xx_b^e ≡ (y_b mod n_bt) * hash(y_b) (mod n_bt)
//! ```
//!
//! Both congruences hold for honest triples and the verifier never learns
//! `rec_b` itself, only that `x_b` blinds a signature on `h_a`.
//!
//! # Recovery
//!
//! `y_b` decrypts to the same `r_b` under either residue: the receiver takes
//! `(y_b mod n_b)^d_b mod n_b`, the STTP takes `(y_b mod n_bt)^d_bt mod n_bt`
//! after unmasking `d_bt` from the recoverable certificate. Both agree because
//! `r_b` is below both moduli. `rec_b = x_b * r_b^-1 mod n_b` then follows.

use num_bigint::BigUint;
use num_traits::One;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bigint::hex;
use crate::credentials::{PartyId, RecoverableCert};
use crate::crypto::{
    hash_int, is_coprime, is_probable_prime, mod_inv, mul_mod, tag, FieldEncoder, PrivateKey,
    PublicKey, RsaKeyPair, SymmetricKey,
};
use crate::error::{Error, Mismatch, Result};

/// `(x_a, ek_a, y_a)`, tied together by `x_a^e_a ≡ y_a * ek_a (mod n_a)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrappedKey {
    #[serde(with = "hex")]
    pub x_a: BigUint,
    #[serde(with = "hex")]
    pub ek_a: BigUint,
    #[serde(with = "hex")]
    pub y_a: BigUint,
}

/// `(y_b, x_b, xx_b)`, serialized in message order `(x_b, xx_b, y_b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VresTriple {
    #[serde(with = "hex")]
    pub x_b: BigUint,
    #[serde(with = "hex")]
    pub xx_b: BigUint,
    #[serde(with = "hex")]
    pub y_b: BigUint,
}

/// `rec_b = h_a^d_b mod n_b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Receipt {
    #[serde(with = "hex")]
    pub rec_b: BigUint,
    #[serde(with = "hex")]
    pub h_a: BigUint,
    pub signer: PartyId,
}

/// `s_b`, authorizing recovery of the receipt by the STTP.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuthToken {
    #[serde(with = "hex")]
    pub s_b: BigUint,
}

/// `E_{sk_a}(h_a)`. Binds no receiver and no session.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvidenceOfOrigin {
    #[serde(with = "hex")]
    pub eoo: BigUint,
}

fn is_prime(n: &BigUint) -> bool {
    // Fixed witness stream: the check must not depend on caller state.
    is_probable_prime(n, &mut ChaCha20Rng::seed_from_u64(0x5eed))
}

fn check_randomizer(r: &BigUint, moduli: &[&BigUint]) -> Result<()> {
    let ok =
        *r > BigUint::one() && moduli.iter().all(|m| r < *m && is_coprime(r, m)) && is_prime(r);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidRandomizer)
    }
}

/// `x_a = r_a * k_a mod n_a`, `ek_a = k_a^e_a`, `y_a = r_a^e_a`.
pub fn wrap_key(k_a: &SymmetricKey, r_a: &BigUint, pk_a: &PublicKey) -> Result<WrappedKey> {
    check_randomizer(r_a, &[&pk_a.n])?;
    Ok(WrappedKey {
        x_a: mul_mod(r_a, k_a.value(), &pk_a.n),
        ek_a: pk_a.apply(k_a.value()),
        y_a: pk_a.apply(r_a),
    })
}

impl WrappedKey {
    pub fn is_consistent(&self, pk_a: &PublicKey) -> bool {
        pk_a.apply(&self.x_a) == mul_mod(&self.y_a, &self.ek_a, &pk_a.n)
    }
}

/// `y_a = x_a^e_a * ek_a^-1 mod n_a`; lets the receiver learn `y_a`, which E1 omits.
pub fn derive_y_a(x_a: &BigUint, ek_a: &BigUint, pk_a: &PublicKey) -> Result<BigUint> {
    let ek_inv = mod_inv(ek_a, &pk_a.n)?;
    Ok(mul_mod(&pk_a.apply(x_a), &ek_inv, &pk_a.n))
}

/// `k_a = x_a * r_a^-1 mod n_a`.
pub fn unwrap_key(x_a: &BigUint, r_a: &BigUint, n_a: &BigUint) -> Result<SymmetricKey> {
    let r_inv = mod_inv(r_a, n_a)?;
    Ok(SymmetricKey::from_raw(mul_mod(x_a, &r_inv, n_a)))
}

/// `hash(y_b) mod n_bt`, the value `xx_b` signs under `sk_bt`.
pub fn control_digest(y_b: &BigUint, n_bt: &BigUint) -> BigUint {
    hash_int(tag::VRES_CONTROL, &y_b.to_bytes_be(), n_bt)
}

/// Builds the VRES triple for `h_a`.
pub fn vres_generate(
    h_a: &BigUint,
    keys_b: &RsaKeyPair,
    cert: &RecoverableCert,
    sk_bt: &PrivateKey,
    r_b: &BigUint,
) -> Result<VresTriple> {
    vres_generate_with(h_a, keys_b, cert, sk_bt, r_b, control_digest)
}

/// [`vres_generate`] with the control hash supplied by the caller.
pub fn vres_generate_with<F>(
    h_a: &BigUint,
    keys_b: &RsaKeyPair,
    cert: &RecoverableCert,
    sk_bt: &PrivateKey,
    r_b: &BigUint,
    control: F,
) -> Result<VresTriple>
where
    F: Fn(&BigUint, &BigUint) -> BigUint,
{
    let n_b = &keys_b.n;
    let n_bt = &cert.pk_bt.n;
    if cert.pk_bt.e != keys_b.e || sk_bt.n != *n_bt {
        return Err(Error::InvalidCert(Mismatch::ExponentMismatch));
    }
    check_randomizer(r_b, &[n_b, n_bt])?;

    let y_b = r_b.modpow(&keys_b.e, &(n_b * n_bt));
    let rec_b = keys_b.private().sign_digest(h_a);
    let x_b = mul_mod(r_b, &rec_b, n_b);
    let xx_b = mul_mod(r_b, &sk_bt.sign_digest(&control(&y_b, n_bt)), n_bt);
    Ok(VresTriple { x_b, xx_b, y_b })
}

/// Checks both verification congruences and the range of every component.
pub fn vres_verify(
    v: &VresTriple,
    h_a: &BigUint,
    pk_b: &PublicKey,
    cert: &RecoverableCert,
) -> std::result::Result<(), Mismatch> {
    vres_verify_with(v, h_a, pk_b, cert, control_digest)
}

pub fn vres_verify_with<F>(
    v: &VresTriple,
    h_a: &BigUint,
    pk_b: &PublicKey,
    cert: &RecoverableCert,
    control: F,
) -> std::result::Result<(), Mismatch>
where
    F: Fn(&BigUint, &BigUint) -> BigUint,
{
    let n_b = &pk_b.n;
    let pk_bt = &cert.pk_bt;
    cert.check_owner_exponent(pk_b)?;
    if v.y_b >= n_b * &pk_bt.n || v.x_b >= *n_b || v.xx_b >= pk_bt.n {
        return Err(Mismatch::Range);
    }
    let receipt_side = mul_mod(&(&v.y_b % n_b), &(h_a % n_b), n_b);
    if pk_b.apply(&v.x_b) != receipt_side {
        return Err(Mismatch::ReceiptCongruence);
    }
    let control_side = mul_mod(&(&v.y_b % &pk_bt.n), &control(&v.y_b, &pk_bt.n), &pk_bt.n);
    if pk_bt.apply(&v.xx_b) != control_side {
        return Err(Mismatch::ControlCongruence);
    }
    Ok(())
}

/// `rec_b = x_b * r_b^-1 mod n_b`, accepted only if `rec_b^e_b ≡ h_a (mod n_b)`.
pub fn vres_recover_receipt(
    x_b: &BigUint,
    r_b: &BigUint,
    pk_b: &PublicKey,
    h_a: &BigUint,
    signer: PartyId,
) -> Result<Receipt> {
    let r_inv = mod_inv(r_b, &pk_b.n)?;
    let receipt = Receipt {
        rec_b: mul_mod(x_b, &r_inv, &pk_b.n),
        h_a: h_a.clone(),
        signer,
    };
    if receipt.verify(pk_b) {
        Ok(receipt)
    } else {
        Err(Error::RecoveryMismatch)
    }
}

/// STTP-side decryption of `y_b`: `(y_b mod n_bt)^d_bt mod n_bt`.
pub fn ttp_recover_rb(y_b: &BigUint, d_bt: &BigUint, n_bt: &BigUint) -> BigUint {
    (y_b % n_bt).modpow(d_bt, n_bt)
}

/// Receiver-side decryption of `y_b`: `(y_b mod n_b)^d_b mod n_b`.
pub fn receiver_recover_rb(y_b: &BigUint, keys_b: &RsaKeyPair) -> BigUint {
    (y_b % &keys_b.n).modpow(&keys_b.d, &keys_b.n)
}

/// `r_b^e_b mod (n_b * n_bt) == y_b`.
pub fn randomizer_matches(
    r_b: &BigUint,
    y_b: &BigUint,
    pk_b: &PublicKey,
    pk_bt: &PublicKey,
) -> bool {
    r_b.modpow(&pk_b.e, &(&pk_b.n * &pk_bt.n)) == *y_b
}

impl Receipt {
    /// Signs `h_a` directly, as the receiver does when cooperating.
    pub fn sign(keys_b: &RsaKeyPair, h_a: &BigUint, signer: PartyId) -> Self {
        Self {
            rec_b: keys_b.private().sign_digest(h_a),
            h_a: h_a.clone(),
            signer,
        }
    }

    pub fn verify(&self, pk_b: &PublicKey) -> bool {
        pk_b.verify_digest(&self.h_a, &self.rec_b)
    }
}

fn token_digest(
    cert: &RecoverableCert,
    y_b: &BigUint,
    y_a: &BigUint,
    pa_id: &PartyId,
    n_b: &BigUint,
) -> BigUint {
    let bytes = FieldEncoder::new()
        .bytes(&cert.encode())
        .int(y_b)
        .int(y_a)
        .bytes(pa_id.as_str().as_bytes())
        .finish();
    hash_int(tag::AUTH_TOKEN, &bytes, n_b)
}

/// `s_b = hash(C_bt, y_b, y_a, P_a)^d_b mod n_b`. No session identifier is hashed.
pub fn make_auth_token(
    keys_b: &RsaKeyPair,
    cert: &RecoverableCert,
    y_b: &BigUint,
    y_a: &BigUint,
    pa_id: &PartyId,
) -> AuthToken {
    AuthToken {
        s_b: keys_b
            .private()
            .sign_digest(&token_digest(cert, y_b, y_a, pa_id, &keys_b.n)),
    }
}

pub fn verify_auth_token(
    token: &AuthToken,
    pk_b: &PublicKey,
    cert: &RecoverableCert,
    y_b: &BigUint,
    y_a: &BigUint,
    pa_id: &PartyId,
) -> bool {
    pk_b.verify_digest(&token_digest(cert, y_b, y_a, pa_id, &pk_b.n), &token.s_b)
}

pub fn make_eoo(keys_a: &RsaKeyPair, h_a: &BigUint) -> EvidenceOfOrigin {
    EvidenceOfOrigin {
        eoo: keys_a.private().sign_digest(h_a),
    }
}

/// `eoo^e_a ≡ h_a (mod n_a)`. Whoever presents the pair is irrelevant.
pub fn verify_eoo(eoo: &EvidenceOfOrigin, h_a: &BigUint, pk_a: &PublicKey) -> bool {
    pk_a.verify_digest(h_a, &eoo.eoo)
}
