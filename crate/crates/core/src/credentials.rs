//! CA-issued goods certificates, STTP-issued recoverable-key certificates and
//! the public-key registry through which parties learn each other's keys.
//!
//! A recoverable certificate hides the private exponent `d_bt` behind a mask
//! only the STTP can recompute:
//!
//! ```text
//! H    = hash(sk_t, pk_bt) mod n_bt
//! w_bt = H^-1 * d_bt       mod n_bt
//! d_bt = H * w_bt          mod n_bt
//! ```
//!
//! Reducing mod `n_bt` rather than `φ(n_bt)` is exact because
//! `d_bt < φ(n_bt) < n_bt`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bigint::{hex, hex_bytes, to_hex};
use crate::crypto::rsa::keygen_from_rng;
use crate::crypto::{
    digest_space, hash_int, mod_inv, mul_mod, sym_encrypt, tag, FieldEncoder, PrivateKey,
    PublicKey, RsaKeyPair, SymmetricKey,
};
use crate::error::{Error, Mismatch, Result};

/// Regenerations of `(n_bt, d_bt)` tolerated when the mask is not invertible.
const MASK_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartyId(pub String);

impl PartyId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `CertD_a = (desc_a, hd_a, h_a, ek_a, sign_CA)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodsCertificate {
    #[serde(with = "hex_bytes")]
    pub desc_a: Vec<u8>,
    #[serde(with = "hex")]
    pub hd_a: BigUint,
    #[serde(with = "hex")]
    pub h_a: BigUint,
    #[serde(with = "hex")]
    pub ek_a: BigUint,
    #[serde(with = "hex")]
    pub sign_ca: BigUint,
}

/// `C_bt = (pk_bt, w_bt, s_bt)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecoverableCert {
    pub pk_bt: PublicKey,
    #[serde(with = "hex")]
    pub w_bt: BigUint,
    #[serde(with = "hex")]
    pub s_bt: BigUint,
}

#[derive(Debug, Clone)]
pub struct CaIdentity {
    pub id: PartyId,
    pub keys: RsaKeyPair,
}

#[derive(Debug, Clone)]
pub struct TtpIdentity {
    pub id: PartyId,
    pub keys: RsaKeyPair,
}

/// `h(D_a)`, kept as a full 256-bit digest.
pub fn goods_hash(goods: &[u8]) -> BigUint {
    hash_int(tag::GOODS, goods, &digest_space())
}

/// `h(E_{k_a}(D_a))`, kept as a full 256-bit digest.
pub fn encrypted_goods_hash(ciphertext: &[u8]) -> BigUint {
    hash_int(tag::ENCRYPTED_GOODS, ciphertext, &digest_space())
}

impl GoodsCertificate {
    fn signed_bytes(desc_a: &[u8], hd_a: &BigUint, h_a: &BigUint, ek_a: &BigUint) -> Vec<u8> {
        FieldEncoder::new()
            .bytes(desc_a)
            .int(hd_a)
            .int(h_a)
            .int(ek_a)
            .finish()
    }

    pub fn signed_digest(&self, pk_ca: &PublicKey) -> BigUint {
        let bytes = Self::signed_bytes(&self.desc_a, &self.hd_a, &self.h_a, &self.ek_a);
        hash_int(tag::GOODS_CERT, &bytes, &pk_ca.n)
    }
}

impl CaIdentity {
    pub fn new(id: PartyId, keys: RsaKeyPair) -> Self {
        Self { id, keys }
    }

    pub fn public(&self) -> PublicKey {
        self.keys.public()
    }

    /// Issues `CertD_a` for `goods` encrypted under `k_a`.
    pub fn issue_goods_cert(
        &self,
        goods: &[u8],
        desc_a: &[u8],
        k_a: &SymmetricKey,
        pk_a: &PublicKey,
    ) -> Result<GoodsCertificate> {
        let hd_a = encrypted_goods_hash(&sym_encrypt(k_a, goods));
        self.issue_with_digests(desc_a, hd_a, goods_hash(goods), k_a, pk_a)
    }

    /// Issues a certificate over caller-supplied digests.
    pub fn issue_with_digests(
        &self,
        desc_a: &[u8],
        hd_a: BigUint,
        h_a: BigUint,
        k_a: &SymmetricKey,
        pk_a: &PublicKey,
    ) -> Result<GoodsCertificate> {
        // Re-validate: the key may have been built for a different modulus.
        let k_a = SymmetricKey::new(k_a.value().clone(), &pk_a.n)?;
        let ek_a = pk_a.apply(k_a.value());
        let bytes = GoodsCertificate::signed_bytes(desc_a, &hd_a, &h_a, &ek_a);
        let sign_ca =
            self.keys
                .private()
                .sign_digest(&hash_int(tag::GOODS_CERT, &bytes, &self.keys.n));
        Ok(GoodsCertificate {
            desc_a: desc_a.to_vec(),
            hd_a,
            h_a,
            ek_a,
            sign_ca,
        })
    }

    pub fn sign_registry(&self, registry: &mut PublicRegistry) {
        registry.ca = self.public();
        let digest = registry.signed_digest();
        registry.signature = self.keys.private().sign_digest(&digest);
    }
}

/// Checks the CA signature, then that `hd_a` matches the supplied ciphertext.
pub fn verify_goods_cert(
    cert: &GoodsCertificate,
    ciphertext: &[u8],
    pk_ca: &PublicKey,
) -> std::result::Result<(), Mismatch> {
    if !pk_ca.verify_digest(&cert.signed_digest(pk_ca), &cert.sign_ca) {
        return Err(Mismatch::Signature);
    }
    if encrypted_goods_hash(ciphertext) != cert.hd_a {
        return Err(Mismatch::CiphertextDigest);
    }
    Ok(())
}

impl RecoverableCert {
    pub fn signed_digest(&self, pk_t: &PublicKey) -> BigUint {
        let bytes = FieldEncoder::new()
            .int(&self.pk_bt.e)
            .int(&self.pk_bt.n)
            .int(&self.w_bt)
            .finish();
        hash_int(tag::RECOVERABLE_CERT, &bytes, &pk_t.n)
    }

    /// Canonical encoding of all three components, used wherever `C_bt` is hashed.
    pub fn encode(&self) -> Vec<u8> {
        FieldEncoder::new()
            .int(&self.pk_bt.e)
            .int(&self.pk_bt.n)
            .int(&self.w_bt)
            .int(&self.s_bt)
            .finish()
    }

    /// `e_bt = e_b`: the recoverable key must share its owner's public exponent.
    pub fn check_owner_exponent(&self, pk_b: &PublicKey) -> std::result::Result<(), Mismatch> {
        if self.pk_bt.e == pk_b.e {
            Ok(())
        } else {
            Err(Mismatch::ExponentMismatch)
        }
    }
}

/// Checks `s_bt` under the STTP's public key.
pub fn verify_recoverable_cert(
    cert: &RecoverableCert,
    pk_t: &PublicKey,
) -> std::result::Result<(), Mismatch> {
    if cert.w_bt >= cert.pk_bt.n {
        return Err(Mismatch::Range);
    }
    if pk_t.verify_digest(&cert.signed_digest(pk_t), &cert.s_bt) {
        Ok(())
    } else {
        Err(Mismatch::Signature)
    }
}

impl TtpIdentity {
    pub fn new(id: PartyId, keys: RsaKeyPair) -> Self {
        Self { id, keys }
    }

    pub fn public(&self) -> PublicKey {
        self.keys.public()
    }

    /// `h(sk_t, pk_bt) mod n_bt`, with `sk_t` encoded as canonical hex of `(d_t, n_t)`.
    fn exponent_mask(&self, pk_bt: &PublicKey) -> BigUint {
        let bytes = FieldEncoder::new()
            .bytes(to_hex(&self.keys.d).as_bytes())
            .bytes(to_hex(&self.keys.n).as_bytes())
            .int(&pk_bt.e)
            .int(&pk_bt.n)
            .finish();
        hash_int(tag::EXPONENT_MASK, &bytes, &pk_bt.n)
    }

    /// Generates `(e_b, n_bt, d_bt)` and certifies it. Deterministic in `seed`;
    /// the key pair is regenerated while the mask is not invertible mod `n_bt`.
    pub fn issue_recoverable_cert(
        &self,
        e_b: &BigUint,
        bits: u64,
        seed: u64,
    ) -> Result<(RecoverableCert, PrivateKey)> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..MASK_ATTEMPTS {
            let keys = keygen_from_rng(bits, e_b, &mut rng)?;
            match self.certify_keypair(&keys) {
                Err(Error::NotInvertible) => continue,
                other => return other,
            }
        }
        Err(Error::GenerationFailure {
            attempts: MASK_ATTEMPTS,
        })
    }

    /// Certifies an existing key pair; `NotInvertible` when the mask shares a
    /// factor with `n_bt`.
    pub fn certify_keypair(&self, keys: &RsaKeyPair) -> Result<(RecoverableCert, PrivateKey)> {
        let pk_bt = keys.public();
        let mask_inv = mod_inv(&self.exponent_mask(&pk_bt), &pk_bt.n)?;
        let w_bt = mul_mod(&mask_inv, &keys.d, &pk_bt.n);
        let mut cert = RecoverableCert {
            pk_bt,
            w_bt,
            s_bt: BigUint::default(),
        };
        cert.s_bt = self
            .keys
            .private()
            .sign_digest(&cert.signed_digest(&self.public()));
        Ok((cert, keys.private()))
    }

    /// Unmasks `d_bt` from a certificate this STTP issued.
    pub fn recover_private_exponent(&self, cert: &RecoverableCert) -> Result<BigUint> {
        verify_recoverable_cert(cert, &self.public()).map_err(Error::InvalidCert)?;
        Ok(mul_mod(
            &self.exponent_mask(&cert.pk_bt),
            &cert.w_bt,
            &cert.pk_bt.n,
        ))
    }
}

/// Static public-key directory, signed by the CA.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicRegistry {
    pub ca: PublicKey,
    pub ttp: PublicKey,
    pub parties: BTreeMap<PartyId, PublicKey>,
    /// Recoverable certificates and the party each was issued to.
    pub recoverable: BTreeMap<PartyId, RecoverableCert>,
    #[serde(with = "hex")]
    pub signature: BigUint,
}

impl PublicRegistry {
    pub fn new(ca: PublicKey, ttp: PublicKey) -> Self {
        Self {
            ca,
            ttp,
            parties: BTreeMap::new(),
            recoverable: BTreeMap::new(),
            signature: BigUint::default(),
        }
    }

    pub fn key(&self, id: &PartyId) -> Result<&PublicKey> {
        self.parties
            .get(id)
            .ok_or_else(|| Error::UnknownParty(id.0.clone()))
    }

    /// The party a recoverable certificate was issued to.
    pub fn owner_of(&self, cert: &RecoverableCert) -> Option<&PartyId> {
        self.recoverable
            .iter()
            .find(|(_, issued)| issued.pk_bt == cert.pk_bt)
            .map(|(owner, _)| owner)
    }

    fn signed_digest(&self) -> BigUint {
        let mut enc = FieldEncoder::new().int(&self.ttp.e).int(&self.ttp.n);
        for (id, key) in &self.parties {
            enc = enc.bytes(id.as_str().as_bytes()).int(&key.e).int(&key.n);
        }
        for (id, cert) in &self.recoverable {
            enc = enc.bytes(id.as_str().as_bytes()).bytes(&cert.encode());
        }
        hash_int(tag::REGISTRY, &enc.finish(), &self.ca.n)
    }

    /// Checks the CA signature and every recoverable certificate in the registry.
    pub fn verify(&self) -> std::result::Result<(), Mismatch> {
        if !self
            .ca
            .verify_digest(&self.signed_digest(), &self.signature)
        {
            return Err(Mismatch::Signature);
        }
        for (owner, cert) in &self.recoverable {
            verify_recoverable_cert(cert, &self.ttp)?;
            let pk_b = self.parties.get(owner).ok_or(Mismatch::Signature)?;
            cert.check_owner_exponent(pk_b)?;
        }
        Ok(())
    }
}
