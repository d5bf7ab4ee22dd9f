//! The e-goods provider `P_a`.

use num_bigint::BigUint;
use rand_chacha::rand_core::RngCore;

use super::messages::{SessionId, E1, E2, E3, E4, R1, R2};
use super::{Handled, RejectReason, Transition};
use crate::credentials::{verify_recoverable_cert, CaIdentity, PartyId, PublicRegistry};
use crate::crypto::{random_prime_below, sym_encrypt, PublicKey, RsaKeyPair, SymmetricKey};
use crate::error::Result;
use crate::vres::{
    make_eoo, randomizer_matches, verify_auth_token, vres_recover_receipt, vres_verify, wrap_key,
    Receipt, WrappedKey,
};

#[derive(Debug, Clone)]
pub struct SenderIdentity {
    pub id: PartyId,
    pub keys: RsaKeyPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenderPhase {
    SentE1,
    SentE3,
    Done,
    Dangling,
}

/// One run of the exchange from the sender's side.
#[derive(Debug, Clone)]
pub struct SenderSession {
    session: SessionId,
    me: SenderIdentity,
    peer: PartyId,
    k_a: SymmetricKey,
    r_a: BigUint,
    wrapped: WrappedKey,
    e1: E1,
    e2: Option<(E2, PublicKey)>,
    receipt: Option<Receipt>,
    phase: SenderPhase,
}

impl SenderSession {
    /// Samples `k_a` and a prime `r_a`, obtains `CertD_a` from the CA and builds E1.
    pub fn start<R: RngCore>(
        session: SessionId,
        me: SenderIdentity,
        peer: PartyId,
        goods: &[u8],
        desc: &[u8],
        ca: &CaIdentity,
        rng: &mut R,
    ) -> Result<(Self, E1)> {
        let pk_a = me.keys.public();
        let k_a = SymmetricKey::generate(rng, &pk_a.n)?;
        let r_a = random_prime_below(rng, &pk_a.n, &[&pk_a.n])?;
        let wrapped = wrap_key(&k_a, &r_a, &pk_a)?;
        let cert = ca.issue_goods_cert(goods, desc, &k_a, &pk_a)?;
        let eoo = make_eoo(&me.keys, &cert.h_a);
        let e1 = E1 {
            ciphertext: sym_encrypt(&k_a, goods),
            cert,
            x_a: wrapped.x_a.clone(),
            eoo,
        };
        let state = Self {
            session,
            me,
            peer,
            k_a,
            r_a,
            wrapped,
            e1: e1.clone(),
            e2: None,
            receipt: None,
            phase: SenderPhase::SentE1,
        };
        Ok((state, e1))
    }

    pub fn session(&self) -> SessionId {
        self.session
    }

    pub fn phase(&self) -> SenderPhase {
        self.phase
    }

    pub fn peer(&self) -> &PartyId {
        &self.peer
    }

    pub fn h_a(&self) -> &BigUint {
        &self.e1.cert.h_a
    }

    pub fn r_a(&self) -> &BigUint {
        &self.r_a
    }

    pub fn k_a(&self) -> &SymmetricKey {
        &self.k_a
    }

    pub fn wrapped(&self) -> &WrappedKey {
        &self.wrapped
    }

    pub fn e1(&self) -> &E1 {
        &self.e1
    }

    pub fn receipt(&self) -> Option<&Receipt> {
        self.receipt.as_ref()
    }

    /// Checks `C_bt` under `pk_t`, `e_bt = e_b`, `s_b` over this session's
    /// `y_a` and the sender's identity, and both VRES congruences.
    fn verify_e2(
        &self,
        e2: &E2,
        registry: &PublicRegistry,
    ) -> std::result::Result<PublicKey, RejectReason> {
        let pk_b = registry.key(&self.peer)?.clone();
        verify_recoverable_cert(&e2.c_bt, &registry.ttp).map_err(RejectReason::RecoverableCert)?;
        e2.c_bt
            .check_owner_exponent(&pk_b)
            .map_err(RejectReason::RecoverableCert)?;
        if !verify_auth_token(
            &e2.s_b,
            &pk_b,
            &e2.c_bt,
            &e2.vres.y_b,
            &self.wrapped.y_a,
            &self.me.id,
        ) {
            return Err(RejectReason::TokenMismatch);
        }
        vres_verify(&e2.vres, self.h_a(), &pk_b, &e2.c_bt).map_err(RejectReason::Vres)?;
        Ok(pk_b)
    }

    fn accept_e2(
        &mut self,
        e2: E2,
        registry: &PublicRegistry,
    ) -> std::result::Result<(), RejectReason> {
        match self.verify_e2(&e2, registry) {
            Ok(pk_b) => {
                self.e2 = Some((e2, pk_b));
                Ok(())
            }
            Err(reason) => {
                self.phase = SenderPhase::Dangling;
                Err(reason)
            }
        }
    }

    /// Honest behaviour: verify E2, keep it as recovery material and release `r_a`.
    pub fn on_e2(&mut self, e2: E2, registry: &PublicRegistry) -> Handled<E3> {
        if self.phase != SenderPhase::SentE1 {
            return Ok(Transition::Ignored);
        }
        self.accept_e2(e2, registry)?;
        self.phase = SenderPhase::SentE3;
        Ok(Transition::Emit(E3 {
            r_a: self.r_a.clone(),
        }))
    }

    /// Deviation: verify E2 and keep it, but stop without sending E3. The
    /// returned R1 is everything the STTP needs to release `r_b` later.
    pub fn abort_after_e2(&mut self, e2: E2, registry: &PublicRegistry) -> Handled<R1> {
        if self.phase != SenderPhase::SentE1 {
            return Ok(Transition::Ignored);
        }
        self.accept_e2(e2, registry)?;
        self.phase = SenderPhase::Dangling;
        Ok(Transition::Emit(
            self.recovery_request().expect("E2 was just stored"),
        ))
    }

    /// `<C_bt, y_b, s_b, y_a, r_a>` once E2 has been verified and stored.
    pub fn recovery_request(&self) -> Option<R1> {
        if matches!(self.phase, SenderPhase::SentE1 | SenderPhase::Done) {
            return None;
        }
        let (e2, _) = self.e2.as_ref()?;
        Some(R1::new(
            e2.c_bt.clone(),
            e2.vres.y_b.clone(),
            e2.s_b.clone(),
            self.wrapped.y_a.clone(),
            self.r_a.clone(),
        ))
    }

    fn open_receipt(&mut self, r_b: &BigUint) -> Handled<Receipt> {
        let (e2, pk_b) = self.e2.as_ref().expect("phase implies stored E2");
        if !randomizer_matches(r_b, &e2.vres.y_b, pk_b, &e2.c_bt.pk_bt) {
            self.phase = SenderPhase::Dangling;
            return Err(RejectReason::BadRb);
        }
        match vres_recover_receipt(&e2.vres.x_b, r_b, pk_b, self.h_a(), self.peer.clone()) {
            Ok(receipt) => {
                self.receipt = Some(receipt.clone());
                self.phase = SenderPhase::Done;
                Ok(Transition::Emit(receipt))
            }
            Err(_) => {
                self.phase = SenderPhase::Dangling;
                Err(RejectReason::BadRb)
            }
        }
    }

    /// Checks `r_b^e_b mod (n_b * n_bt) = y_b` and extracts `rec_b` from `x_b`.
    pub fn on_e4(&mut self, e4: E4) -> Handled<Receipt> {
        if self.phase != SenderPhase::SentE3 {
            return Ok(Transition::Ignored);
        }
        self.open_receipt(&e4.r_b)
    }

    /// Same extraction for an `r_b` released by the STTP.
    pub fn on_r2(&mut self, r2: R2) -> Handled<Receipt> {
        let waiting = matches!(self.phase, SenderPhase::SentE3 | SenderPhase::Dangling);
        if !waiting || self.e2.is_none() {
            return Ok(Transition::Ignored);
        }
        self.open_receipt(&r2.r_b)
    }

    /// Stops the session without any message.
    pub fn abandon(&mut self) {
        if self.phase != SenderPhase::Done {
            self.phase = SenderPhase::Dangling;
        }
    }
}
