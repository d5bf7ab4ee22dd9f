//! The purchaser `P_b`.
//!
//! [`ReceiverOutput`] has no recovery-request variant: nothing reachable from
//! a receiver session can emit an R1.

use num_bigint::BigUint;
use rand_chacha::rand_core::RngCore;

use super::messages::{Message, SessionId, E1, E2, E3, E4, R3};
use super::{Handled, RejectReason, Transition};
use crate::credentials::{goods_hash, verify_goods_cert, PartyId, PublicRegistry, RecoverableCert};
use crate::crypto::{random_prime_below, sym_decrypt, PrivateKey, PublicKey, RsaKeyPair};
use crate::error::Mismatch;
use crate::vres::{
    derive_y_a, make_auth_token, unwrap_key, verify_eoo, vres_generate, EvidenceOfOrigin,
};

/// Long-term material of the receiver, including the recoverable key pair
/// certified by the STTP.
#[derive(Debug, Clone)]
pub struct ReceiverIdentity {
    pub id: PartyId,
    pub keys: RsaKeyPair,
    pub c_bt: RecoverableCert,
    pub sk_bt: PrivateKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverPhase {
    Init,
    SentE2,
    Done,
    Dangling,
}

/// Decrypted goods together with the evidence of origin that came with them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodsDelivery {
    pub goods: Vec<u8>,
    pub h_a: BigUint,
    pub eoo: EvidenceOfOrigin,
    pub originator: PartyId,
}

/// Everything a receiver session can emit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReceiverOutput {
    E2(E2),
    E4(E4, GoodsDelivery),
    /// Goods unlocked by an `r_a` relayed in R3; nothing is sent back.
    Goods(GoodsDelivery),
}

#[derive(Debug, Clone)]
struct Accepted {
    peer: PartyId,
    pk_a: PublicKey,
    e1: E1,
    r_b: BigUint,
}

#[derive(Debug, Clone)]
pub struct ReceiverSession {
    session: SessionId,
    me: ReceiverIdentity,
    accepted: Option<Accepted>,
    phase: ReceiverPhase,
}

impl ReceiverSession {
    pub fn new(session: SessionId, me: ReceiverIdentity) -> Self {
        Self {
            session,
            me,
            accepted: None,
            phase: ReceiverPhase::Init,
        }
    }

    pub fn session(&self) -> SessionId {
        self.session
    }

    pub fn phase(&self) -> ReceiverPhase {
        self.phase
    }

    pub fn r_b(&self) -> Option<&BigUint> {
        self.accepted.as_ref().map(|a| &a.r_b)
    }

    pub fn e1(&self) -> Option<&E1> {
        self.accepted.as_ref().map(|a| &a.e1)
    }

    fn reject<T>(&mut self, reason: RejectReason) -> Handled<T> {
        self.phase = ReceiverPhase::Dangling;
        Err(reason)
    }

    /// Verifies E1, then answers with the VRES, `s_b` and `C_bt`.
    pub fn on_e1<R: RngCore>(
        &mut self,
        from: &PartyId,
        e1: E1,
        registry: &PublicRegistry,
        rng: &mut R,
    ) -> Handled<E2> {
        if self.phase != ReceiverPhase::Init {
            return Ok(Transition::Ignored);
        }
        match self.build_e2(from, &e1, registry, rng) {
            Ok((e2, pk_a, r_b)) => {
                self.accepted = Some(Accepted {
                    peer: from.clone(),
                    pk_a,
                    e1,
                    r_b,
                });
                self.phase = ReceiverPhase::SentE2;
                Ok(Transition::Emit(e2))
            }
            Err(reason) => self.reject(reason),
        }
    }

    fn build_e2<R: RngCore>(
        &self,
        from: &PartyId,
        e1: &E1,
        registry: &PublicRegistry,
        rng: &mut R,
    ) -> Result<(E2, PublicKey, BigUint), RejectReason> {
        let pk_a = registry.key(from)?.clone();
        verify_goods_cert(&e1.cert, &e1.ciphertext, &registry.ca).map_err(|m| match m {
            Mismatch::CiphertextDigest => RejectReason::HdMismatch,
            other => RejectReason::GoodsCert(other),
        })?;
        if !verify_eoo(&e1.eoo, &e1.cert.h_a, &pk_a) {
            return Err(RejectReason::EooMismatch);
        }
        if e1.x_a >= pk_a.n {
            return Err(RejectReason::WrappedKeyMismatch);
        }
        let y_a = derive_y_a(&e1.x_a, &e1.cert.ek_a, &pk_a)?;

        let keys = &self.me.keys;
        let n_bt = &self.me.c_bt.pk_bt.n;
        let bound = std::cmp::min(&keys.n, n_bt);
        let r_b = random_prime_below(rng, bound, &[&keys.n, n_bt])?;
        let vres = vres_generate(&e1.cert.h_a, keys, &self.me.c_bt, &self.me.sk_bt, &r_b)?;
        let s_b = make_auth_token(keys, &self.me.c_bt, &vres.y_b, &y_a, from);
        Ok((
            E2 {
                vres,
                s_b,
                c_bt: self.me.c_bt.clone(),
            },
            pk_a,
            r_b,
        ))
    }

    /// Unwraps `k_a` with a candidate `r_a`, checks it against `ek_a` and the
    /// goods hash, and decrypts.
    fn open_goods(&self, r_a: &BigUint) -> Result<GoodsDelivery, RejectReason> {
        let acc = self.accepted.as_ref().expect("phase implies accepted E1");
        let cert = &acc.e1.cert;
        let k_a = unwrap_key(&acc.e1.x_a, r_a, &acc.pk_a.n).map_err(|_| RejectReason::BadKey)?;
        if acc.pk_a.apply(k_a.value()) != cert.ek_a {
            return Err(RejectReason::BadKey);
        }
        let goods = sym_decrypt(&k_a, &acc.e1.ciphertext);
        if goods_hash(&goods) != cert.h_a {
            return Err(RejectReason::BadKey);
        }
        Ok(GoodsDelivery {
            goods,
            h_a: cert.h_a.clone(),
            eoo: acc.e1.eoo.clone(),
            originator: acc.peer.clone(),
        })
    }

    /// On a good `r_a`: goods delivered and `r_b` released. On a bad one
    /// nothing is released.
    pub fn on_e3(&mut self, e3: E3) -> Handled<(E4, GoodsDelivery)> {
        if self.phase != ReceiverPhase::SentE2 {
            return Ok(Transition::Ignored);
        }
        match self.open_goods(&e3.r_a) {
            Ok(delivery) => {
                self.phase = ReceiverPhase::Done;
                let r_b = self.r_b().expect("accepted").clone();
                Ok(Transition::Emit((E4 { r_b }, delivery)))
            }
            Err(reason) => self.reject(reason),
        }
    }

    /// Tries an STTP-relayed `r_a` against this session's goods only.
    pub fn on_r3(&mut self, r3: R3) -> Handled<GoodsDelivery> {
        if self.phase != ReceiverPhase::SentE2 {
            return Ok(Transition::Ignored);
        }
        match self.open_goods(&r3.r_a) {
            Ok(delivery) => {
                self.phase = ReceiverPhase::Done;
                Ok(Transition::Emit(delivery))
            }
            Err(reason) => self.reject(reason),
        }
    }

    /// Generic entry point used by the simulator.
    pub fn handle<R: RngCore>(
        &mut self,
        from: &PartyId,
        message: Message,
        registry: &PublicRegistry,
        rng: &mut R,
    ) -> Handled<ReceiverOutput> {
        let out = match message {
            Message::E1(e1) => self
                .on_e1(from, e1, registry, rng)?
                .emitted()
                .map(ReceiverOutput::E2),
            Message::E3(e3) => self
                .on_e3(e3)?
                .emitted()
                .map(|(e4, d)| ReceiverOutput::E4(e4, d)),
            Message::R3(r3) => self.on_r3(r3)?.emitted().map(ReceiverOutput::Goods),
            Message::E2(_) | Message::E4(_) | Message::R1(_) | Message::R2(_) => None,
        };
        Ok(out.map_or(Transition::Ignored, Transition::Emit))
    }
}
