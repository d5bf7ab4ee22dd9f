//! Message types for the exchange (E1–E4) and recovery (R1–R3) sub-protocols.
//!
//! Field order follows the protocol figure; transcripts serialize fields in
//! declaration order.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bigint::{hex, hex_bytes};
use crate::credentials::{GoodsCertificate, PartyId, RecoverableCert};
use crate::vres::{AuthToken, EvidenceOfOrigin, VresTriple};

/// Routing metadata assigned by the harness. Never covered by any signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(pub u64);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// `P_a -> P_b: E_{k_a}(D_a), CertD_a, x_a, E_{sk_a}(h_a)`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct E1 {
    #[serde(with = "hex_bytes")]
    pub ciphertext: Vec<u8>,
    pub cert: GoodsCertificate,
    #[serde(with = "hex")]
    pub x_a: BigUint,
    pub eoo: EvidenceOfOrigin,
}

/// `P_b -> P_a: (x_b, xx_b, y_b), s_b, C_bt`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct E2 {
    pub vres: VresTriple,
    pub s_b: AuthToken,
    pub c_bt: RecoverableCert,
}

/// `P_a -> P_b: r_a`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct E3 {
    #[serde(with = "hex")]
    pub r_a: BigUint,
}

/// `P_b -> P_a: r_b`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct E4 {
    #[serde(with = "hex")]
    pub r_b: BigUint,
}

/// `P_a -> P_t: C_bt, y_b, s_b, y_a, r_a`
///
/// Only a sender session can build one (see
/// [`SenderSession::recovery_request`](super::SenderSession::recovery_request));
/// the receiver has no way to invoke recovery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct R1 {
    c_bt: RecoverableCert,
    #[serde(with = "hex")]
    y_b: BigUint,
    s_b: AuthToken,
    #[serde(with = "hex")]
    y_a: BigUint,
    #[serde(with = "hex")]
    r_a: BigUint,
}

impl R1 {
    pub(crate) fn new(
        c_bt: RecoverableCert,
        y_b: BigUint,
        s_b: AuthToken,
        y_a: BigUint,
        r_a: BigUint,
    ) -> Self {
        Self {
            c_bt,
            y_b,
            s_b,
            y_a,
            r_a,
        }
    }

    pub fn c_bt(&self) -> &RecoverableCert {
        &self.c_bt
    }

    pub fn y_b(&self) -> &BigUint {
        &self.y_b
    }

    pub fn s_b(&self) -> &AuthToken {
        &self.s_b
    }

    pub fn y_a(&self) -> &BigUint {
        &self.y_a
    }

    pub fn r_a(&self) -> &BigUint {
        &self.r_a
    }
}

/// `P_t -> P_a: r_b`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct R2 {
    #[serde(with = "hex")]
    pub r_b: BigUint,
}

/// `P_t -> P_b: r_a`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct R3 {
    #[serde(with = "hex")]
    pub r_a: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step")]
pub enum Message {
    E1(E1),
    E2(E2),
    E3(E3),
    E4(E4),
    R1(R1),
    R2(R2),
    R3(R3),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    E1,
    E2,
    E3,
    E4,
    R1,
    R2,
    R3,
}

impl Message {
    pub fn step(&self) -> Step {
        match self {
            Message::E1(_) => Step::E1,
            Message::E2(_) => Step::E2,
            Message::E3(_) => Step::E3,
            Message::E4(_) => Step::E4,
            Message::R1(_) => Step::R1,
            Message::R2(_) => Step::R2,
            Message::R3(_) => Step::R3,
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A message plus its routing metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub session: SessionId,
    pub from: PartyId,
    pub to: PartyId,
    #[serde(flatten)]
    pub message: Message,
}
