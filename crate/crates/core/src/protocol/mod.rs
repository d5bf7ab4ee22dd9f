//! Party state machines for the exchange and recovery sub-protocols.
//!
//! ```text
//! E1  P_a -> P_b  E_{k_a}(D_a), CertD_a, x_a, E_{sk_a}(h_a)
//! E2  P_b -> P_a  (x_b, xx_b, y_b), s_b, C_bt
//! E3  P_a -> P_b  r_a
//! E4  P_b -> P_a  r_b
//!
//! R1  P_a -> P_t  C_bt, y_b, s_b, y_a, r_a
//! R2  P_t -> P_a  r_b
//! R3  P_t -> P_b  r_a
//! ```
//!
//! There is no abort sub-protocol: a stopped session simply dangles. Only the
//! sender can build an R1, and the STTP keeps no memory across sessions.

mod ledger;
mod messages;
mod receiver;
mod sender;
mod ttp;

pub use ledger::{receipt_is_valid, EooHolding, EvidenceLedger, GoodsHolding};
pub use messages::{Envelope, Message, SessionId, Step, E1, E2, E3, E4, R1, R2, R3};
pub use receiver::{
    GoodsDelivery, ReceiverIdentity, ReceiverOutput, ReceiverPhase, ReceiverSession,
};
pub use sender::{SenderIdentity, SenderPhase, SenderSession};
pub use ttp::{RecoveryOutcome, TtpService};

use thiserror::Error;

use crate::error::{Error as CryptoError, Mismatch};

/// Why an honest party refused a message. The session is left dangling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RejectReason {
    #[error("unknown party")]
    UnknownParty,
    #[error("goods certificate: {0}")]
    GoodsCert(Mismatch),
    #[error("encrypted goods do not match hd_a")]
    HdMismatch,
    #[error("evidence of origin does not verify")]
    EooMismatch,
    #[error("recoverable certificate: {0}")]
    RecoverableCert(Mismatch),
    #[error("authorization token does not verify")]
    TokenMismatch,
    #[error("VRES: {0}")]
    Vres(Mismatch),
    #[error("y_a is not r_a^e_a")]
    WrappedKeyMismatch,
    #[error("r_a does not unlock the goods")]
    BadKey,
    #[error("r_b does not open the receipt")]
    BadRb,
    #[error("crypto failure: {0}")]
    Crypto(CryptoError),
}

impl RejectReason {
    /// Stable short identifier used in transcripts.
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::UnknownParty => "unknown-party",
            RejectReason::GoodsCert(_) => "goods-cert",
            RejectReason::HdMismatch => "hd-mismatch",
            RejectReason::EooMismatch => "eoo-mismatch",
            RejectReason::RecoverableCert(_) => "recoverable-cert",
            RejectReason::TokenMismatch => "token-mismatch",
            RejectReason::Vres(_) => "vres-mismatch",
            RejectReason::WrappedKeyMismatch => "y_a-mismatch",
            RejectReason::BadKey => "bad-key",
            RejectReason::BadRb => "bad-rb",
            RejectReason::Crypto(_) => "crypto",
        }
    }
}

impl From<CryptoError> for RejectReason {
    fn from(e: CryptoError) -> Self {
        match e {
            CryptoError::UnknownParty(_) => RejectReason::UnknownParty,
            other => RejectReason::Crypto(other),
        }
    }
}

/// Outcome of feeding a message to a party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transition<T> {
    /// The message was accepted and produced output.
    Emit(T),
    /// The message did not fit the current phase; state is unchanged.
    Ignored,
}

impl<T> Transition<T> {
    pub fn emitted(self) -> Option<T> {
        match self {
            Transition::Emit(v) => Some(v),
            Transition::Ignored => None,
        }
    }

    pub fn is_ignored(&self) -> bool {
        matches!(self, Transition::Ignored)
    }
}

pub type Handled<T> = Result<Transition<T>, RejectReason>;
