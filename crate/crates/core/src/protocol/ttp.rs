//! The semi-trusted third party `P_t`.

use super::messages::{R1, R2, R3};
use super::RejectReason;
use crate::credentials::{verify_recoverable_cert, PartyId, PublicRegistry, TtpIdentity};
use crate::vres::{ttp_recover_rb, verify_auth_token};

/// R2 for the requester and R3 for the certificate owner; emitted together or not at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryOutcome {
    pub r2: R2,
    pub r3: R3,
    pub receiver: PartyId,
}

/// Stateless recovery service: no per-session memory, no freshness check.
#[derive(Debug, Clone)]
pub struct TtpService {
    identity: TtpIdentity,
}

impl TtpService {
    pub fn new(identity: TtpIdentity) -> Self {
        Self { identity }
    }

    pub fn identity(&self) -> &TtpIdentity {
        &self.identity
    }

    /// Checks `C_bt`, `s_b` over `(C_bt, y_b, y_a, requester)` and
    /// `y_a = r_a^e_a`, then decrypts `r_b` from `y_b` with the unmasked `d_bt`.
    pub fn on_r1(
        &self,
        requester: &PartyId,
        r1: &R1,
        registry: &PublicRegistry,
    ) -> Result<RecoveryOutcome, RejectReason> {
        let c_bt = r1.c_bt();
        verify_recoverable_cert(c_bt, &self.identity.public())
            .map_err(RejectReason::RecoverableCert)?;
        let receiver = registry
            .owner_of(c_bt)
            .ok_or(RejectReason::UnknownParty)?
            .clone();
        let pk_b = registry.key(&receiver)?;
        let pk_a = registry.key(requester)?;
        c_bt.check_owner_exponent(pk_b)
            .map_err(RejectReason::RecoverableCert)?;
        if !verify_auth_token(r1.s_b(), pk_b, c_bt, r1.y_b(), r1.y_a(), requester) {
            return Err(RejectReason::TokenMismatch);
        }
        if *r1.r_a() >= pk_a.n || pk_a.apply(r1.r_a()) != *r1.y_a() {
            return Err(RejectReason::WrappedKeyMismatch);
        }
        let d_bt = self.identity.recover_private_exponent(c_bt)?;
        let r_b = ttp_recover_rb(r1.y_b(), &d_bt, &c_bt.pk_bt.n);
        Ok(RecoveryOutcome {
            r2: R2 { r_b },
            r3: R3 {
                r_a: r1.r_a().clone(),
            },
            receiver,
        })
    }
}
