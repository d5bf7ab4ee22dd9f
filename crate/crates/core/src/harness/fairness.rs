//! Fairness verdicts over final evidence holdings.
//!
//! * Unfair for the receiver: some party holds a verifying receipt for `h_a`
//!   while the receipt's signer holds no goods hashing to `h_a`.
//! * Unfair for the originator: some party holds a verifying evidence of
//!   origin for `h_a` while the originator holds no verifying receipt for
//!   `h_a` signed by that party.
//!
//! Only entries that verify against the registry count. Receiver-side
//! unfairness is reported first when both hold.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bigint::hex;
use crate::credentials::{PartyId, PublicRegistry};
use crate::protocol::{receipt_is_valid, EvidenceLedger};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum FairnessVerdict {
    #[serde(rename = "FAIR")]
    Fair,
    #[serde(rename = "UNFAIR_FOR_B")]
    UnfairForB {
        #[serde(with = "hex")]
        goods_hash: BigUint,
        receipt_holder: PartyId,
    },
    #[serde(rename = "UNFAIR_FOR_A")]
    UnfairForA {
        #[serde(with = "hex")]
        goods_hash: BigUint,
        eoo_holder: PartyId,
    },
}

impl FairnessVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            FairnessVerdict::Fair => "FAIR",
            FairnessVerdict::UnfairForB { .. } => "UNFAIR_FOR_B",
            FairnessVerdict::UnfairForA { .. } => "UNFAIR_FOR_A",
        }
    }
}

fn holds_goods(
    ledgers: &BTreeMap<PartyId, EvidenceLedger>,
    party: &PartyId,
    h_a: &BigUint,
) -> bool {
    ledgers.get(party).is_some_and(|l| l.holds_goods(h_a))
}

fn holds_receipt_from(
    ledgers: &BTreeMap<PartyId, EvidenceLedger>,
    holder: &PartyId,
    signer: &PartyId,
    h_a: &BigUint,
    registry: &PublicRegistry,
) -> bool {
    ledgers.get(holder).is_some_and(|l| {
        l.receipts_for(h_a)
            .any(|r| r.signer == *signer && receipt_is_valid(r, registry))
    })
}

/// Pure function of the ledgers and the registry.
pub fn evaluate_fairness(
    ledgers: &BTreeMap<PartyId, EvidenceLedger>,
    registry: &PublicRegistry,
) -> FairnessVerdict {
    for (holder, ledger) in ledgers {
        for receipt in ledger
            .receipts
            .iter()
            .filter(|r| receipt_is_valid(r, registry))
        {
            if !holds_goods(ledgers, &receipt.signer, &receipt.h_a) {
                return FairnessVerdict::UnfairForB {
                    goods_hash: receipt.h_a.clone(),
                    receipt_holder: holder.clone(),
                };
            }
        }
    }
    for (holder, ledger) in ledgers {
        for eoo in ledger.eoos.iter().filter(|e| e.is_valid(registry)) {
            if !holds_receipt_from(ledgers, &eoo.originator, holder, &eoo.h_a, registry) {
                return FairnessVerdict::UnfairForA {
                    goods_hash: eoo.h_a.clone(),
                    eoo_holder: holder.clone(),
                };
            }
        }
    }
    FairnessVerdict::Fair
}
