//! Per-party evidence holdings. Every entry is verified before insertion.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bigint::{hex, hex_bytes};
use crate::credentials::{goods_hash, PartyId, PublicRegistry};
use crate::error::Mismatch;
use crate::vres::{verify_eoo, EvidenceOfOrigin, Receipt};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodsHolding {
    #[serde(with = "hex")]
    pub h_a: BigUint,
    #[serde(with = "hex_bytes")]
    pub goods: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EooHolding {
    #[serde(with = "hex")]
    pub h_a: BigUint,
    pub eoo: EvidenceOfOrigin,
    /// Party under whose key the evidence verifies.
    pub originator: PartyId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceLedger {
    pub goods: Vec<GoodsHolding>,
    pub receipts: Vec<Receipt>,
    pub eoos: Vec<EooHolding>,
}

impl GoodsHolding {
    pub fn is_valid(&self) -> bool {
        goods_hash(&self.goods) == self.h_a
    }
}

impl EooHolding {
    pub fn is_valid(&self, registry: &PublicRegistry) -> bool {
        registry
            .key(&self.originator)
            .map(|pk| verify_eoo(&self.eoo, &self.h_a, pk))
            .unwrap_or(false)
    }
}

pub fn receipt_is_valid(receipt: &Receipt, registry: &PublicRegistry) -> bool {
    registry
        .key(&receipt.signer)
        .map(|pk| receipt.verify(pk))
        .unwrap_or(false)
}

impl EvidenceLedger {
    pub fn record_goods(&mut self, goods: Vec<u8>) -> BigUint {
        let h_a = goods_hash(&goods);
        if !self.holds_goods(&h_a) {
            self.goods.push(GoodsHolding {
                h_a: h_a.clone(),
                goods,
            });
        }
        h_a
    }

    pub fn record_receipt(
        &mut self,
        receipt: Receipt,
        registry: &PublicRegistry,
    ) -> Result<(), Mismatch> {
        if !receipt_is_valid(&receipt, registry) {
            return Err(Mismatch::Signature);
        }
        if !self.receipts.contains(&receipt) {
            self.receipts.push(receipt);
        }
        Ok(())
    }

    pub fn record_eoo(
        &mut self,
        holding: EooHolding,
        registry: &PublicRegistry,
    ) -> Result<(), Mismatch> {
        if !holding.is_valid(registry) {
            return Err(Mismatch::Signature);
        }
        if !self.eoos.contains(&holding) {
            self.eoos.push(holding);
        }
        Ok(())
    }

    pub fn holds_goods(&self, h_a: &BigUint) -> bool {
        self.goods.iter().any(|g| g.h_a == *h_a && g.is_valid())
    }

    pub fn goods_for(&self, h_a: &BigUint) -> Option<&GoodsHolding> {
        self.goods.iter().find(|g| g.h_a == *h_a)
    }

    pub fn eoo_for(&self, h_a: &BigUint) -> Option<&EooHolding> {
        self.eoos.iter().find(|e| e.h_a == *h_a)
    }

    pub fn receipts_for<'a>(&'a self, h_a: &'a BigUint) -> impl Iterator<Item = &'a Receipt> + 'a {
        self.receipts.iter().filter(move |r| r.h_a == *h_a)
    }

    pub fn is_empty(&self) -> bool {
        self.goods.is_empty() && self.receipts.is_empty() && self.eoos.is_empty()
    }
}
