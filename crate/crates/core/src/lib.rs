//! RSA-CEGD certified e-goods delivery.
//!
//! The crate implements the protocol's cryptographic primitive (a verifiable
//! and recoverable encrypted signature built on RSA cross-decryption), its two
//! certificate kinds, the three party state machines of the exchange and
//! recovery sub-protocols, and a deterministic simulation harness that replays
//! two fairness attacks against the protocol and renders fairness verdicts
//! over the resulting evidence.

pub mod bigint;
pub mod cli;
pub mod credentials;
pub mod crypto;
pub mod error;
pub mod harness;
pub mod protocol;
pub mod vres;

pub use error::{Error, Mismatch, Result};
