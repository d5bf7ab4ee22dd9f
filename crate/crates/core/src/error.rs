use thiserror::Error;

/// Errors raised by the cryptographic and protocol layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("value is not invertible modulo the given modulus")]
    NotInvertible,
    #[error("key generation failed after {attempts} attempts")]
    GenerationFailure { attempts: usize },
    #[error("randomizer violates its preconditions")]
    InvalidRandomizer,
    #[error("symmetric key is not valid under the wrapping modulus")]
    InvalidKey,
    #[error("certificate failed verification: {0}")]
    InvalidCert(Mismatch),
    #[error("recovered value does not satisfy the receipt invariant")]
    RecoveryMismatch,
    #[error("malformed hex integer: {0:?}")]
    Hex(String),
    #[error("unknown party {0:?}")]
    UnknownParty(String),
    #[error("scenario deviated from its script: {0}")]
    Deviation(String),
}

/// Why a verification returned false.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error)]
pub enum Mismatch {
    #[error("signature does not verify")]
    Signature,
    #[error("hash of the encrypted goods differs from hd_a")]
    CiphertextDigest,
    #[error("public exponent of the recoverable key differs from the owner's")]
    ExponentMismatch,
    #[error("value out of range for its modulus")]
    Range,
    #[error("receipt congruence x_b^e = y_b * h_a fails")]
    ReceiptCongruence,
    #[error("control congruence xx_b^e = y_b * h(y_b) fails")]
    ControlCongruence,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
