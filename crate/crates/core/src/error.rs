use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(&'static str),

    #[error("no suitable prime found after {0} candidates")]
    PrimeBudget(usize),

    #[error("value is not an element of the prime-order subgroup")]
    NotInSubgroup,

    #[error("plaintext is outside [0, N)")]
    PlaintextRange,

    #[error("value of {bits} bits does not fit the {capacity}-bit plaintext space")]
    Capacity { bits: u64, capacity: u64 },

    #[error("ciphertext or key belongs to a different public key")]
    KeyMismatch,

    #[error("sender aborted: query pair does not multiply to C")]
    ProductCheck,

    #[error("decode error: {0}")]
    Decode(&'static str),

    #[error("no response slot carried the issuer tag")]
    TagNotFound,

    #[error("both response slots carried the issuer tag")]
    AmbiguousTag,

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("one-time pad keys were already used")]
    KeyReuse,

    #[error("message belongs to a different session")]
    SessionMismatch,
}
