//! Oblivious transfer protocols with query delegation, unknown queries,
//! multiple receivers, constant-size responses and a pad-only variant.
//!
//! Every protocol is written as a set of pure per-role functions: a party
//! computes its outgoing message from its inputs, the messages it received
//! and an explicitly passed RNG. Nothing in this crate performs IO, so it
//! builds under `no_std` with `alloc`. The `oblivis` crate wires these
//! functions into role state machines, a transport and a CLI.
//!
//! Module map:
//!
//! * [`primitives`] - prime-order group, random-oracle hashes, `parse`,
//!   XOR sharing, controlled swap and the seedable CSPRNG.
//! * [`ahe`] - Paillier additive homomorphic encryption and encrypted
//!   one-hot selection vectors.
//! * [`ot`] - Naor–Pinkas base OT, the generic 1-out-of-n interface, the
//!   delegated variants, the multi-receiver variants and the
//!   constant-response compiler.
//! * [`supersonic`] - the information-theoretic three-party OT.
//! * [`wire`] - byte encodings for every protocol message and the
//!   transport envelope.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod ahe;
pub mod error;
pub mod metrics;
pub mod ot;
pub mod primitives;
pub mod supersonic;
pub mod wire;

pub use error::{Error, Result};
pub use primitives::{
    BitLength, Exponent, GroupElement, GroupParams, Message, SessionConfig,
};
