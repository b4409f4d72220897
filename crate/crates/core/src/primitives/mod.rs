//! Building blocks shared by every protocol.

mod config;
pub(crate) mod group;
mod hash;
mod message;
pub(crate) mod montgomery;
pub mod prime;
pub mod rng;
mod share;

pub use config::{BitLength, SessionConfig};
pub use group::{gen_group, gen_group_with_budget, Exponent, GroupElement, GroupParams};
pub use hash::{hash_g, hash_h, parse, shake256};
pub use message::Message;
pub use share::{permute_pair, share_bit, share_bytes, swap_pair, xor_into, xor_bytes, Share};
