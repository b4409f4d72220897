//! Three-party OT from one-time pads and two controlled swaps.
//!
//! The receiver shares pad keys with the sender and XOR-shares its choice
//! between the sender and a proxy P. The sender pads both messages and
//! swaps them by its share; P swaps again by its share and forwards only
//! the first element. Two swaps keyed by `s1` and `s2` act as one swap
//! keyed by `s1 ^ s2 = s`, so the forwarded element is always `m_s` under
//! its pad. No public-key operation is involved.

use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::primitives::rng::random_bytes;
use crate::primitives::{share_bit, swap_pair, xor_bytes, Message, SessionConfig};

/// Pad keys `(k0, k1)`, each `sigma` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadKeys {
    pub k0: Vec<u8>,
    pub k1: Vec<u8>,
}

impl PadKeys {
    pub fn key(&self, s: bool) -> &[u8] {
        if s {
            &self.k1
        } else {
            &self.k0
        }
    }
}

/// The sender's padded, swapped pair.
pub type SwappedPair = (Vec<u8>, Vec<u8>);

pub fn ss_setup<R: RngCore + CryptoRng + ?Sized>(config: &SessionConfig, rng: &mut R) -> PadKeys {
    let len = config.sigma.bytes();
    PadKeys { k0: random_bytes(rng, len), k1: random_bytes(rng, len) }
}

/// Returns `(s1 for S, s2 for P)`.
pub fn ss_gen_query<R: RngCore + CryptoRng + ?Sized>(s: bool, rng: &mut R) -> (bool, bool) {
    share_bit(s, rng)
}

pub fn ss_gen_res(m0: &Message, m1: &Message, keys: &PadKeys, s1: bool, config: &SessionConfig) -> Result<SwappedPair> {
    let width = config.sigma.bytes();
    if keys.k0.len() != width || keys.k1.len() != width {
        return Err(Error::Precondition("pad keys must be sigma bits"));
    }
    let e0 = xor_bytes(&m0.pad(config.sigma)?, &keys.k0);
    let e1 = xor_bytes(&m1.pad(config.sigma)?, &keys.k1);
    Ok(swap_pair(s1, (e0, e1)))
}

/// P's filter: swap by `s2`, keep the first element.
pub fn ss_obl_filter(res: SwappedPair, s2: bool) -> Vec<u8> {
    swap_pair(s2, res).0
}

pub fn ss_retrieve(filtered: &[u8], keys: &PadKeys, s: bool, config: &SessionConfig) -> Result<Message> {
    let key = keys.key(s);
    if filtered.len() != key.len() {
        return Err(Error::Decode("filtered element has the wrong length"));
    }
    Message::unpad(&xor_bytes(filtered, key), config.sigma)
}

/// The sender's side of one session. Keys are bound to a session id and
/// can answer exactly one query.
#[derive(Debug)]
pub struct SenderSession {
    session: [u8; 16],
    keys: Option<PadKeys>,
    used: bool,
}

impl SenderSession {
    pub fn new(session: [u8; 16]) -> Self {
        SenderSession { session, keys: None, used: false }
    }

    pub fn install_keys(&mut self, session: [u8; 16], keys: PadKeys) -> Result<()> {
        if session != self.session {
            return Err(Error::SessionMismatch);
        }
        if self.keys.is_some() || self.used {
            return Err(Error::KeyReuse);
        }
        self.keys = Some(keys);
        Ok(())
    }

    pub fn respond(
        &mut self,
        session: [u8; 16],
        m0: &Message,
        m1: &Message,
        s1: bool,
        config: &SessionConfig,
    ) -> Result<SwappedPair> {
        if session != self.session {
            return Err(Error::SessionMismatch);
        }
        if self.used {
            return Err(Error::KeyReuse);
        }
        let keys = self.keys.take().ok_or(Error::Precondition("no pad keys installed"))?;
        self.used = true;
        ss_gen_res(m0, m1, &keys, s1, config)
    }
}
