//! Delegated-unknown-query OT: an issuer T holds the choice bit. The
//! receiver only learns the chosen message, never its index.

use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};

use super::{delegated_exponent, final_query, open_slot, partial_query, respond, FinalQuery, Oracle, PartialQuery, ResponsePair};
use crate::error::{Error, Result};
use crate::primitives::rng::{random_bit, random_bytes};
use crate::primitives::{parse, Exponent, GroupParams, Message, SessionConfig};

/// The receiver's two blinders, `r1` for P1 and `r2` for P2.
#[derive(Clone, Debug)]
pub struct ReceiverBlinders {
    pub r1: Exponent,
    pub r2: Exponent,
}

/// What the issuer hands out: a share to each proxy, the tag to the
/// sender, and `(s2, r3)` to the receiver.
#[derive(Clone, Debug)]
pub struct IssuerRequest {
    pub s1: bool,
    pub s2: bool,
    pub tag: Vec<u8>,
}

/// The receiver's view of the issuer: P2's share and the tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReceiverTag {
    pub s2: bool,
    pub tag: Vec<u8>,
}

impl IssuerRequest {
    pub fn receiver_tag(&self) -> ReceiverTag {
        ReceiverTag { s2: self.s2, tag: self.tag.clone() }
    }
}

/// Receiver request: two blinders, no choice bit, no group operation.
pub fn duq_r_request<R: RngCore + CryptoRng + ?Sized>(params: &GroupParams, rng: &mut R) -> ReceiverBlinders {
    ReceiverBlinders { r1: params.random_exponent(rng), r2: params.random_exponent(rng) }
}

pub fn duq_t_request<R: RngCore + CryptoRng + ?Sized>(config: &SessionConfig, s: bool, rng: &mut R) -> IssuerRequest {
    let s1 = random_bit(rng);
    let tag = random_bytes(rng, config.lambda.bytes());
    IssuerRequest { s1, s2: s1 ^ s, tag }
}

pub fn duq_p2_gen_query(r2: &Exponent, s2: bool, params: &GroupParams) -> PartialQuery {
    partial_query(params, s2, r2)
}

pub fn duq_p1_gen_query(r1: &Exponent, s1: bool, q2: &PartialQuery, params: &GroupParams) -> FinalQuery {
    final_query(params, s1, r1, q2)
}

/// `pad(m) || tag`, the plaintext of a tagged slot.
pub(crate) fn tagged(m: &Message, tag: &[u8], config: &SessionConfig) -> Result<Vec<u8>> {
    if tag.len() != config.lambda.bytes() {
        return Err(Error::Precondition("tag length differs from lambda"));
    }
    let mut out = m.pad(config.sigma)?;
    out.extend_from_slice(tag);
    Ok(out)
}

/// Sender response with the slot order fixed by `swap`.
#[allow(clippy::too_many_arguments)]
pub fn duq_gen_res_with_swap<R: RngCore + CryptoRng + ?Sized>(
    m0: &Message,
    m1: &Message,
    params: &GroupParams,
    config: &SessionConfig,
    q1: &FinalQuery,
    tag: &[u8],
    swap: bool,
    rng: &mut R,
) -> Result<ResponsePair> {
    q1.check(params)?;
    let p0 = tagged(m0, tag, config)?;
    let p1 = tagged(m1, tag, config)?;
    Ok(respond(params, config, Oracle::G, q1, (&p0, &p1), rng).swapped(swap))
}

/// Sender response: both slots tagged, then the pair randomly permuted.
pub fn duq_gen_res<R: RngCore + CryptoRng + ?Sized>(
    m0: &Message,
    m1: &Message,
    params: &GroupParams,
    config: &SessionConfig,
    q1: &FinalQuery,
    tag: &[u8],
    rng: &mut R,
) -> Result<ResponsePair> {
    let swap = random_bit(rng);
    duq_gen_res_with_swap(m0, m1, params, config, q1, tag, swap, rng)
}

/// Opens both slots and keeps the one whose trailing `lambda` bits equal
/// the tag. The result carries the message only, never the index.
pub fn duq_retrieve(
    res: &ResponsePair,
    blinders: &ReceiverBlinders,
    tag: &ReceiverTag,
    params: &GroupParams,
    config: &SessionConfig,
) -> Result<Message> {
    let x = delegated_exponent(params, &blinders.r1, &blinders.r2, tag.s2);
    let mut found = None;
    for slot in [&res.e0, &res.e1] {
        let y = open_slot(params, config, Oracle::G, slot, &x)?;
        let (body, trailer) = parse(config.lambda, &y)?;
        if trailer == tag.tag.as_slice() {
            if found.is_some() {
                return Err(Error::AmbiguousTag);
            }
            found = Some(body.to_vec());
        }
    }
    let body = found.ok_or(Error::TagNotFound)?;
    Message::unpad(&body, config.sigma)
}
