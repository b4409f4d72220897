//! Byte encodings for protocol messages and the transport envelope.
//!
//! Integers travel as a 4-byte big-endian length followed by big-endian
//! bytes. Group elements, exponents and ciphertexts use a fixed width for
//! their key, so a message's size depends only on the session parameters.

use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::ahe::{Ciphertext, OneHotCipherVector, PublicKey};
use crate::error::{Error, Result};
use crate::ot::{FinalQuery, PartialQuery, ResponseElement, ResponsePair};
use crate::primitives::{Exponent, GroupElement, GroupParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Role {
    S = 0,
    R = 1,
    T = 2,
    P = 3,
    P1 = 4,
    P2 = 5,
}

impl Role {
    pub const ALL: [Role; 6] = [Role::S, Role::R, Role::T, Role::P, Role::P1, Role::P2];

    pub fn from_u8(b: u8) -> Result<Role> {
        Role::ALL.get(b as usize).copied().ok_or(Error::Decode("unknown role"))
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::S => "S",
            Role::R => "R",
            Role::T => "T",
            Role::P => "P",
            Role::P1 => "P1",
            Role::P2 => "P2",
        }
    }

    pub fn from_name(name: &str) -> Result<Role> {
        Role::ALL.iter().copied().find(|r| r.name() == name).ok_or(Error::Decode("unknown role name"))
    }
}

impl core::fmt::Display for Role {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Envelope kinds.
pub mod kind {
    pub const NP_QUERY: u16 = 0x0001;
    pub const NP_RESPONSE: u16 = 0x0002;
    pub const REQUEST: u16 = 0x0010;
    pub const PARTIAL_QUERY: u16 = 0x0011;
    pub const FINAL_QUERY: u16 = 0x0012;
    pub const RESPONSE: u16 = 0x0013;
    pub const BLIND: u16 = 0x0014;
    pub const ISSUER_SHARE: u16 = 0x0020;
    pub const ISSUER_TAG_S: u16 = 0x0021;
    pub const ISSUER_TAG_R: u16 = 0x0022;
    pub const TAGGED_RESPONSE: u16 = 0x0023;
    pub const MATRIX_RESPONSE: u16 = 0x0030;
    pub const AHE_PUBLIC_KEY: u16 = 0x0031;
    pub const ONE_HOT_VECTOR: u16 = 0x0032;
    pub const FILTERED_RESPONSE: u16 = 0x0033;
    pub const COMPILED_QUERY: u16 = 0x0040;
    pub const COMPILED_RESPONSE: u16 = 0x0041;
    pub const NAIVE_QUERY: u16 = 0x0042;
    pub const NAIVE_RESPONSE: u16 = 0x0043;
    pub const SS_KEYS: u16 = 0x0050;
    pub const SS_SHARE_S: u16 = 0x0051;
    pub const SS_SHARE_P: u16 = 0x0052;
    pub const SS_PAIR: u16 = 0x0053;
    pub const SS_FINAL: u16 = 0x0054;
    pub const STRAWMAN_MATRIX_RESPONSE: u16 = 0x0060;
    pub const STRAWMAN_INDEXED_QUERY: u16 = 0x0061;

    const NAMES: &[(u16, &str)] = &[
        (NP_QUERY, "NP_QUERY"),
        (NP_RESPONSE, "NP_RESPONSE"),
        (REQUEST, "REQUEST"),
        (PARTIAL_QUERY, "PARTIAL_QUERY"),
        (FINAL_QUERY, "FINAL_QUERY"),
        (RESPONSE, "RESPONSE"),
        (BLIND, "BLIND"),
        (ISSUER_SHARE, "ISSUER_SHARE"),
        (ISSUER_TAG_S, "ISSUER_TAG_S"),
        (ISSUER_TAG_R, "ISSUER_TAG_R"),
        (TAGGED_RESPONSE, "TAGGED_RESPONSE"),
        (MATRIX_RESPONSE, "MATRIX_RESPONSE"),
        (AHE_PUBLIC_KEY, "AHE_PUBLIC_KEY"),
        (ONE_HOT_VECTOR, "ONE_HOT_VECTOR"),
        (FILTERED_RESPONSE, "FILTERED_RESPONSE"),
        (COMPILED_QUERY, "COMPILED_QUERY"),
        (COMPILED_RESPONSE, "COMPILED_RESPONSE"),
        (NAIVE_QUERY, "NAIVE_QUERY"),
        (NAIVE_RESPONSE, "NAIVE_RESPONSE"),
        (SS_KEYS, "SS_KEYS"),
        (SS_SHARE_S, "SS_SHARE_S"),
        (SS_SHARE_P, "SS_SHARE_P"),
        (SS_PAIR, "SS_PAIR"),
        (SS_FINAL, "SS_FINAL"),
        (STRAWMAN_MATRIX_RESPONSE, "STRAWMAN_MATRIX_RESPONSE"),
        (STRAWMAN_INDEXED_QUERY, "STRAWMAN_INDEXED_QUERY"),
    ];

    pub fn name(kind: u16) -> &'static str {
        NAMES.iter().find(|(k, _)| *k == kind).map_or("UNKNOWN", |(_, n)| n)
    }

    pub fn from_name(name: &str) -> Option<u16> {
        NAMES.iter().find(|(_, n)| *n == name).map(|(k, _)| *k)
    }
}

pub const SESSION_ID_LEN: usize = 16;
pub const HEADER_LEN: usize = SESSION_ID_LEN + 1 + 1 + 2 + 8 + 4;

pub type SessionId = [u8; SESSION_ID_LEN];

/// A transport frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub session: SessionId,
    pub from: Role,
    pub to: Role,
    pub kind: u16,
    pub seq: u64,
    pub payload: Vec<u8>,
}

impl Envelope {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&self.session);
        out.push(self.from as u8);
        out.push(self.to as u8);
        out.extend_from_slice(&self.kind.to_be_bytes());
        out.extend_from_slice(&self.seq.to_be_bytes());
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Payload length announced by a header.
    pub fn payload_len(header: &[u8]) -> Result<usize> {
        if header.len() < HEADER_LEN {
            return Err(Error::Decode("envelope header truncated"));
        }
        Ok(u32::from_be_bytes(header[HEADER_LEN - 4..HEADER_LEN].try_into().expect("4 bytes")) as usize)
    }

    pub fn decode(bytes: &[u8]) -> Result<Envelope> {
        let len = Envelope::payload_len(bytes)?;
        if bytes.len() != HEADER_LEN + len {
            return Err(Error::Decode("envelope length mismatch"));
        }
        let session: SessionId = bytes[..16].try_into().expect("16 bytes");
        Ok(Envelope {
            session,
            from: Role::from_u8(bytes[16])?,
            to: Role::from_u8(bytes[17])?,
            kind: u16::from_be_bytes([bytes[18], bytes[19]]),
            seq: u64::from_be_bytes(bytes[20..28].try_into().expect("8 bytes")),
            payload: bytes[HEADER_LEN..].to_vec(),
        })
    }
}

#[derive(Default, Debug)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Writer::default()
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }

    pub fn bool(&mut self, b: bool) -> &mut Self {
        self.buf.push(b as u8);
        self
    }

    pub fn u32(&mut self, x: u32) -> &mut Self {
        self.buf.extend_from_slice(&x.to_be_bytes());
        self
    }

    /// Length-prefixed byte string.
    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.u32(b.len() as u32);
        self.buf.extend_from_slice(b);
        self
    }

    pub fn uint(&mut self, x: &BigUint) -> &mut Self {
        self.buf.extend_from_slice(&crate::primitives::group::encode_uint(x));
        self
    }

    pub fn element(&mut self, params: &GroupParams, e: &GroupElement) -> &mut Self {
        self.bytes(&params.element_bytes(e))
    }

    pub fn exponent(&mut self, params: &GroupParams, e: &Exponent) -> &mut Self {
        self.bytes(&params.exponent_bytes(e))
    }

    pub fn ciphertext(&mut self, pk: &PublicKey, c: &Ciphertext) -> &mut Self {
        self.buf.extend_from_slice(&pk.ciphertext_to_bytes(c));
        self
    }

    pub fn response_element(&mut self, params: &GroupParams, e: &ResponseElement) -> &mut Self {
        self.element(params, &e.key).bytes(&e.masked)
    }

    pub fn response_pair(&mut self, params: &GroupParams, pair: &ResponsePair) -> &mut Self {
        self.response_element(params, &pair.e0).response_element(params, &pair.e1)
    }

    pub fn partial_query(&mut self, params: &GroupParams, q: &PartialQuery) -> &mut Self {
        self.element(params, &q.delta0).element(params, &q.delta1)
    }

    pub fn final_query(&mut self, params: &GroupParams, q: &FinalQuery) -> &mut Self {
        self.element(params, &q.beta0).element(params, &q.beta1)
    }

    pub fn one_hot(&mut self, pk: &PublicKey, w: &OneHotCipherVector) -> &mut Self {
        self.u32(w.len() as u32);
        for c in w.slots() {
            self.ciphertext(pk, c);
        }
        self
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    /// Fails unless every byte was consumed.
    pub fn finish(self) -> Result<()> {
        if !self.buf.is_empty() {
            return Err(Error::Decode("trailing bytes"));
        }
        Ok(())
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Decode("message truncated"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn bool(&mut self) -> Result<bool> {
        match self.take(1)?[0] {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::Decode("invalid bit")),
        }
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    pub fn uint(&mut self) -> Result<BigUint> {
        Ok(BigUint::from_bytes_be(self.bytes()?))
    }

    pub fn element(&mut self, params: &GroupParams) -> Result<GroupElement> {
        params.element_from_bytes(self.bytes()?)
    }

    pub fn exponent(&mut self, params: &GroupParams) -> Result<Exponent> {
        params.exponent_from_bytes(self.bytes()?)
    }

    pub fn ciphertext(&mut self, pk: &PublicKey) -> Result<Ciphertext> {
        pk.ciphertext_from_bytes(self.take(pk.ciphertext_len())?)
    }

    pub fn response_element(&mut self, params: &GroupParams) -> Result<ResponseElement> {
        let key = self.element(params)?;
        let masked = self.bytes()?.to_vec();
        Ok(ResponseElement { key, masked })
    }

    pub fn response_pair(&mut self, params: &GroupParams) -> Result<ResponsePair> {
        Ok(ResponsePair { e0: self.response_element(params)?, e1: self.response_element(params)? })
    }

    pub fn partial_query(&mut self, params: &GroupParams) -> Result<PartialQuery> {
        Ok(PartialQuery { delta0: self.element(params)?, delta1: self.element(params)? })
    }

    pub fn final_query(&mut self, params: &GroupParams) -> Result<FinalQuery> {
        Ok(FinalQuery { beta0: self.element(params)?, beta1: self.element(params)? })
    }

    pub fn one_hot(&mut self, pk: &PublicKey) -> Result<OneHotCipherVector> {
        let len = self.u32()? as usize;
        let slots = (0..len).map(|_| self.ciphertext(pk)).collect::<Result<Vec<_>>>()?;
        OneHotCipherVector::from_slots(pk, slots)
    }
}
