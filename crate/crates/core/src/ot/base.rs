//! Naor–Pinkas 1-out-of-2 OT and the generic 1-out-of-n interface.

use alloc::vec::Vec;

use num_bigint::BigUint;
use rand_core::{CryptoRng, RngCore};

use super::{open_slot, respond, FinalQuery, Oracle, ResponseElement, ResponsePair};
use crate::error::{Error, Result};
use crate::primitives::group::encode_uint;
use crate::primitives::rng::random_bytes;
use crate::primitives::{gen_group, Exponent, GroupElement, GroupParams, Message, SessionConfig};

/// The receiver's query. Only `beta0` travels; the sender recomputes `beta1 = C / beta0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NpQuery {
    pub beta0: GroupElement,
}

#[derive(Clone, Debug)]
pub struct NpSecret {
    pub r: Exponent,
    pub s: bool,
}

/// Sender setup: fresh group parameters under a seed drawn from `rng`.
pub fn np_init<R: RngCore + CryptoRng + ?Sized>(config: &SessionConfig, rng: &mut R) -> Result<GroupParams> {
    gen_group(config.group_bits, &random_bytes(rng, 32))
}

pub fn np_gen_query<R: RngCore + CryptoRng + ?Sized>(
    params: &GroupParams,
    s: bool,
    rng: &mut R,
) -> (NpQuery, NpSecret) {
    let r = params.random_exponent(rng);
    let beta_s = params.pow_g(&r);
    let beta0 = if s { params.div(params.c(), &beta_s) } else { beta_s };
    (NpQuery { beta0 }, NpSecret { r, s })
}

/// Expands a transmitted `beta0` into the full query pair.
pub fn np_expand(params: &GroupParams, q: &NpQuery) -> FinalQuery {
    FinalQuery { beta0: q.beta0.clone(), beta1: params.div(params.c(), &q.beta0) }
}

pub fn np_gen_res<R: RngCore + CryptoRng + ?Sized>(
    m0: &Message,
    m1: &Message,
    params: &GroupParams,
    config: &SessionConfig,
    q: &NpQuery,
    rng: &mut R,
) -> Result<ResponsePair> {
    let p0 = m0.pad(config.sigma)?;
    let p1 = m1.pad(config.sigma)?;
    Ok(respond(params, config, Oracle::H, &np_expand(params, q), (&p0, &p1), rng))
}

pub fn np_retrieve(
    res: &ResponsePair,
    sp: &NpSecret,
    params: &GroupParams,
    config: &SessionConfig,
) -> Result<Message> {
    let padded = open_slot(params, config, Oracle::H, res.slot(sp.s), &sp.r)?;
    Message::unpad(&padded, config.sigma)
}

/// A 1-out-of-n OT in the four-algorithm form: the sender publishes public
/// parameters (the suite value itself), the receiver generates a query,
/// the sender answers it and the receiver retrieves.
pub trait OtSuite {
    type Query: Clone;
    type Secret;
    type Response: Clone;

    /// Number of sender messages.
    fn n(&self) -> usize;

    fn config(&self) -> &SessionConfig;

    fn gen_query(&self, s: usize, rng: &mut dyn RngCore) -> Result<(Self::Query, Self::Secret)>;

    fn gen_res(&self, messages: &[Message], q: &Self::Query, rng: &mut dyn RngCore) -> Result<Self::Response>;

    fn retrieve(&self, res: &Self::Response, q: &Self::Query, sp: &Self::Secret, s: usize) -> Result<Message>;
}

/// A suite whose response is a vector of `n` elements, each made of
/// `width()` components that encode as non-negative integers. This is what
/// the constant-response compiler needs to compress a response.
pub trait Compilable: OtSuite {
    type Element: Clone;

    fn width(&self) -> usize;

    /// Upper bound on the bit length of any encoded component.
    fn component_bits(&self) -> u64;

    fn element(&self, res: &Self::Response, index: usize) -> Result<Self::Element>;

    fn encode_element(&self, element: &Self::Element) -> Vec<BigUint>;

    fn decode_element(&self, components: &[BigUint]) -> Result<Self::Element>;

    fn retrieve_element(&self, element: &Self::Element, q: &Self::Query, sp: &Self::Secret, s: usize)
        -> Result<Message>;
}

pub const MAX_LANES: usize = 1024;

/// Naive 1-out-of-n OT built from the Naor–Pinkas pattern with one lane
/// constant per message. The query is a single `beta0`; the sender derives
/// `beta_i = C_i / beta0` and answers with all `n` slots, so the download
/// grows linearly in `n`.
#[derive(Clone, Debug)]
pub struct NaiveNpSuite {
    params: GroupParams,
    config: SessionConfig,
    lanes: Vec<GroupElement>,
}

/// Wrapper so the suite can hand a `dyn RngCore` to generic code.
struct DynRng<'a>(&'a mut dyn RngCore);

impl RngCore for DynRng<'_> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> core::result::Result<(), rand_core::Error> {
        self.0.try_fill_bytes(dest)
    }
}

// Callers supply a CSPRNG; the trait object just cannot say so.
impl rand_core::CryptoRng for DynRng<'_> {}

pub(crate) fn dyn_rng(rng: &mut dyn RngCore) -> impl RngCore + CryptoRng + '_ {
    DynRng(rng)
}

impl NaiveNpSuite {
    pub fn new(params: GroupParams, config: SessionConfig, n: usize) -> Result<Self> {
        if !(2..=MAX_LANES).contains(&n) {
            return Err(Error::Precondition("naive suite needs 2 <= n <= 1024"));
        }
        let mut lanes = Vec::with_capacity(n);
        // Lane 0 is beta0 itself and lane 1 is C, as in the two-message protocol.
        lanes.push(params.identity());
        lanes.push(params.c().clone());
        for i in 2..n {
            let mut label = Vec::from(&b"oblivis-lane"[..]);
            label.extend_from_slice(&encode_uint(params.p()));
            label.extend_from_slice(&encode_uint(params.g().as_uint()));
            label.extend_from_slice(&(i as u32).to_be_bytes());
            lanes.push(params.hash_to_subgroup(&label));
        }
        Ok(NaiveNpSuite { params, config, lanes })
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    fn betas(&self, q: &NpQuery) -> Vec<GroupElement> {
        let inverse = self.params.invert(&q.beta0);
        let mut betas = Vec::with_capacity(self.lanes.len());
        betas.push(q.beta0.clone());
        for lane in &self.lanes[1..] {
            betas.push(self.params.mul(lane, &inverse));
        }
        betas
    }
}

impl OtSuite for NaiveNpSuite {
    type Query = NpQuery;
    type Secret = Exponent;
    type Response = Vec<ResponseElement>;

    fn n(&self) -> usize {
        self.lanes.len()
    }

    fn config(&self) -> &SessionConfig {
        &self.config
    }

    fn gen_query(&self, s: usize, rng: &mut dyn RngCore) -> Result<(NpQuery, Exponent)> {
        if s >= self.n() {
            return Err(Error::IndexOutOfRange { index: s, len: self.n() });
        }
        let r = self.params.random_exponent(&mut dyn_rng(rng));
        let beta_s = self.params.pow_g(&r);
        let beta0 = if s == 0 { beta_s } else { self.params.div(&self.lanes[s], &beta_s) };
        Ok((NpQuery { beta0 }, r))
    }

    fn gen_res(&self, messages: &[Message], q: &NpQuery, rng: &mut dyn RngCore) -> Result<Vec<ResponseElement>> {
        if messages.len() != self.n() {
            return Err(Error::Precondition("message count differs from n"));
        }
        let mut rng = dyn_rng(rng);
        let betas = self.betas(q);
        let mut out = Vec::with_capacity(self.n());
        for (m, beta) in messages.iter().zip(&betas) {
            let y = self.params.random_exponent(&mut rng);
            let padded = m.pad(self.config.sigma)?;
            out.push(super::encrypt_slot(&self.params, &self.config, Oracle::H, beta, &y, &padded));
        }
        Ok(out)
    }

    fn retrieve(&self, res: &Vec<ResponseElement>, q: &NpQuery, sp: &Exponent, s: usize) -> Result<Message> {
        let element = res.get(s).ok_or(Error::IndexOutOfRange { index: s, len: res.len() })?;
        self.retrieve_element(element, q, sp, s)
    }
}

impl Compilable for NaiveNpSuite {
    type Element = ResponseElement;

    fn width(&self) -> usize {
        2
    }

    fn component_bits(&self) -> u64 {
        core::cmp::max(self.params.p().bits(), self.config.sigma.bits() as u64)
    }

    fn element(&self, res: &Vec<ResponseElement>, index: usize) -> Result<ResponseElement> {
        res.get(index).cloned().ok_or(Error::IndexOutOfRange { index, len: res.len() })
    }

    fn encode_element(&self, element: &ResponseElement) -> Vec<BigUint> {
        alloc::vec![element.key.as_uint().clone(), BigUint::from_bytes_be(&element.masked)]
    }

    fn decode_element(&self, components: &[BigUint]) -> Result<ResponseElement> {
        if components.len() != 2 {
            return Err(Error::Decode("response element needs two components"));
        }
        let key = self.params.element(components[0].clone())?;
        let masked = uint_to_width(&components[1], self.config.sigma.bytes())?;
        Ok(ResponseElement { key, masked })
    }

    fn retrieve_element(&self, element: &ResponseElement, _q: &NpQuery, sp: &Exponent, _s: usize) -> Result<Message> {
        let padded = open_slot(&self.params, &self.config, Oracle::H, element, sp)?;
        Message::unpad(&padded, self.config.sigma)
    }
}

/// Big-endian bytes of `x` left-padded to `width`, or a decode error if `x` is wider.
pub(crate) fn uint_to_width(x: &BigUint, width: usize) -> Result<Vec<u8>> {
    if x.bits() > (width as u64) * 8 {
        return Err(Error::Decode("integer wider than its slot"));
    }
    Ok(crate::primitives::group::fixed_width(x, width))
}
