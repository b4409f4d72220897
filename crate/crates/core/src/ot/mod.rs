//! The oblivious transfer protocols.
//!
//! Each protocol is a set of free functions, one per role and step. The
//! pieces every Naor–Pinkas-shaped protocol shares (query pairs, masked
//! response slots, the delegated retrieval exponent) live here.

use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::primitives::{hash_g, hash_h, xor_bytes, Exponent, GroupElement, GroupParams, SessionConfig};

pub mod base;
pub mod compiler;
pub mod dq;
pub mod duq;
pub mod mr;

/// Which random oracle masks a response slot: `H` for plain slots of
/// `sigma` bits, `G` for tagged slots of `sigma + lambda` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Oracle {
    H,
    G,
}

impl Oracle {
    pub fn output_len(self, config: &SessionConfig) -> usize {
        match self {
            Oracle::H => config.sigma.bytes(),
            Oracle::G => config.tagged_len(),
        }
    }

    fn apply(self, config: &SessionConfig, input: &[u8]) -> Vec<u8> {
        match self {
            Oracle::H => hash_h(input, config.sigma),
            Oracle::G => hash_g(input, config.sigma, config.lambda),
        }
    }
}

/// One response slot `(g^y, oracle(beta^y) xor payload)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseElement {
    pub key: GroupElement,
    pub masked: Vec<u8>,
}

/// The sender's two slots, in index order unless the protocol permutes them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponsePair {
    pub e0: ResponseElement,
    pub e1: ResponseElement,
}

impl ResponsePair {
    pub fn slot(&self, index: bool) -> &ResponseElement {
        if index {
            &self.e1
        } else {
            &self.e0
        }
    }

    pub fn swapped(self, swap: bool) -> Self {
        if swap {
            ResponsePair { e0: self.e1, e1: self.e0 }
        } else {
            self
        }
    }
}

/// Proxy P2's output `(delta0, delta1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialQuery {
    pub delta0: GroupElement,
    pub delta1: GroupElement,
}

/// The query pair the sender sees, `(beta0, beta1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalQuery {
    pub beta0: GroupElement,
    pub beta1: GroupElement,
}

impl FinalQuery {
    /// The sender's abort check `beta0 * beta1 = C`.
    pub fn check(&self, params: &GroupParams) -> Result<()> {
        if params.mul(&self.beta0, &self.beta1) != *params.c() {
            return Err(Error::ProductCheck);
        }
        Ok(())
    }
}

/// Masks `payload` under `beta` with the sender exponent `y`.
pub fn encrypt_slot(
    params: &GroupParams,
    config: &SessionConfig,
    oracle: Oracle,
    beta: &GroupElement,
    y: &Exponent,
    payload: &[u8],
) -> ResponseElement {
    debug_assert_eq!(payload.len(), oracle.output_len(config));
    let key = params.pow_g(y);
    let shared = params.exp(beta, y);
    let pad = oracle.apply(config, &params.element_bytes(&shared));
    ResponseElement { key, masked: xor_bytes(&pad, payload) }
}

/// Removes the mask of `element` using the receiver exponent `x`.
pub fn open_slot(
    params: &GroupParams,
    config: &SessionConfig,
    oracle: Oracle,
    element: &ResponseElement,
    x: &Exponent,
) -> Result<Vec<u8>> {
    if element.masked.len() != oracle.output_len(config) {
        return Err(Error::Decode("response slot has the wrong length"));
    }
    let shared = params.exp(&element.key, x);
    let pad = oracle.apply(config, &params.element_bytes(&shared));
    Ok(xor_bytes(&pad, &element.masked))
}

/// The sender's response to a query pair with explicit exponents. Every
/// two-slot protocol funnels through here, so the sender-side computation
/// for a base query and a delegated query is the same code.
pub fn respond_with(
    params: &GroupParams,
    config: &SessionConfig,
    oracle: Oracle,
    query: &FinalQuery,
    payloads: (&[u8], &[u8]),
    ys: (&Exponent, &Exponent),
) -> ResponsePair {
    ResponsePair {
        e0: encrypt_slot(params, config, oracle, &query.beta0, ys.0, payloads.0),
        e1: encrypt_slot(params, config, oracle, &query.beta1, ys.1, payloads.1),
    }
}

pub(crate) fn respond<R: RngCore + CryptoRng + ?Sized>(
    params: &GroupParams,
    config: &SessionConfig,
    oracle: Oracle,
    query: &FinalQuery,
    payloads: (&[u8], &[u8]),
    rng: &mut R,
) -> ResponsePair {
    let y0 = params.random_exponent(rng);
    let y1 = params.random_exponent(rng);
    respond_with(params, config, oracle, query, payloads, (&y0, &y1))
}

/// Proxy P2's step: `delta_{s2} = g^{r2}`, `delta_{1-s2} = C / g^{r2}`.
pub fn partial_query(params: &GroupParams, s2: bool, r2: &Exponent) -> PartialQuery {
    let blinded = params.pow_g(r2);
    let other = params.div_pow_g(params.c(), r2);
    if s2 {
        PartialQuery { delta0: other, delta1: blinded }
    } else {
        PartialQuery { delta0: blinded, delta1: other }
    }
}

/// Proxy P1's step: `beta_{s1} = delta0 * g^{r1}`, `beta_{1-s1} = delta1 / g^{r1}`.
pub fn final_query(params: &GroupParams, s1: bool, r1: &Exponent, partial: &PartialQuery) -> FinalQuery {
    let raised = params.mul(&partial.delta0, &params.pow_g(r1));
    let lowered = params.div_pow_g(&partial.delta1, r1);
    if s1 {
        FinalQuery { beta0: lowered, beta1: raised }
    } else {
        FinalQuery { beta0: raised, beta1: lowered }
    }
}

/// Receiver exponent for a delegated query: `x = r2 + r1 * (-1)^{s2}`.
pub fn delegated_exponent(params: &GroupParams, r1: &Exponent, r2: &Exponent, s2: bool) -> Exponent {
    if s2 {
        params.exp_sub(r2, r1)
    } else {
        params.exp_add(r2, r1)
    }
}
