//! Constant-response compiler for 1-out-of-n OT.
//!
//! The receiver adds an encrypted one-hot vector of its choice to the inner
//! query. The sender computes the inner response as usual and folds its `n`
//! elements into `w` ciphertexts with a homomorphic dot product, so the
//! download no longer depends on `n`.

use alloc::vec::Vec;

use num_bigint::BigUint;
use rand_core::{CryptoRng, RngCore};

use super::base::{Compilable, OtSuite};
use crate::ahe::{kgen, Ciphertext, KeyPair, OneHotCipherVector, PublicKey, SecretKey};
use crate::error::{Error, Result};
use crate::primitives::Message;

#[derive(Clone, Debug)]
pub struct CompiledQuery<Q> {
    pub inner: Q,
    pub selector: OneHotCipherVector,
}

/// `w` ciphertexts, one per component of the selected inner element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledResponse {
    pub e: Vec<Ciphertext>,
}

pub fn compiled_gen_query<S: Compilable, R: RngCore + CryptoRng>(
    suite: &S,
    sk_r: &SecretKey,
    s: usize,
    rng: &mut R,
) -> Result<(CompiledQuery<S::Query>, S::Secret)> {
    let (inner, secret) = suite.gen_query(s, rng)?;
    let selector = OneHotCipherVector::new_with_secret(sk_r, suite.n(), s, rng)?;
    Ok((CompiledQuery { inner, selector }, secret))
}

pub fn compiled_gen_res<S: Compilable, R: RngCore + CryptoRng>(
    suite: &S,
    messages: &[Message],
    pk_r: &PublicKey,
    q: &CompiledQuery<S::Query>,
    rng: &mut R,
) -> Result<CompiledResponse> {
    if q.selector.len() != suite.n() {
        return Err(Error::Precondition("selector length differs from n"));
    }
    if suite.component_bits() >= pk_r.plaintext_bits() {
        return Err(Error::Capacity { bits: suite.component_bits(), capacity: pk_r.plaintext_bits() - 1 });
    }
    let res = suite.gen_res(messages, &q.inner, rng)?;
    let mut columns: Vec<Vec<BigUint>> = (0..suite.width()).map(|_| Vec::with_capacity(suite.n())).collect();
    for i in 0..suite.n() {
        let components = suite.encode_element(&suite.element(&res, i)?);
        if components.len() != suite.width() {
            return Err(Error::Precondition("inner element has the wrong component count"));
        }
        for (column, c) in columns.iter_mut().zip(components) {
            column.push(c);
        }
    }
    let columns: Vec<&[BigUint]> = columns.iter().map(Vec::as_slice).collect();
    let e = q.selector.dot_many(pk_r, &columns)?;
    Ok(CompiledResponse { e })
}

/// Decrypts the response into the inner suite's element `s`.
pub fn compiled_decrypt<S: Compilable>(suite: &S, res: &CompiledResponse, sk_r: &SecretKey) -> Result<S::Element> {
    if res.e.len() != suite.width() {
        return Err(Error::Decode("compiled response has the wrong width"));
    }
    let components = res.e.iter().map(|c| sk_r.dec(c)).collect::<Result<Vec<_>>>()?;
    suite.decode_element(&components)
}

pub fn compiled_retrieve<S: Compilable>(
    suite: &S,
    res: &CompiledResponse,
    q: &CompiledQuery<S::Query>,
    sp: &S::Secret,
    sk_r: &SecretKey,
    s: usize,
) -> Result<Message> {
    let element = compiled_decrypt(suite, res, sk_r)?;
    suite.retrieve_element(&element, &q.inner, sp, s)
}

/// A compiled suite. It holds the receiver's key pair so it can act as a
/// self-contained [`OtSuite`]; the sender-side path only touches the
/// public half.
#[derive(Clone, Debug)]
pub struct Compiled<S> {
    inner: S,
    keys: KeyPair,
}

impl<S: Compilable> Compiled<S> {
    pub fn new<R: RngCore + CryptoRng>(inner: S, rng: &mut R) -> Result<Self> {
        let bits = inner.config().ahe_plaintext_bits(inner.component_bits());
        let keys = kgen(bits, rng)?;
        Ok(Compiled { inner, keys })
    }

    pub fn with_keys(inner: S, keys: KeyPair) -> Self {
        Compiled { inner, keys }
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    pub fn receiver_keys(&self) -> &KeyPair {
        &self.keys
    }
}

impl<S: Compilable> OtSuite for Compiled<S> {
    type Query = CompiledQuery<S::Query>;
    type Secret = S::Secret;
    type Response = CompiledResponse;

    fn n(&self) -> usize {
        self.inner.n()
    }

    fn config(&self) -> &crate::primitives::SessionConfig {
        self.inner.config()
    }

    fn gen_query(&self, s: usize, rng: &mut dyn RngCore) -> Result<(Self::Query, S::Secret)> {
        compiled_gen_query(&self.inner, &self.keys.sk, s, &mut super::base::dyn_rng(rng))
    }

    fn gen_res(&self, messages: &[Message], q: &Self::Query, rng: &mut dyn RngCore) -> Result<CompiledResponse> {
        compiled_gen_res(&self.inner, messages, &self.keys.pk, q, &mut super::base::dyn_rng(rng))
    }

    fn retrieve(&self, res: &CompiledResponse, q: &Self::Query, sp: &S::Secret, s: usize) -> Result<Message> {
        compiled_retrieve(&self.inner, res, q, sp, &self.keys.sk, s)
    }
}
