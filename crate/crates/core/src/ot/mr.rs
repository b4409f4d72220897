//! Multi-receiver variants over a database of `z` message pairs.
//!
//! In the delegated-query variant P1 knows the record index `v` and simply
//! forwards pair `v`. In the unknown-query variant P1 filters obliviously
//! with the issuer's encrypted one-hot vector, so neither S nor P1 learns `v`.

use alloc::vec::Vec;

use num_bigint::BigUint;
use rand_core::{CryptoRng, RngCore};

use super::base::uint_to_width;
use super::duq::{duq_retrieve, tagged, ReceiverBlinders, ReceiverTag};
use super::{respond, FinalQuery, Oracle, ResponseElement, ResponsePair};
use crate::ahe::{kgen, Ciphertext, KeyPair, OneHotCipherVector, PublicKey, SecretKey};
use crate::error::{Error, Result};
use crate::primitives::rng::{derive, random_bit, random_bytes};
use crate::primitives::{GroupParams, Message, SessionConfig};

/// `z >= 1` message pairs, one per receiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageMatrix {
    pairs: Vec<(Message, Message)>,
}

impl MessageMatrix {
    pub fn new(pairs: Vec<(Message, Message)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Precondition("message matrix needs at least one pair"));
        }
        Ok(MessageMatrix { pairs })
    }

    pub fn z(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(Message, Message)] {
        &self.pairs
    }

    pub fn get(&self, s: bool, v: usize) -> Option<&Message> {
        self.pairs.get(v).map(|(m0, m1)| if s { m1 } else { m0 })
    }
}

/// One independent stream per record so the per-record work can be done in
/// any order and still give the same bytes.
fn record_streams<R: RngCore + CryptoRng + ?Sized>(
    rng: &mut R,
    z: usize,
) -> impl Iterator<Item = crate::primitives::rng::Csprng> {
    let seed = random_bytes(rng, 32);
    (0..z).map(move |t| derive(&seed, &(t as u64).to_be_bytes()))
}

/// Sender response: `z` untagged pairs, each with fresh exponents.
pub fn dqmr_gen_res<R: RngCore + CryptoRng + ?Sized>(
    matrix: &MessageMatrix,
    params: &GroupParams,
    config: &SessionConfig,
    q1: &FinalQuery,
    rng: &mut R,
) -> Result<Vec<ResponsePair>> {
    q1.check(params)?;
    let mut out = Vec::with_capacity(matrix.z());
    for ((m0, m1), mut stream) in matrix.pairs.iter().zip(record_streams(rng, matrix.z())) {
        let p0 = m0.pad(config.sigma)?;
        let p1 = m1.pad(config.sigma)?;
        out.push(respond(params, config, Oracle::H, q1, (&p0, &p1), &mut stream));
    }
    Ok(out)
}

/// P1 keeps pair `v` and drops the rest.
pub fn dqmr_obl_filter(res: &[ResponsePair], v: usize) -> Result<ResponsePair> {
    res.get(v).cloned().ok_or(Error::IndexOutOfRange { index: v, len: res.len() })
}

pub use super::dq::dq_retrieve as dqmr_retrieve;

/// Receiver key generation, sized by the plaintext capacity rule.
pub fn duqmr_r_setup<R: RngCore + CryptoRng + ?Sized>(
    config: &SessionConfig,
    params: &GroupParams,
    rng: &mut R,
) -> Result<KeyPair> {
    kgen(config.ahe_plaintext_bits(params.p().bits()), rng)
}

/// Issuer setup: the encrypted indicator of record `v` among `z`.
pub fn duqmr_t_setup<R: RngCore + CryptoRng + ?Sized>(
    z: usize,
    v: usize,
    pk: &PublicKey,
    rng: &mut R,
) -> Result<OneHotCipherVector> {
    OneHotCipherVector::new(pk, z, v, rng)
}

/// Sender response with each pair's slot order fixed by `swaps[t]`.
pub fn duqmr_gen_res_with_swaps<R: RngCore + CryptoRng + ?Sized>(
    matrix: &MessageMatrix,
    params: &GroupParams,
    config: &SessionConfig,
    q1: &FinalQuery,
    tag: &[u8],
    swaps: &[bool],
    rng: &mut R,
) -> Result<Vec<ResponsePair>> {
    q1.check(params)?;
    if swaps.len() != matrix.z() {
        return Err(Error::Precondition("one swap bit per record"));
    }
    let mut out = Vec::with_capacity(matrix.z());
    let streams = record_streams(rng, matrix.z());
    for (((m0, m1), mut stream), &swap) in matrix.pairs.iter().zip(streams).zip(swaps) {
        let p0 = tagged(m0, tag, config)?;
        let p1 = tagged(m1, tag, config)?;
        out.push(respond(params, config, Oracle::G, q1, (&p0, &p1), &mut stream).swapped(swap));
    }
    Ok(out)
}

/// Sender response: `z` tagged pairs, each independently permuted.
pub fn duqmr_gen_res<R: RngCore + CryptoRng + ?Sized>(
    matrix: &MessageMatrix,
    params: &GroupParams,
    config: &SessionConfig,
    q1: &FinalQuery,
    tag: &[u8],
    rng: &mut R,
) -> Result<Vec<ResponsePair>> {
    let swaps: Vec<bool> = (0..matrix.z()).map(|_| random_bit(rng)).collect();
    duqmr_gen_res_with_swaps(matrix, params, config, q1, tag, &swaps, rng)
}

/// Four ciphertexts: `o[i][0]` encrypts slot `i`'s key and `o[i][1]` its
/// masked bytes, both of record `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredResponse {
    pub o: [[Ciphertext; 2]; 2],
}

fn element_scalars(e: &ResponseElement) -> [BigUint; 2] {
    [e.key.as_uint().clone(), BigUint::from_bytes_be(&e.masked)]
}

/// P1's oblivious filter: `o_{i,i'} = sum_t e'_{i,i',t} * w[t]`.
pub fn duqmr_obl_filter(res: &[ResponsePair], w: &OneHotCipherVector, pk: &PublicKey) -> Result<FilteredResponse> {
    if res.len() != w.len() {
        return Err(Error::Precondition("one-hot vector length differs from z"));
    }
    let mut columns: [[Vec<BigUint>; 2]; 2] = Default::default();
    for pair in res {
        for (i, slot) in [&pair.e0, &pair.e1].into_iter().enumerate() {
            for (c, scalar) in element_scalars(slot).into_iter().enumerate() {
                columns[i][c].push(scalar);
            }
        }
    }
    let [[a, b], [c, d]] = &columns;
    let mut o = w.dot_many(pk, &[a, b, c, d])?.into_iter();
    let mut next = || o.next().expect("four columns");
    Ok(FilteredResponse { o: [[next(), next()], [next(), next()]] })
}

/// Decrypts the four components back into a tagged response pair.
pub fn duqmr_decrypt(
    filtered: &FilteredResponse,
    sk: &SecretKey,
    params: &GroupParams,
    config: &SessionConfig,
) -> Result<ResponsePair> {
    let open = |slot: &[Ciphertext; 2]| -> Result<ResponseElement> {
        let key = params.element(sk.dec(&slot[0])?)?;
        let masked = uint_to_width(&sk.dec(&slot[1])?, config.tagged_len())?;
        Ok(ResponseElement { key, masked })
    };
    Ok(ResponsePair { e0: open(&filtered.o[0])?, e1: open(&filtered.o[1])? })
}

pub fn duqmr_retrieve(
    filtered: &FilteredResponse,
    blinders: &ReceiverBlinders,
    sk: &SecretKey,
    tag: &ReceiverTag,
    params: &GroupParams,
    config: &SessionConfig,
) -> Result<Message> {
    let pair = duqmr_decrypt(filtered, sk, params, config)?;
    duq_retrieve(&pair, blinders, tag, params, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::dq::{dq_p1_gen_query, dq_p2_gen_query, dq_request};
    use crate::ot::duq::{duq_p1_gen_query, duq_p2_gen_query, duq_r_request, duq_t_request};
    use crate::primitives::rng::seeded;

    fn matrix(z: usize) -> MessageMatrix {
        MessageMatrix::new(
            (0..z)
                .map(|t| (Message::new(alloc::format!("m0,{t}")), Message::new(alloc::format!("m1,{t}"))))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn dqmr_every_record() {
        let params = GroupParams::test_profile();
        let config = SessionConfig::test_profile();
        let mut rng = seeded(b"dqmr");
        let db = matrix(4);
        for s in [false, true] {
            let (req1, req2, st) = dq_request(&params, s, &mut rng);
            let q1 = dq_p1_gen_query(&req1, &dq_p2_gen_query(&req2, &params), &params);
            let res = dqmr_gen_res(&db, &params, &config, &q1, &mut rng).unwrap();
            assert_eq!(res.len(), 4);
            for v in 0..4 {
                let one = dqmr_obl_filter(&res, v).unwrap();
                assert_eq!(&dqmr_retrieve(&one, &st, &params, &config).unwrap(), db.get(s, v).unwrap());
            }
            assert!(dqmr_obl_filter(&res, 4).is_err());
        }
    }

    #[test]
    fn per_record_streams_are_stable() {
        let params = GroupParams::test_profile();
        let config = SessionConfig::test_profile();
        let (req1, req2, _) = dq_request(&params, false, &mut seeded(b"q"));
        let q1 = dq_p1_gen_query(&req1, &dq_p2_gen_query(&req2, &params), &params);
        let a = dqmr_gen_res(&matrix(3), &params, &config, &q1, &mut seeded(b"r")).unwrap();
        let b = dqmr_gen_res(&matrix(3), &params, &config, &q1, &mut seeded(b"r")).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].e0.key, a[1].e0.key);
    }

    #[test]
    fn duqmr_every_record() {
        let params = GroupParams::test_profile();
        let config = SessionConfig::test_profile();
        let mut rng = seeded(b"duqmr");
        let keys = duqmr_r_setup(&config, &params, &mut rng).unwrap();
        assert!(keys.pk.plaintext_bits() >= (config.sigma.bits() + config.lambda.bits() + 8) as u64);
        let db = matrix(4);
        for v in 0..4 {
            let w = duqmr_t_setup(4, v, &keys.pk, &mut rng).unwrap();
            for s in [false, true] {
                let blinders = duq_r_request(&params, &mut rng);
                let issued = duq_t_request(&config, s, &mut rng);
                let q2 = duq_p2_gen_query(&blinders.r2, issued.s2, &params);
                let q1 = duq_p1_gen_query(&blinders.r1, issued.s1, &q2, &params);
                let res = duqmr_gen_res(&db, &params, &config, &q1, &issued.tag, &mut rng).unwrap();
                let filtered = duqmr_obl_filter(&res, &w, &keys.pk).unwrap();
                assert_eq!(duqmr_decrypt(&filtered, &keys.sk, &params, &config).unwrap(), res[v]);
                let got =
                    duqmr_retrieve(&filtered, &blinders, &keys.sk, &issued.receiver_tag(), &params, &config).unwrap();
                assert_eq!(&got, db.get(s, v).unwrap());
            }
        }
    }

    #[test]
    fn wrong_secret_key_is_rejected() {
        let params = GroupParams::test_profile();
        let config = SessionConfig::test_profile();
        let mut rng = seeded(b"duqmr-key");
        let keys = duqmr_r_setup(&config, &params, &mut rng).unwrap();
        let other = duqmr_r_setup(&config, &params, &mut rng).unwrap();
        let blinders = duq_r_request(&params, &mut rng);
        let issued = duq_t_request(&config, true, &mut rng);
        let q1 = duq_p1_gen_query(&blinders.r1, issued.s1, &duq_p2_gen_query(&blinders.r2, issued.s2, &params), &params);
        let res = duqmr_gen_res(&matrix(1), &params, &config, &q1, &issued.tag, &mut rng).unwrap();
        let w = duqmr_t_setup(1, 0, &keys.pk, &mut rng).unwrap();
        let filtered = duqmr_obl_filter(&res, &w, &keys.pk).unwrap();
        let got = duqmr_retrieve(&filtered, &blinders, &other.sk, &issued.receiver_tag(), &params, &config);
        assert_eq!(got, Err(Error::KeyMismatch));
    }
}
