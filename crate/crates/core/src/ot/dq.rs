//! Delegated-query OT: the receiver hands XOR shares of its choice bit to
//! two proxies, who build the query pair for it.

use rand_core::{CryptoRng, RngCore};

use super::{delegated_exponent, final_query, open_slot, partial_query, respond, FinalQuery, Oracle, PartialQuery, ResponsePair};
use crate::error::Result;
use crate::primitives::rng::random_bit;
use crate::primitives::{Exponent, GroupParams, Message, SessionConfig};

/// What one proxy receives from the receiver: a share of `s` and a blinder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelegationRequest {
    pub share: bool,
    pub blinder: Exponent,
}

#[derive(Clone, Debug)]
pub struct ReceiverState {
    pub s: bool,
    pub s1: bool,
    pub s2: bool,
    pub r1: Exponent,
    pub r2: Exponent,
}

impl ReceiverState {
    pub fn exponent(&self, params: &GroupParams) -> Exponent {
        delegated_exponent(params, &self.r1, &self.r2, self.s2)
    }
}

/// Receiver request. Draws shares and blinders only; no group operation.
pub fn dq_request<R: RngCore + CryptoRng + ?Sized>(
    params: &GroupParams,
    s: bool,
    rng: &mut R,
) -> (DelegationRequest, DelegationRequest, ReceiverState) {
    let s1 = random_bit(rng);
    let s2 = s1 ^ s;
    let r1 = params.random_exponent(rng);
    let r2 = params.random_exponent(rng);
    let req1 = DelegationRequest { share: s1, blinder: r1.clone() };
    let req2 = DelegationRequest { share: s2, blinder: r2.clone() };
    (req1, req2, ReceiverState { s, s1, s2, r1, r2 })
}

pub fn dq_p2_gen_query(req2: &DelegationRequest, params: &GroupParams) -> PartialQuery {
    partial_query(params, req2.share, &req2.blinder)
}

pub fn dq_p1_gen_query(req1: &DelegationRequest, q2: &PartialQuery, params: &GroupParams) -> FinalQuery {
    final_query(params, req1.share, &req1.blinder, q2)
}

/// Sender response; aborts unless `beta0 * beta1 = C`.
pub fn dq_gen_res<R: RngCore + CryptoRng + ?Sized>(
    m0: &Message,
    m1: &Message,
    params: &GroupParams,
    config: &SessionConfig,
    q1: &FinalQuery,
    rng: &mut R,
) -> Result<ResponsePair> {
    q1.check(params)?;
    let p0 = m0.pad(config.sigma)?;
    let p1 = m1.pad(config.sigma)?;
    Ok(respond(params, config, Oracle::H, q1, (&p0, &p1), rng))
}

pub fn dq_retrieve(
    res: &ResponsePair,
    state: &ReceiverState,
    params: &GroupParams,
    config: &SessionConfig,
) -> Result<Message> {
    let x = state.exponent(params);
    let padded = open_slot(params, config, Oracle::H, res.slot(state.s), &x)?;
    Message::unpad(&padded, config.sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::metrics::measure;
    use crate::primitives::rng::seeded;

    #[test]
    fn request_is_free_of_group_operations() {
        let params = GroupParams::test_profile();
        let mut rng = seeded(b"dq-req");
        let (_, counts) = measure(|| dq_request(&params, true, &mut rng));
        assert_eq!(counts.group_exps, 0);
        assert_eq!(counts.group_muls, 0);
    }

    #[test]
    fn shares_reconstruct() {
        let params = GroupParams::test_profile();
        let mut rng = seeded(b"dq-shares");
        for s in [false, true] {
            let (a, b, st) = dq_request(&params, s, &mut rng);
            assert_eq!(a.share ^ b.share, s);
            assert_eq!((st.s1, st.s2), (a.share, b.share));
        }
    }

    #[test]
    fn end_to_end() {
        let params = GroupParams::test_profile();
        let config = SessionConfig::test_profile();
        let mut rng = seeded(b"dq-e2e");
        let m0 = Message::from("zero");
        let m1 = Message::from("one");
        for _ in 0..20 {
            for s in [false, true] {
                let (req1, req2, st) = dq_request(&params, s, &mut rng);
                let q2 = dq_p2_gen_query(&req2, &params);
                let q1 = dq_p1_gen_query(&req1, &q2, &params);
                let res = dq_gen_res(&m0, &m1, &params, &config, &q1, &mut rng).unwrap();
                let want = if s { &m1 } else { &m0 };
                assert_eq!(&dq_retrieve(&res, &st, &params, &config).unwrap(), want);
            }
        }
    }

    #[test]
    fn tampered_query_aborts() {
        let params = GroupParams::test_profile();
        let config = SessionConfig::test_profile();
        let mut rng = seeded(b"dq-tamper");
        let (req1, req2, _) = dq_request(&params, false, &mut rng);
        let mut q1 = dq_p1_gen_query(&req1, &dq_p2_gen_query(&req2, &params), &params);
        q1.beta1 = params.mul(&q1.beta1, params.g());
        let got = dq_gen_res(&"a".into(), &"b".into(), &params, &config, &q1, &mut rng);
        assert_eq!(got, Err(Error::ProductCheck));
    }
}
