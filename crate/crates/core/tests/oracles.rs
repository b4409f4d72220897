//! Protocol outputs checked against straight-line recomputations that use
//! only raw big-integer arithmetic and SHAKE256, not the library's group
//! or hashing code.

use num_bigint::BigUint;
use num_traits::One;
use oblivis_core::ot::base::{np_gen_query, np_gen_res};
use oblivis_core::ot::dq::{dq_gen_res, dq_p1_gen_query, dq_p2_gen_query, DelegationRequest};
use oblivis_core::ot::mr::{dqmr_gen_res, MessageMatrix};
use oblivis_core::primitives::gen_group;
use oblivis_core::primitives::rng::{derive, seeded, Csprng};
use oblivis_core::{GroupParams, Message, SessionConfig};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

fn small_group() -> GroupParams {
    gen_group(10, &[0x00]).unwrap()
}

fn small_config() -> SessionConfig {
    SessionConfig::new(32, 256, 10).unwrap()
}

fn shake(tag: u8, input: &[u8], len: usize) -> Vec<u8> {
    let mut h = Shake256::default();
    h.update(&[tag]);
    h.update(input);
    let mut out = vec![0u8; len];
    h.finalize_xof().read(&mut out);
    out
}

fn be_fixed(x: &BigUint, width: usize) -> Vec<u8> {
    let raw = x.to_bytes_be();
    let mut out = vec![0u8; width - raw.len()];
    out.extend_from_slice(&raw);
    out
}

fn pad(m: &[u8], width: usize) -> Vec<u8> {
    let mut out = (m.len() as u32).to_be_bytes().to_vec();
    out.extend_from_slice(m);
    out.resize(width, 0);
    out
}

/// `(g^y, H(beta^y) xor pad(m))` computed by hand.
fn oracle_slot(p: &BigUint, g: &BigUint, beta: &BigUint, y: &BigUint, m: &[u8], sigma_bytes: usize) -> (BigUint, Vec<u8>) {
    let width = p.bits().div_ceil(8) as usize;
    let key = g.modpow(y, p);
    let shared = beta.modpow(y, p);
    let mask = shake(0x48, &be_fixed(&shared, width), sigma_bytes);
    let masked = mask.iter().zip(pad(m, sigma_bytes)).map(|(a, b)| a ^ b).collect();
    (key, masked)
}

fn inverse(x: &BigUint, p: &BigUint) -> BigUint {
    x.modpow(&(p - 2u32), p)
}

/// Discrete log of `target` to base `g` by exhaustive search; small groups only.
fn brute_dlog(g: &BigUint, target: &BigUint, p: &BigUint, q: u64) -> u64 {
    let mut acc = BigUint::one();
    for a in 0..q {
        if &acc == target {
            return a;
        }
        acc = acc * g % p;
    }
    panic!("no discrete log");
}

#[test]
fn small_group_is_the_documented_one() {
    let params = small_group();
    assert_eq!(*params.p(), BigUint::from(1187u32));
    assert_eq!(*params.q(), BigUint::from(593u32));
    let g = params.g().as_uint();
    assert!(g.modpow(params.q(), params.p()).is_one());
    // Trial division confirms both primes independently of the library.
    for n in [1187u32, 593] {
        assert!((2..n).take_while(|d| d * d <= n).all(|d| n % d != 0));
    }
}

#[test]
fn naor_pinkas_transcript_matches_oracle() {
    let params = small_group();
    let config = small_config();
    let (p, g, c) = (params.p().clone(), params.g().as_uint().clone(), params.c().as_uint().clone());
    let m0 = b"first message".to_vec();
    let m1 = b"second".to_vec();
    for s in [false, true] {
        let mut rng = seeded(b"np-oracle");
        let (q, sp) = np_gen_query(&params, s, &mut rng);
        let g_r = g.modpow(sp.r.as_uint(), &p);
        let expected_beta0 = if s { &c * inverse(&g_r, &p) % &p } else { g_r.clone() };
        assert_eq!(*q.beta0.as_uint(), expected_beta0);

        // Replay the sender's two exponent draws from a clone of its RNG.
        let mut sender_rng = seeded(b"np-sender");
        let mut replay: Csprng = sender_rng.clone();
        let y0 = params.random_exponent(&mut replay);
        let y1 = params.random_exponent(&mut replay);
        let res = np_gen_res(&Message::new(m0.clone()), &Message::new(m1.clone()), &params, &config, &q, &mut sender_rng)
            .unwrap();

        let beta1 = &c * inverse(&expected_beta0, &p) % &p;
        let (k0, e0) = oracle_slot(&p, &g, &expected_beta0, y0.as_uint(), &m0, 32);
        let (k1, e1) = oracle_slot(&p, &g, &beta1, y1.as_uint(), &m1, 32);
        assert_eq!((res.e0.key.as_uint(), &res.e0.masked), (&k0, &e0));
        assert_eq!((res.e1.key.as_uint(), &res.e1.masked), (&k1, &e1));
    }
}

/// Every cell of the delegated-query algebra table, with the exponent of C
/// recovered by brute force so each entry is evaluated as `g^(exponent)`.
#[test]
fn delegated_query_table_on_small_group() {
    let params = small_group();
    let p = params.p().clone();
    let g = params.g().as_uint().clone();
    let q = 593u64;
    let a = brute_dlog(&g, params.c().as_uint(), &p, q);
    let gpow = |e: i64| g.modpow(&BigUint::from(e.rem_euclid(q as i64) as u64), &p);
    let mut rng = seeded(b"table");
    for _ in 0..20 {
        let r1 = params.random_exponent(&mut rng);
        let r2 = params.random_exponent(&mut rng);
        let (r1i, r2i) = (to_i64(r1.as_uint()), to_i64(r2.as_uint()));
        let a = a as i64;
        // (s1, s2) -> (delta0, delta1, beta0, beta1) as exponents of g.
        let table = [
            ((false, false), (r2i, a - r2i, r2i + r1i, a - r2i - r1i)),
            ((false, true), (a - r2i, r2i, a - r2i + r1i, r2i - r1i)),
            ((true, false), (r2i, a - r2i, a - r2i - r1i, r2i + r1i)),
            ((true, true), (a - r2i, r2i, r2i - r1i, a - r2i + r1i)),
        ];
        for ((s1, s2), (d0, d1, b0, b1)) in table {
            let q2 = dq_p2_gen_query(&DelegationRequest { share: s2, blinder: r2.clone() }, &params);
            let q1 = dq_p1_gen_query(&DelegationRequest { share: s1, blinder: r1.clone() }, &q2, &params);
            assert_eq!(*q2.delta0.as_uint(), gpow(d0), "delta0 s1={s1} s2={s2}");
            assert_eq!(*q2.delta1.as_uint(), gpow(d1), "delta1 s1={s1} s2={s2}");
            assert_eq!(*q1.beta0.as_uint(), gpow(b0), "beta0 s1={s1} s2={s2}");
            assert_eq!(*q1.beta1.as_uint(), gpow(b1), "beta1 s1={s1} s2={s2}");
        }
    }
}

fn to_i64(x: &BigUint) -> i64 {
    x.to_u64_digits().first().copied().unwrap_or(0) as i64
}

/// The same table on the 512-bit test group, writing `g^a` as `C`.
#[test]
fn delegated_query_table_on_test_group() {
    let params = GroupParams::test_profile();
    let p = params.p().clone();
    let qm = params.q().clone();
    let g = params.g().as_uint().clone();
    let c = params.c().as_uint().clone();
    let mut rng = seeded(b"table-512");
    let r1 = params.random_exponent(&mut rng);
    let r2 = params.random_exponent(&mut rng);
    let (r1u, r2u) = (r1.as_uint().clone(), r2.as_uint().clone());
    // g^(e) for e = r2 + sign * r1 with exponent arithmetic mod q.
    let g_of = |plus: bool| {
        let e = if plus { (&r2u + &r1u) % &qm } else { (&r2u + &qm - &r1u) % &qm };
        g.modpow(&e, &p)
    };
    let c_over = |x: &BigUint| &c * inverse(x, &p) % &p;
    let g_r2 = g.modpow(&r2u, &p);
    for (s1, s2) in [(false, false), (false, true), (true, false), (true, true)] {
        let (d0, d1) = if s2 { (c_over(&g_r2), g_r2.clone()) } else { (g_r2.clone(), c_over(&g_r2)) };
        // g^(a - r2 + r1) = C / g^(r2 - r1), and so on.
        let (b0, b1) = match (s1, s2) {
            (false, false) => (g_of(true), c_over(&g_of(true))),
            (false, true) => (c_over(&g_of(false)), g_of(false)),
            (true, false) => (c_over(&g_of(true)), g_of(true)),
            (true, true) => (g_of(false), c_over(&g_of(false))),
        };
        let q2 = dq_p2_gen_query(&DelegationRequest { share: s2, blinder: r2.clone() }, &params);
        let q1 = dq_p1_gen_query(&DelegationRequest { share: s1, blinder: r1.clone() }, &q2, &params);
        assert_eq!((q2.delta0.as_uint(), q2.delta1.as_uint()), (&d0, &d1));
        assert_eq!((q1.beta0.as_uint(), q1.beta1.as_uint()), (&b0, &b1));
    }
}

#[test]
fn delegated_response_transcript_matches_oracle() {
    let params = small_group();
    let config = small_config();
    let (p, g) = (params.p().clone(), params.g().as_uint().clone());
    let mut rng = seeded(b"dq-oracle");
    let r1 = params.random_exponent(&mut rng);
    let r2 = params.random_exponent(&mut rng);
    let q2 = dq_p2_gen_query(&DelegationRequest { share: true, blinder: r2 }, &params);
    let q1 = dq_p1_gen_query(&DelegationRequest { share: false, blinder: r1 }, &q2, &params);
    let mut sender = seeded(b"dq-sender");
    let mut replay = sender.clone();
    let y0 = params.random_exponent(&mut replay);
    let y1 = params.random_exponent(&mut replay);
    let res = dq_gen_res(&"m-zero".into(), &"m-one".into(), &params, &config, &q1, &mut sender).unwrap();
    let (k0, e0) = oracle_slot(&p, &g, q1.beta0.as_uint(), y0.as_uint(), b"m-zero", 32);
    let (k1, e1) = oracle_slot(&p, &g, q1.beta1.as_uint(), y1.as_uint(), b"m-one", 32);
    assert_eq!((res.e0.key.as_uint(), &res.e0.masked), (&k0, &e0));
    assert_eq!((res.e1.key.as_uint(), &res.e1.masked), (&k1, &e1));
}

#[test]
fn multi_receiver_transcript_matches_oracle() {
    let params = small_group();
    let config = small_config();
    let (p, g) = (params.p().clone(), params.g().as_uint().clone());
    let mut rng = seeded(b"dqmr-oracle");
    let r1 = params.random_exponent(&mut rng);
    let r2 = params.random_exponent(&mut rng);
    let q2 = dq_p2_gen_query(&DelegationRequest { share: false, blinder: r2 }, &params);
    let q1 = dq_p1_gen_query(&DelegationRequest { share: true, blinder: r1 }, &q2, &params);
    let db = MessageMatrix::new(vec![("a0".into(), "a1".into()), ("b0".into(), "b1".into())]).unwrap();

    // The sender draws one 32-byte seed and derives record t's stream from it.
    let mut sender = seeded(b"dqmr-sender");
    let mut replay = sender.clone();
    let mut seed = [0u8; 32];
    rand_core::RngCore::fill_bytes(&mut replay, &mut seed);
    let res = dqmr_gen_res(&db, &params, &config, &q1, &mut sender).unwrap();
    assert_eq!(res.len(), 2);
    for (t, (m0, m1)) in [(b"a0", b"a1"), (b"b0", b"b1")].into_iter().enumerate() {
        let mut stream = derive(&seed, &(t as u64).to_be_bytes());
        let y0 = params.random_exponent(&mut stream);
        let y1 = params.random_exponent(&mut stream);
        let (k0, e0) = oracle_slot(&p, &g, q1.beta0.as_uint(), y0.as_uint(), m0, 32);
        let (k1, e1) = oracle_slot(&p, &g, q1.beta1.as_uint(), y1.as_uint(), m1, 32);
        assert_eq!((res[t].e0.key.as_uint(), &res[t].e0.masked), (&k0, &e0));
        assert_eq!((res[t].e1.key.as_uint(), &res[t].e1.masked), (&k1, &e1));
    }
}

#[test]
fn tiny_group_exponent_by_hand() {
    let params = GroupParams::new(BigUint::from(23u32), BigUint::from(4u32)).unwrap();
    let got = params.group_exp(&BigUint::from(4u32), &BigUint::from(3u32)).unwrap();
    assert_eq!(*got.as_uint(), BigUint::from(64u32 % 23));
}
