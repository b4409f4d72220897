//! Property and statistical checks across the protocol family.

use num_bigint::BigUint;
use oblivis_core::ahe::kgen;
use oblivis_core::metrics::measure;
use oblivis_core::ot::base::{np_gen_query, np_gen_res, np_retrieve, Compilable, NaiveNpSuite, OtSuite};
use oblivis_core::ot::compiler::Compiled;
use oblivis_core::ot::dq::{dq_gen_res, dq_p1_gen_query, dq_p2_gen_query, dq_request, dq_retrieve, ReceiverState};
use oblivis_core::ot::duq::{
    duq_gen_res, duq_gen_res_with_swap, duq_p1_gen_query, duq_p2_gen_query, duq_r_request, duq_retrieve,
    duq_t_request,
};
use oblivis_core::ot::mr::{
    duqmr_gen_res, duqmr_obl_filter, duqmr_r_setup, duqmr_retrieve, duqmr_t_setup, dqmr_gen_res, dqmr_obl_filter,
    dqmr_retrieve, MessageMatrix,
};
use oblivis_core::ot::{open_slot, Oracle};
use oblivis_core::primitives::rng::{random_bytes, seeded, Csprng};
use oblivis_core::primitives::{gen_group, hash_g, hash_h, parse, BitLength};
use oblivis_core::{GroupParams, Message, SessionConfig};
use rand_core::RngCore;

fn random_message(rng: &mut Csprng, config: &SessionConfig) -> Message {
    let len = (rng.next_u32() as usize) % (config.message_capacity() + 1);
    Message::new(random_bytes(rng, len))
}

#[test]
fn naor_pinkas_random_pairs() {
    let params = GroupParams::test_profile();
    let config = SessionConfig::test_profile();
    let mut rng = seeded(b"np-prop");
    for _ in 0..100 {
        let m0 = random_message(&mut rng, &config);
        let m1 = random_message(&mut rng, &config);
        for s in [false, true] {
            let (q, sp) = np_gen_query(&params, s, &mut rng);
            let res = np_gen_res(&m0, &m1, &params, &config, &q, &mut rng).unwrap();
            assert_eq!(np_retrieve(&res, &sp, &params, &config).unwrap(), if s { m1.clone() } else { m0.clone() });
        }
    }
}

#[test]
fn unchosen_slot_does_not_decode() {
    let params = GroupParams::test_profile();
    let config = SessionConfig::test_profile();
    let mut rng = seeded(b"np-other");
    let mut decoded = 0;
    for i in 0..1000 {
        let s = i % 2 == 1;
        let (q, sp) = np_gen_query(&params, s, &mut rng);
        let res = np_gen_res(&"zero".into(), &"one".into(), &params, &config, &q, &mut rng).unwrap();
        let other = open_slot(&params, &config, Oracle::H, res.slot(!s), &sp.r).unwrap();
        if Message::unpad(&other, config.sigma).is_ok() {
            decoded += 1;
        }
    }
    assert_eq!(decoded, 0);
}

#[test]
fn dq_all_share_combinations() {
    let params = GroupParams::test_profile();
    let config = SessionConfig::test_profile();
    let mut rng = seeded(b"dq-grid");
    let m0 = Message::from("message zero");
    let m1 = Message::from("message one");
    for s in [false, true] {
        for s1 in [false, true] {
            for _ in 0..10 {
                let (mut req1, mut req2, mut st) = dq_request(&params, s, &mut rng);
                // Force the share split under test.
                req1.share = s1;
                req2.share = s1 ^ s;
                st = ReceiverState { s1, s2: s1 ^ s, ..st };
                let q1 = dq_p1_gen_query(&req1, &dq_p2_gen_query(&req2, &params), &params);
                q1.check(&params).unwrap();
                let res = dq_gen_res(&m0, &m1, &params, &config, &q1, &mut rng).unwrap();
                assert_eq!(dq_retrieve(&res, &st, &params, &config).unwrap(), if s { m1.clone() } else { m0.clone() });
            }
        }
    }
}

#[test]
fn duq_sixteen_paths() {
    let params = GroupParams::test_profile();
    let config = SessionConfig::test_profile();
    let mut rng = seeded(b"duq-grid");
    for s in [false, true] {
        for s1 in [false, true] {
            for swap in [false, true] {
                for _ in 0..5 {
                    let m0 = random_message(&mut rng, &config);
                    let m1 = random_message(&mut rng, &config);
                    let blinders = duq_r_request(&params, &mut rng);
                    let mut issued = duq_t_request(&config, s, &mut rng);
                    issued.s1 = s1;
                    issued.s2 = s1 ^ s;
                    let q2 = duq_p2_gen_query(&blinders.r2, issued.s2, &params);
                    let q1 = duq_p1_gen_query(&blinders.r1, issued.s1, &q2, &params);
                    let res =
                        duq_gen_res_with_swap(&m0, &m1, &params, &config, &q1, &issued.tag, swap, &mut rng).unwrap();
                    let got = duq_retrieve(&res, &blinders, &issued.receiver_tag(), &params, &config).unwrap();
                    assert_eq!(got, if s { m1 } else { m0 });
                }
            }
        }
    }
}

#[test]
fn duq_permutation_is_balanced() {
    // Which slot holds m0 is visible to a test that knows the exponent.
    let params = gen_group(64, b"perm").unwrap();
    let config = SessionConfig::new(32, 256, 64).unwrap();
    let mut rng = seeded(b"duq-perm");
    let mut swapped = 0;
    for _ in 0..1000 {
        let blinders = duq_r_request(&params, &mut rng);
        let issued = duq_t_request(&config, false, &mut rng);
        let q2 = duq_p2_gen_query(&blinders.r2, issued.s2, &params);
        let q1 = duq_p1_gen_query(&blinders.r1, issued.s1, &q2, &params);
        let res = duq_gen_res(&"m0".into(), &"m1".into(), &params, &config, &q1, &issued.tag, &mut rng).unwrap();
        let x = oblivis_core::ot::delegated_exponent(&params, &blinders.r1, &blinders.r2, issued.s2);
        let first = open_slot(&params, &config, Oracle::G, &res.e0, &x).unwrap();
        let (_, trailer) = parse(config.lambda, &first).unwrap();
        if trailer != issued.tag.as_slice() {
            swapped += 1;
        }
    }
    assert!((450..=550).contains(&swapped), "swapped {swapped} of 1000");
}

#[test]
fn tag_never_matches_twice() {
    // A small group keeps 10^5 honest runs fast; the tag check does not
    // depend on the group size.
    let params = gen_group(32, b"tags").unwrap();
    let config = SessionConfig::new(32, 64, 32).unwrap();
    let mut rng = seeded(b"tag-runs");
    for i in 0..100_000u32 {
        let s = i % 2 == 0;
        let blinders = duq_r_request(&params, &mut rng);
        let issued = duq_t_request(&config, s, &mut rng);
        let q2 = duq_p2_gen_query(&blinders.r2, issued.s2, &params);
        let q1 = duq_p1_gen_query(&blinders.r1, issued.s1, &q2, &params);
        let res = duq_gen_res(&"a".into(), &"b".into(), &params, &config, &q1, &issued.tag, &mut rng).unwrap();
        let got = duq_retrieve(&res, &blinders, &issued.receiver_tag(), &params, &config).unwrap();
        assert_eq!(got, Message::from(if s { "b" } else { "a" }), "run {i}");
    }
}

fn matrix(rng: &mut Csprng, config: &SessionConfig, z: usize) -> MessageMatrix {
    MessageMatrix::new((0..z).map(|_| (random_message(rng, config), random_message(rng, config))).collect()).unwrap()
}

#[test]
fn dqmr_grid() {
    let params = GroupParams::test_profile();
    let config = SessionConfig::test_profile();
    let mut rng = seeded(b"dqmr-grid");
    for z in [1usize, 2, 8] {
        let db = matrix(&mut rng, &config, z);
        for s in [false, true] {
            let (req1, req2, st) = dq_request(&params, s, &mut rng);
            let q1 = dq_p1_gen_query(&req1, &dq_p2_gen_query(&req2, &params), &params);
            let res = dqmr_gen_res(&db, &params, &config, &q1, &mut rng).unwrap();
            for v in 0..z {
                let one = dqmr_obl_filter(&res, v).unwrap();
                assert_eq!(&dqmr_retrieve(&one, &st, &params, &config).unwrap(), db.get(s, v).unwrap());
            }
        }
    }
}

#[test]
fn duqmr_grid() {
    let params = GroupParams::test_profile();
    let config = SessionConfig::test_profile();
    let mut rng = seeded(b"duqmr-grid");
    let keys = duqmr_r_setup(&config, &params, &mut rng).unwrap();
    for z in [1usize, 2, 8] {
        let db = matrix(&mut rng, &config, z);
        for v in 0..z {
            let w = duqmr_t_setup(z, v, &keys.pk, &mut rng).unwrap();
            for s in [false, true] {
                let blinders = duq_r_request(&params, &mut rng);
                let issued = duq_t_request(&config, s, &mut rng);
                let q2 = duq_p2_gen_query(&blinders.r2, issued.s2, &params);
                let q1 = duq_p1_gen_query(&blinders.r1, issued.s1, &q2, &params);
                let res = duqmr_gen_res(&db, &params, &config, &q1, &issued.tag, &mut rng).unwrap();
                let filtered = duqmr_obl_filter(&res, &w, &keys.pk).unwrap();
                let got =
                    duqmr_retrieve(&filtered, &blinders, &keys.sk, &issued.receiver_tag(), &params, &config).unwrap();
                assert_eq!(&got, db.get(s, v).unwrap(), "z={z} v={v} s={s}");
            }
        }
    }
}

#[test]
fn compiled_is_transparent() {
    let params = GroupParams::test_profile();
    let config = SessionConfig::test_profile();
    let mut rng = seeded(b"transparent");
    for n in [2usize, 5, 16, 64] {
        let inner = NaiveNpSuite::new(params.clone(), config, n).unwrap();
        let compiled = Compiled::new(inner.clone(), &mut rng).unwrap();
        let messages: Vec<Message> = (0..n).map(|_| random_message(&mut rng, &config)).collect();
        let picks: Vec<usize> = if n <= 16 { (0..n).collect() } else { vec![0, n / 2, n - 1] };
        for s in picks {
            let (q, sp) = inner.gen_query(s, &mut rng).unwrap();
            let plain = inner.retrieve(&inner.gen_res(&messages, &q, &mut rng).unwrap(), &q, &sp, s).unwrap();
            let (cq, csp) = compiled.gen_query(s, &mut rng).unwrap();
            let cres = compiled.gen_res(&messages, &cq, &mut rng).unwrap();
            assert_eq!(cres.e.len(), inner.width());
            assert_eq!(compiled.retrieve(&cres, &cq, &csp, s).unwrap(), plain);
            assert_eq!(plain, messages[s]);
        }
    }
}

#[test]
fn receiver_requests_do_no_public_key_work() {
    let params = GroupParams::test_profile();
    let config = SessionConfig::test_profile();
    let mut rng = seeded(b"free");
    let (_, dq) = measure(|| dq_request(&params, true, &mut rng));
    let (_, duq) = measure(|| duq_r_request(&params, &mut rng));
    let (_, issuer) = measure(|| duq_t_request(&config, true, &mut rng));
    for counts in [dq, duq, issuer] {
        assert_eq!(counts.group_exps, 0);
        assert_eq!(counts.ahe_ops, 0);
    }
}

/// Upper tail of the chi-square distribution with one degree of freedom.
fn chi_square_p_value(ones: u64, n: u64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let expected = n as f64 / 2.0;
    let stat = 2.0 * (ones as f64 - expected).powi(2) / expected;
    ChiSquared::new(1.0).unwrap().sf(stat)
}

#[test]
fn share_and_swap_bits_are_uniform() {
    let mut rng = seeded(b"uniform");
    let n = 10_000u64;
    let share_ones = (0..n).filter(|_| oblivis_core::primitives::share_bit(true, &mut rng).0).count() as u64;
    let swap_ones = (0..n).filter(|_| oblivis_core::primitives::permute_pair(&mut rng, (0, 1)).1).count() as u64;
    for ones in [share_ones, swap_ones] {
        assert!((4700..=5300).contains(&ones));
        assert!(chi_square_p_value(ones, n) > 0.01);
    }
}

#[test]
fn hash_outputs_are_balanced() {
    let sigma = BitLength::new(256).unwrap();
    let lambda = BitLength::new(32).unwrap();
    let mut ones = [0u64; 2];
    let mut total = [0u64; 2];
    for i in 0..100_000u32 {
        let input = i.to_be_bytes();
        for (k, out) in [hash_h(&input, sigma), hash_g(&input, sigma, lambda)].iter().enumerate() {
            ones[k] += out.iter().map(|b| b.count_ones() as u64).sum::<u64>();
            total[k] += out.len() as u64 * 8;
        }
    }
    for k in 0..2 {
        let frac = ones[k] as f64 / total[k] as f64;
        assert!((0.49..=0.51).contains(&frac), "fraction {frac}");
    }
}

#[test]
fn ahe_capacity_rule_holds_for_profiles() {
    for (config, params) in [
        (SessionConfig::test_profile(), GroupParams::test_profile()),
        (SessionConfig::production_profile(), GroupParams::modp_2048()),
    ] {
        let bits = config.ahe_plaintext_bits(params.p().bits());
        assert!(bits >= params.p().bits() + 8);
        assert!(bits >= (config.sigma.bits() + config.lambda.bits()) as u64 + 8);
    }
    let kp = kgen(200, &mut seeded(b"cap")).unwrap();
    let too_wide = BigUint::from(1u32) << 200u32;
    assert!(kp.pk.enc(&too_wide, &mut seeded(b"x")).is_err());
}
