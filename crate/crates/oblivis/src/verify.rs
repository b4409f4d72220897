//! Property suites behind `oblivis verify`. Each suite is a quick,
//! self-contained check at the test profile.

use num_bigint::BigUint;
use rand_core::RngCore;
use oblivis_core::ahe::{kgen, OneHotCipherVector};
use oblivis_core::ot::base::{np_gen_query, np_gen_res, np_retrieve, NaiveNpSuite, OtSuite};
use oblivis_core::ot::compiler::Compiled;
use oblivis_core::ot::dq::{dq_gen_res, dq_p1_gen_query, dq_p2_gen_query, DelegationRequest};
use oblivis_core::ot::duq::{duq_gen_res_with_swap, duq_p1_gen_query, duq_p2_gen_query, duq_r_request, duq_retrieve, IssuerRequest};
use oblivis_core::ot::mr::{
    dqmr_gen_res, dqmr_obl_filter, dqmr_retrieve, duqmr_gen_res, duqmr_obl_filter, duqmr_r_setup, duqmr_retrieve,
    duqmr_t_setup, MessageMatrix,
};
use oblivis_core::ot::{delegated_exponent, open_slot, Oracle};
use oblivis_core::primitives::rng::{random_below, random_bit, random_bytes, seeded, Csprng};
use oblivis_core::primitives::{gen_group, hash_g, hash_h, share_bit, swap_pair, xor_bytes};
use oblivis_core::supersonic::{ss_gen_res, ss_obl_filter, ss_retrieve, ss_setup, PadKeys};
use oblivis_core::wire::Role;
use oblivis_core::{Exponent, GroupParams, Message, SessionConfig};

use crate::harness::{assert_sender_push, bytes_to_role, make_inputs, run_session, Protocol, RoleOutput, SessionSetup};

pub const SUITES: [&str; 9] = ["primitives", "ahe", "naor-pinkas", "dq", "duq", "mr", "compiled", "supersonic", "harness"];

/// How the receiver combines its blinders into the unmasking exponent.
pub type ExponentFn = fn(&GroupParams, &Exponent, &Exponent, bool) -> Exponent;

/// The swapped-sign mutation, `x = r2 - r1 * (-1)^{s2}`.
pub fn swapped_sign(params: &GroupParams, r1: &Exponent, r2: &Exponent, s2: bool) -> Exponent {
    delegated_exponent(params, r1, r2, !s2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type Check = Result<(), String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn setup() -> (GroupParams, SessionConfig, Csprng) {
    (GroupParams::test_profile(), SessionConfig::test_profile(), seeded(b"oblivis-verify"))
}

fn message(rng: &mut Csprng, config: &SessionConfig) -> Message {
    // Slightly biased length, which is fine for a correctness check.
    let len = rng.next_u32() as usize % (config.message_capacity() + 1);
    Message::new(random_bytes(rng, len))
}

fn primitives() -> Check {
    let (_, config, mut rng) = setup();
    for _ in 0..200 {
        let m = message(&mut rng, &config);
        ensure(Message::unpad(&m.pad(config.sigma).map_err(err)?, config.sigma).map_err(err)? == m, || "pad".into())?;
        let s = random_bit(&mut rng);
        let (a, b) = share_bit(s, &mut rng);
        ensure(a ^ b == s, || "bit shares".into())?;
        let x = random_bytes(&mut rng, 16);
        let y = random_bytes(&mut rng, 16);
        ensure(xor_bytes(&xor_bytes(&x, &y), &y) == x, || "xor".into())?;
        ensure(swap_pair(s, swap_pair(s, (1, 2))) == (1, 2), || "swap involution".into())?;
    }
    ensure(hash_h(b"x", config.sigma).len() == 32, || "H length".into())?;
    ensure(hash_g(b"x", config.sigma, config.lambda).len() == 36, || "G length".into())?;
    ensure(hash_h(b"x", config.sigma) != hash_g(b"x", config.sigma, config.lambda)[..32], || "H/G separation".into())?;
    let tiny = gen_group(8, b"verify").map_err(err)?;
    ensure(tiny.exp(tiny.g(), &tiny.exponent(tiny.q().clone())) == tiny.identity(), || "g has order q".into())
}

fn ahe() -> Check {
    let mut rng = seeded(b"oblivis-verify-ahe");
    let keys = kgen(256, &mut rng).map_err(err)?;
    let (pk, sk) = (&keys.pk, &keys.sk);
    let bound = pk.n().clone();
    for _ in 0..50 {
        let a = random_below(&mut rng, &bound);
        let b = random_below(&mut rng, &bound);
        let k = random_below(&mut rng, &bound);
        let ca = pk.enc(&a, &mut rng).map_err(err)?;
        let cb = pk.enc(&b, &mut rng).map_err(err)?;
        ensure(sk.dec(&ca).map_err(err)? == a, || "Dec(Enc(a)) != a".into())?;
        let sum = sk.dec(&pk.hom_add(&ca, &cb).map_err(err)?).map_err(err)?;
        ensure(sum == (&a + &b) % &bound, || "additive homomorphism".into())?;
        let scaled = sk.dec(&pk.hom_scale(&ca, &k).map_err(err)?).map_err(err)?;
        ensure(scaled == (&a * &k) % &bound, || "scalar homomorphism".into())?;
    }
    for z in [1usize, 2, 4, 8] {
        let scalars: Vec<BigUint> = (0..z).map(|_| random_below(&mut rng, &bound)).collect();
        for v in 0..z {
            let w = OneHotCipherVector::new(pk, z, v, &mut rng).map_err(err)?;
            let picked = sk.dec(&w.dot(pk, &scalars).map_err(err)?).map_err(err)?;
            ensure(picked == scalars[v], || format!("one-hot selection z={z} v={v}"))?;
        }
    }
    Ok(())
}

fn naor_pinkas() -> Check {
    let (params, config, mut rng) = setup();
    for _ in 0..20 {
        let (m0, m1) = (message(&mut rng, &config), message(&mut rng, &config));
        for s in [false, true] {
            let (q, sp) = np_gen_query(&params, s, &mut rng);
            let res = np_gen_res(&m0, &m1, &params, &config, &q, &mut rng).map_err(err)?;
            let got = np_retrieve(&res, &sp, &params, &config).map_err(err)?;
            ensure(got == if s { m1.clone() } else { m0.clone() }, || format!("wrong message for s={s}"))?;
        }
    }
    Ok(())
}

/// DQ correctness over every `(s, s1)` with the receiver exponent computed by `exponent`.
pub fn dq_suite_with(exponent: ExponentFn) -> Check {
    let (params, config, mut rng) = setup();
    for s in [false, true] {
        for s1 in [false, true] {
            for _ in 0..5 {
                let (m0, m1) = (message(&mut rng, &config), message(&mut rng, &config));
                let (r1, r2) = (params.random_exponent(&mut rng), params.random_exponent(&mut rng));
                let s2 = s ^ s1;
                let req1 = DelegationRequest { share: s1, blinder: r1.clone() };
                let req2 = DelegationRequest { share: s2, blinder: r2.clone() };
                let q1 = dq_p1_gen_query(&req1, &dq_p2_gen_query(&req2, &params), &params);
                let res = dq_gen_res(&m0, &m1, &params, &config, &q1, &mut rng).map_err(err)?;
                let x = exponent(&params, &r1, &r2, s2);
                let got = open_slot(&params, &config, Oracle::H, res.slot(s), &x)
                    .and_then(|p| Message::unpad(&p, config.sigma))
                    .ok();
                let want = if s { &m1 } else { &m0 };
                ensure(got.as_ref() == Some(want), || format!("wrong message for s={s} s1={s1}"))?;
            }
        }
    }
    Ok(())
}

fn duq() -> Check {
    let (params, config, mut rng) = setup();
    for s in [false, true] {
        for s1 in [false, true] {
            for swap in [false, true] {
                for _ in 0..3 {
                    let (m0, m1) = (message(&mut rng, &config), message(&mut rng, &config));
                    let b = duq_r_request(&params, &mut rng);
                    let t = IssuerRequest { s1, s2: s1 ^ s, tag: random_bytes(&mut rng, config.lambda.bytes()) };
                    let q1 = duq_p1_gen_query(&b.r1, t.s1, &duq_p2_gen_query(&b.r2, t.s2, &params), &params);
                    let res = duq_gen_res_with_swap(&m0, &m1, &params, &config, &q1, &t.tag, swap, &mut rng)
                        .map_err(err)?;
                    let got = duq_retrieve(&res, &b, &t.receiver_tag(), &params, &config).map_err(err)?;
                    ensure(got == if s { m1.clone() } else { m0.clone() }, || {
                        format!("wrong message for s={s} s1={s1} swap={swap}")
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn matrix(rng: &mut Csprng, config: &SessionConfig, z: usize) -> MessageMatrix {
    MessageMatrix::new((0..z).map(|_| (message(rng, config), message(rng, config))).collect()).expect("z >= 1")
}

fn mr() -> Check {
    let (params, config, mut rng) = setup();
    let keys = duqmr_r_setup(&config, &params, &mut rng).map_err(err)?;
    for z in [1usize, 3] {
        let records = matrix(&mut rng, &config, z);
        for s in [false, true] {
            let s1 = random_bit(&mut rng);
            let (r1, r2) = (params.random_exponent(&mut rng), params.random_exponent(&mut rng));
            let req1 = DelegationRequest { share: s1, blinder: r1.clone() };
            let req2 = DelegationRequest { share: s1 ^ s, blinder: r2.clone() };
            let q1 = dq_p1_gen_query(&req1, &dq_p2_gen_query(&req2, &params), &params);
            let all = dqmr_gen_res(&records, &params, &config, &q1, &mut rng).map_err(err)?;
            let state = oblivis_core::ot::dq::ReceiverState { s, s1, s2: s1 ^ s, r1, r2 };

            let b = duq_r_request(&params, &mut rng);
            let t = IssuerRequest { s1, s2: s1 ^ s, tag: random_bytes(&mut rng, config.lambda.bytes()) };
            let uq1 = duq_p1_gen_query(&b.r1, t.s1, &duq_p2_gen_query(&b.r2, t.s2, &params), &params);
            let tagged = duqmr_gen_res(&records, &params, &config, &uq1, &t.tag, &mut rng).map_err(err)?;
            for v in 0..z {
                let want = records.get(s, v).expect("in range");
                let got = dqmr_retrieve(&dqmr_obl_filter(&all, v).map_err(err)?, &state, &params, &config);
                ensure(got.as_ref() == Ok(want), || format!("DQ^MR z={z} v={v} s={s}"))?;
                let w = duqmr_t_setup(z, v, &keys.pk, &mut rng).map_err(err)?;
                let filtered = duqmr_obl_filter(&tagged, &w, &keys.pk).map_err(err)?;
                let got = duqmr_retrieve(&filtered, &b, &keys.sk, &t.receiver_tag(), &params, &config);
                ensure(got.as_ref() == Ok(want), || format!("DUQ^MR z={z} v={v} s={s}"))?;
            }
        }
    }
    Ok(())
}

fn compiled() -> Check {
    let (params, config, mut rng) = setup();
    for n in [2usize, 5] {
        let suite = Compiled::new(NaiveNpSuite::new(params.clone(), config, n).map_err(err)?, &mut rng).map_err(err)?;
        let messages: Vec<Message> = (0..n).map(|_| message(&mut rng, &config)).collect();
        for s in 0..n {
            let (q, sp) = suite.gen_query(s, &mut rng).map_err(err)?;
            let res = suite.gen_res(&messages, &q, &mut rng).map_err(err)?;
            ensure(res.e.len() == 2, || "response width".into())?;
            let got = suite.retrieve(&res, &q, &sp, s).map_err(err)?;
            ensure(got == messages[s], || format!("n={n} s={s}"))?;
        }
    }
    Ok(())
}

fn supersonic() -> Check {
    let (_, config, mut rng) = setup();
    let keys = PadKeys { k0: random_bytes(&mut rng, 32), k1: random_bytes(&mut rng, 32) };
    let (m0, m1) = (Message::from("zero"), Message::from("one"));
    for (s1, s2) in [(false, false), (false, true), (true, false), (true, true)] {
        let pair = ss_gen_res(&m0, &m1, &keys, s1, &config).map_err(err)?;
        let got = ss_retrieve(&ss_obl_filter(pair, s2), &keys, s1 ^ s2, &config).map_err(err)?;
        ensure(got == if s1 ^ s2 { m1.clone() } else { m0.clone() }, || format!("parity row s1={s1} s2={s2}"))?;
    }
    for _ in 0..1000 {
        let keys = ss_setup(&config, &mut rng);
        let (m0, m1) = (message(&mut rng, &config), message(&mut rng, &config));
        let (s1, s2) = (random_bit(&mut rng), random_bit(&mut rng));
        let pair = ss_gen_res(&m0, &m1, &keys, s1, &config).map_err(err)?;
        let got = ss_retrieve(&ss_obl_filter(pair, s2), &keys, s1 ^ s2, &config).map_err(err)?;
        ensure(got == if s1 ^ s2 { m1 } else { m0 }, || "random transfer".into())?;
    }
    Ok(())
}

fn harness() -> Check {
    let setup = SessionSetup::test_profile();
    let mut rng = seeded(b"oblivis-verify-harness");
    let records = |rng: &mut Csprng, z| matrix(rng, &setup.config, z);
    for protocol in [Protocol::Dq, Protocol::Duq] {
        let inputs = make_inputs::pair_and_bit(protocol, "a".into(), "b".into(), true);
        let out = run_session(protocol, &setup, &inputs, b"verify").map_err(err)?;
        ensure(out.outputs.get(&Role::R) == Some(&RoleOutput::Message("b".into())), || format!("{protocol} output"))?;
        ensure(assert_sender_push(&out.log), || format!("{protocol} sent R -> S"))?;
    }
    let mut downloads = Vec::new();
    for z in [1usize, 4] {
        let m = records(&mut rng, z);
        let want = m.get(false, z - 1).cloned().expect("in range");
        let out = run_session(Protocol::Dqmr, &setup, &make_inputs::dqmr(m, z - 1, false), b"verify").map_err(err)?;
        ensure(out.outputs.get(&Role::R) == Some(&RoleOutput::Message(want)), || format!("DQ^MR z={z} output"))?;
        ensure(assert_sender_push(&out.log), || "DQ^MR sent R -> S".into())?;
        downloads.push(bytes_to_role(&out.log, Role::R));
    }
    ensure(downloads[0] == downloads[1], || format!("receiver download depends on z: {downloads:?}"))
}

/// Runs one suite by name, or all of them for `all`.
pub fn verify(which: &str) -> Result<Vec<SuiteResult>, String> {
    let names: Vec<&'static str> = match which {
        "all" => SUITES.to_vec(),
        name => vec![*SUITES.iter().find(|s| **s == name).ok_or_else(|| {
            format!("unknown suite `{name}`; expected all or one of {}", SUITES.join(", "))
        })?],
    };
    Ok(names
        .into_iter()
        .map(|name| {
            let res = match name {
                "primitives" => primitives(),
                "ahe" => ahe(),
                "naor-pinkas" => naor_pinkas(),
                "dq" => dq_suite_with(delegated_exponent),
                "duq" => duq(),
                "mr" => mr(),
                "compiled" => compiled(),
                "supersonic" => supersonic(),
                "harness" => harness(),
                _ => unreachable!("names come from SUITES"),
            };
            SuiteResult { name, failure: res.err() }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for r in verify("all").unwrap() {
            assert!(r.passed(), "{}: {:?}", r.name, r.failure);
        }
    }

    #[test]
    fn swapped_sign_mutation_is_caught() {
        let failure = dq_suite_with(swapped_sign).unwrap_err();
        assert!(failure.starts_with("wrong message"), "{failure}");
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(verify("nope").is_err());
        assert_eq!(verify("ahe").unwrap().len(), 1);
    }
}
