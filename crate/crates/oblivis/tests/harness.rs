use oblivis::harness::socket::run_session_over_tcp;
use oblivis::harness::*;
use oblivis_core::ot::mr::MessageMatrix;
use oblivis_core::wire::{kind, Role};
use oblivis_core::Message;

fn matrix(z: usize) -> MessageMatrix {
    MessageMatrix::new((0..z).map(|t| (Message::new(format!("m0 of {t}")), Message::new(format!("m1 of {t}")))).collect())
        .unwrap()
}

fn cases() -> Vec<(Protocol, Inputs, Message)> {
    let p = |proto| make_inputs::pair_and_bit(proto, "left".into(), "right".into(), true);
    let list: Vec<Message> = (0..5).map(|i| Message::new(format!("item {i}"))).collect();
    vec![
        (Protocol::NaorPinkas, p(Protocol::NaorPinkas), "right".into()),
        (Protocol::Dq, p(Protocol::Dq), "right".into()),
        (Protocol::Duq, p(Protocol::Duq), "right".into()),
        (Protocol::Supersonic, p(Protocol::Supersonic), "right".into()),
        (Protocol::Dqmr, make_inputs::dqmr(matrix(4), 2, false), "m0 of 2".into()),
        (Protocol::Duqmr, make_inputs::duqmr(matrix(4), 3, true), "m1 of 3".into()),
        (Protocol::Naive, make_inputs::one_of_n(list.clone(), 3), "item 3".into()),
        (Protocol::Compiled, make_inputs::one_of_n(list, 4), "item 4".into()),
        (Protocol::StrawmanAll, make_inputs::strawman(matrix(3), 1, true), "m1 of 1".into()),
        (Protocol::StrawmanIndexed, make_inputs::strawman(matrix(3), 0, false), "m0 of 0".into()),
    ]
}

#[test]
fn every_protocol_delivers_the_chosen_message() {
    let setup = SessionSetup::test_profile();
    for (protocol, inputs, want) in cases() {
        let out = run_session(protocol, &setup, &inputs, b"every").unwrap_or_else(|e| panic!("{protocol}: {e}"));
        assert_eq!(out.outputs.get(&Role::R), Some(&RoleOutput::Message(want)), "{protocol}");
    }
}

#[test]
fn outputs_match_the_role_table() {
    let setup = SessionSetup::test_profile();
    for (protocol, inputs, _) in cases() {
        let out = run_session(protocol, &setup, &inputs, b"table").unwrap();
        let roles: Vec<Role> = out.outputs.keys().copied().collect();
        match protocol {
            Protocol::Dqmr | Protocol::Duqmr => {
                assert_eq!(roles, [Role::R, Role::P1], "{protocol}");
                assert_eq!(out.outputs[&Role::P1], RoleOutput::RecordCount(4));
            }
            _ => assert_eq!(roles, [Role::R], "{protocol}"),
        }
    }
}

#[test]
fn schedulers_and_repeats_give_identical_logs() {
    let setup = SessionSetup::test_profile();
    for (protocol, inputs, _) in cases() {
        let a = run_session_with(protocol, &setup, &inputs, b"det", Scheduler::Sequential).unwrap();
        let b = run_session_with(protocol, &setup, &inputs, b"det", Scheduler::Sequential).unwrap();
        let c = run_session_with(protocol, &setup, &inputs, b"det", Scheduler::Threaded).unwrap();
        assert_eq!(a.log.to_bytes(), b.log.to_bytes(), "{protocol}");
        assert_eq!(a.log.to_bytes(), c.log.to_bytes(), "{protocol}");
        let d = run_session(protocol, &setup, &inputs, b"other seed").unwrap();
        assert_ne!(a.log.to_bytes(), d.log.to_bytes(), "{protocol}");
    }
}

#[test]
fn socket_transport_matches_in_process() {
    let setup = SessionSetup::test_profile();
    for (protocol, inputs, want) in cases() {
        let local = run_session(protocol, &setup, &inputs, b"tcp").unwrap();
        let remote = run_session_over_tcp(protocol, &setup, &inputs, b"tcp").unwrap();
        assert_eq!(local.log.to_bytes(), remote.log.to_bytes(), "{protocol}");
        assert_eq!(remote.outputs[&Role::R], RoleOutput::Message(want));
    }
}

#[test]
fn socket_abort_reports_the_remote_role() {
    let setup = SessionSetup::test_profile();
    // Wrong suite size on the receiver side is caught before anything runs.
    let mut inputs = make_inputs::one_of_n(vec!["a".into(), "b".into()], 1);
    inputs.insert(Role::R, RoleInput::Selection { index: 1, of: 3 });
    assert!(matches!(run_session_over_tcp(Protocol::Naive, &setup, &inputs, b"x"), Err(HarnessError::Inputs(_))));
}

#[test]
fn sequence_numbers_increase_per_sender() {
    let setup = SessionSetup::test_profile();
    for (protocol, inputs, _) in cases() {
        let out = run_session(protocol, &setup, &inputs, b"seq").unwrap();
        for role in Role::ALL {
            let seqs: Vec<u64> = out.log.entries().iter().filter(|e| e.envelope.from == role).map(|e| e.envelope.seq).collect();
            assert!(seqs.windows(2).all(|w| w[0] < w[1]), "{protocol} {role}");
        }
        assert!(out.log.entries().iter().all(|e| e.size == e.envelope.payload.len()));
    }
}

#[test]
fn supersonic_log_has_five_kinds_in_phase_order() {
    let setup = SessionSetup::test_profile();
    let inputs = make_inputs::pair_and_bit(Protocol::Supersonic, "a".into(), "b".into(), false);
    let out = run_session(Protocol::Supersonic, &setup, &inputs, b"ss").unwrap();
    assert_eq!(out.log.kinds(), [kind::SS_KEYS, kind::SS_SHARE_S, kind::SS_SHARE_P, kind::SS_PAIR, kind::SS_FINAL]);
    assert_eq!(bytes_to_role(&out.log, Role::R), 4 + 32);
    assert!(!assert_sender_push(&out.log));
}

#[test]
fn proxies_only_see_their_own_channel() {
    let setup = SessionSetup::test_profile();
    let inputs = make_inputs::pair_and_bit(Protocol::Dq, "a".into(), "b".into(), true);
    let out = run_session(Protocol::Dq, &setup, &inputs, b"iso").unwrap();
    let to_p1: Vec<_> = out.log.entries().iter().filter(|e| e.envelope.to == Role::P1).map(|e| e.envelope.from).collect();
    let to_p2: Vec<_> = out.log.entries().iter().filter(|e| e.envelope.to == Role::P2).map(|e| e.envelope.from).collect();
    assert_eq!(to_p1, [Role::R, Role::P2]);
    assert_eq!(to_p2, [Role::R]);
}

#[test]
fn tampered_query_aborts_at_the_sender() {
    let setup = SessionSetup::test_profile();
    let inputs = make_inputs::pair_and_bit(Protocol::Duq, "a".into(), "b".into(), true);
    let params = setup.params.clone();
    let err = session(Protocol::Duq, &setup, &inputs, b"tamper")
        .unwrap()
        .intercept(move |env| {
            if env.kind == kind::FINAL_QUERY {
                // Swap in g for beta0: still a group element, but the product check fails.
                let mut w = oblivis_core::wire::Writer::new();
                let mut r = oblivis_core::wire::Reader::new(&env.payload);
                let _ = r.element(&params).unwrap();
                let beta1 = r.element(&params).unwrap();
                w.element(&params, params.g()).element(&params, &beta1);
                env.payload = w.finish();
            }
        })
        .run()
        .unwrap_err();
    match err {
        HarnessError::Aborted(e) => {
            assert_eq!((e.role, e.kind), (Role::S, Some(kind::FINAL_QUERY)));
            assert_eq!(e.fault, Fault::Protocol(oblivis_core::Error::ProductCheck));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn replayed_supersonic_keys_are_rejected() {
    let setup = SessionSetup::test_profile();
    let inputs = make_inputs::pair_and_bit(Protocol::Supersonic, "a".into(), "b".into(), true);
    let err = session(Protocol::Supersonic, &setup, &inputs, b"replay")
        .unwrap()
        .intercept(|env| {
            if env.kind == kind::SS_KEYS {
                env.session[0] ^= 1;
            }
        })
        .run()
        .unwrap_err();
    match err {
        HarnessError::Aborted(e) => {
            assert_eq!(e.role, Role::S);
            assert_eq!(e.fault, Fault::Protocol(oblivis_core::Error::SessionMismatch));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn jsonl_export_round_trips_a_real_log() {
    let setup = SessionSetup::test_profile();
    let inputs = make_inputs::duqmr(matrix(2), 1, false);
    let out = run_session(Protocol::Duqmr, &setup, &inputs, b"json").unwrap();
    let mut buf = Vec::new();
    out.log.write_jsonl(&mut buf).unwrap();
    assert_eq!(RoutingLog::read_jsonl(&buf[..]).unwrap(), out.log);
}

#[test]
fn strawmen_leak_what_they_should() {
    let setup = SessionSetup::test_profile();
    let small = run_session(Protocol::StrawmanAll, &setup, &make_inputs::strawman(matrix(4), 1, true), b"s").unwrap();
    let large = run_session(Protocol::StrawmanAll, &setup, &make_inputs::strawman(matrix(8), 1, true), b"s").unwrap();
    assert!(bytes_to_role(&large.log, Role::R) > bytes_to_role(&small.log, Role::R));

    let v = 2usize;
    let out = run_session(Protocol::StrawmanIndexed, &setup, &make_inputs::strawman(matrix(3), v, false), b"s").unwrap();
    let to_s: Vec<_> = out.log.find(Role::R, Role::S).collect();
    assert_eq!(to_s.len(), 1);
    assert_eq!(to_s[0].envelope.payload[..4], (v as u32).to_be_bytes());
    assert!(!assert_sender_push(&out.log));
}
