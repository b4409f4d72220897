//! Multi-party sessions over an in-process transport.
//!
//! Every role is a state machine behind [`Party`]. The scheduler works in
//! rounds: it delivers all envelopes sent in the previous round, in send
//! order, and collects what the parties emit in reply. Replies are stamped
//! with per-sender sequence numbers in delivery order, so the sequential
//! and threaded schedulers produce the same log byte for byte.

mod inputs;
mod log;
mod parties;
pub mod socket;

use std::collections::BTreeMap;

use oblivis_core::metrics::{measure, OpCounts};
use oblivis_core::primitives::rng::{derive, Csprng};
use oblivis_core::primitives::shake256;
use oblivis_core::wire::{kind, Envelope, Role, SessionId};
use oblivis_core::{Error as CoreError, GroupParams, SessionConfig};

pub use inputs::{make_inputs, validate_inputs, Inputs, Outputs, Protocol, RoleInput, RoleOutput};
pub use log::{assert_sender_push, bytes_from_role, bytes_to_role, LogEntry, LogRecord, RoutingLog};
pub use parties::build_parties;

/// Why a party stopped.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Fault {
    #[error(transparent)]
    Protocol(#[from] CoreError),
    #[error("unexpected {0} envelope")]
    Unexpected(&'static str),
    #[error("transport: {0}")]
    Transport(String),
    #[error("remote party: {0}")]
    Remote(String),
}

pub type PartyResult<T = ()> = Result<T, Fault>;

/// A protocol abort, tagged with the role that aborted and the envelope it
/// was handling (`None` while starting or finishing).
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{role} aborted while {}: {fault}", phase_name(*.kind))]
pub struct SessionError {
    pub role: Role,
    pub kind: Option<u16>,
    pub fault: Fault,
}

fn phase_name(k: Option<u16>) -> String {
    match k {
        Some(k) => format!("handling {}", kind::name(k)),
        None => "starting".into(),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("bad inputs: {0}")]
    Inputs(String),
    #[error(transparent)]
    Aborted(#[from] SessionError),
    #[error("session did not finish after {0} rounds")]
    Stalled(usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Envelopes a party wants sent, in order.
#[derive(Debug, Default)]
pub struct Outbox {
    pending: Vec<(Role, u16, Vec<u8>)>,
}

impl Outbox {
    pub fn send(&mut self, to: Role, kind: u16, payload: Vec<u8>) {
        self.pending.push((to, kind, payload));
    }

    pub fn into_inner(self) -> Vec<(Role, u16, Vec<u8>)> {
        self.pending
    }
}

pub trait Party: Send {
    fn role(&self) -> Role;

    fn start(&mut self, out: &mut Outbox) -> PartyResult {
        let _ = out;
        Ok(())
    }

    fn receive(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult;

    /// The party's output once the session is over; `None` for no output.
    fn finish(&mut self) -> PartyResult<Option<RoleOutput>>;
}

/// Public setup shared by all parties: group, hash lengths.
#[derive(Clone, Debug)]
pub struct SessionSetup {
    pub params: GroupParams,
    pub config: SessionConfig,
}

impl SessionSetup {
    pub fn new(params: GroupParams, config: SessionConfig) -> Self {
        SessionSetup { params, config }
    }

    pub fn test_profile() -> Self {
        SessionSetup::new(GroupParams::test_profile(), SessionConfig::test_profile())
    }

    pub fn production_profile() -> Self {
        SessionSetup::new(GroupParams::modp_2048(), SessionConfig::production_profile())
    }
}

/// Per-role randomness. Each phase of each role draws from its own stream,
/// so nothing depends on the order in which parties run.
#[derive(Clone, Debug)]
pub struct PartyRng {
    seed: [u8; 32],
    role: Role,
}

impl PartyRng {
    pub fn new(master: &[u8], role: Role) -> Self {
        let seed = shake256(&[b"oblivis-role", &[role as u8], master], 32).try_into().expect("32 bytes");
        PartyRng { seed, role }
    }

    pub fn phase(&self, phase: &str) -> Csprng {
        derive(&self.seed, format!("{}/{phase}", self.role).as_bytes())
    }
}

pub fn session_id(seed: &[u8]) -> SessionId {
    shake256(&[seed, b"session"], 16).try_into().expect("16 bytes")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheduler {
    #[default]
    Sequential,
    Threaded,
}

pub type Interceptor = Box<dyn FnMut(&mut Envelope) + Send>;

const MAX_ROUNDS: usize = 64;

/// A finished session.
#[derive(Debug)]
pub struct SessionOutcome {
    pub outputs: Outputs,
    pub log: RoutingLog,
    /// Operations each role performed over the whole session.
    pub ops: BTreeMap<Role, OpCounts>,
    /// Operations each role performed while starting, before it received anything.
    pub start_ops: BTreeMap<Role, OpCounts>,
}

pub struct Session {
    id: SessionId,
    parties: BTreeMap<Role, Box<dyn Party>>,
    order: Vec<Role>,
    seqs: BTreeMap<Role, u64>,
    scheduler: Scheduler,
    interceptor: Option<Interceptor>,
    log: RoutingLog,
    ops: BTreeMap<Role, OpCounts>,
    start_ops: BTreeMap<Role, OpCounts>,
}

type Delivery = (usize, Role, Envelope);
type Handled = (usize, Role, u16, PartyResult<Outbox>, OpCounts);

impl Session {
    /// Parties are started in the order given.
    pub fn new(id: SessionId, parties: Vec<Box<dyn Party>>) -> Self {
        let order = parties.iter().map(|p| p.role()).collect();
        Session {
            id,
            parties: parties.into_iter().map(|p| (p.role(), p)).collect(),
            order,
            seqs: BTreeMap::new(),
            scheduler: Scheduler::Sequential,
            interceptor: None,
            log: RoutingLog::default(),
            ops: BTreeMap::new(),
            start_ops: BTreeMap::new(),
        }
    }

    pub fn scheduler(mut self, scheduler: Scheduler) -> Self {
        self.scheduler = scheduler;
        self
    }

    /// Runs `f` on every envelope before it is logged and delivered.
    pub fn intercept(mut self, f: impl FnMut(&mut Envelope) + Send + 'static) -> Self {
        self.interceptor = Some(Box::new(f));
        self
    }

    fn stamp(&mut self, from: Role, out: Outbox) -> Vec<Envelope> {
        let mut stamped = Vec::new();
        for (to, kind, payload) in out.into_inner() {
            let seq = self.seqs.entry(from).or_insert(0);
            let mut env = Envelope { session: self.id, from, to, kind, seq: *seq, payload };
            *seq += 1;
            if let Some(f) = self.interceptor.as_mut() {
                f(&mut env);
            }
            self.log.push(&env);
            stamped.push(env);
        }
        stamped
    }

    fn add_ops(&mut self, role: Role, counts: OpCounts) {
        let total = self.ops.entry(role).or_default();
        total.group_exps += counts.group_exps;
        total.group_muls += counts.group_muls;
        total.ahe_ops += counts.ahe_ops;
    }

    pub fn run(mut self) -> Result<SessionOutcome, HarnessError> {
        let mut pending = Vec::new();
        for role in self.order.clone() {
            let party = self.parties.get_mut(&role).expect("party exists");
            let mut out = Outbox::default();
            let (res, counts) = measure(|| party.start(&mut out));
            res.map_err(|fault| SessionError { role, kind: None, fault })?;
            self.start_ops.insert(role, counts);
            self.add_ops(role, counts);
            pending.extend(self.stamp(role, out));
        }

        let mut rounds = 0;
        while !pending.is_empty() {
            rounds += 1;
            if rounds > MAX_ROUNDS {
                return Err(HarnessError::Stalled(MAX_ROUNDS));
            }
            let deliveries: Vec<Delivery> =
                pending.drain(..).enumerate().map(|(i, env)| (i, env.to, env)).collect();
            let handled = match self.scheduler {
                Scheduler::Sequential => self.deliver_sequential(deliveries)?,
                Scheduler::Threaded => self.deliver_threaded(deliveries)?,
            };
            for (_, role, k, res, counts) in handled {
                self.add_ops(role, counts);
                let out = res.map_err(|fault| SessionError { role, kind: Some(k), fault })?;
                pending.extend(self.stamp(role, out));
            }
        }

        let mut outputs = Outputs::new();
        for (role, party) in self.parties.iter_mut() {
            let out = party.finish().map_err(|fault| SessionError { role: *role, kind: None, fault })?;
            if let Some(out) = out {
                outputs.insert(*role, out);
            }
        }
        Ok(SessionOutcome { outputs, log: self.log, ops: self.ops, start_ops: self.start_ops })
    }

    fn missing(env: &Envelope) -> SessionError {
        SessionError { role: env.to, kind: Some(env.kind), fault: Fault::Transport("no such party".into()) }
    }

    fn deliver_sequential(&mut self, deliveries: Vec<Delivery>) -> Result<Vec<Handled>, SessionError> {
        let mut handled = Vec::with_capacity(deliveries.len());
        for (i, role, env) in deliveries {
            let party = self.parties.get_mut(&role).ok_or_else(|| Self::missing(&env))?;
            let mut out = Outbox::default();
            let (res, counts) = measure(|| party.receive(&env, &mut out));
            let failed = res.is_err();
            handled.push((i, role, env.kind, res.map(|_| out), counts));
            if failed {
                break;
            }
        }
        Ok(handled)
    }

    /// One thread per destination; each party still sees its own envelopes
    /// in order. Results are merged back in delivery order.
    fn deliver_threaded(&mut self, deliveries: Vec<Delivery>) -> Result<Vec<Handled>, SessionError> {
        let mut by_role: BTreeMap<Role, Vec<(usize, Envelope)>> = BTreeMap::new();
        for (i, role, env) in deliveries {
            if !self.parties.contains_key(&role) {
                return Err(Self::missing(&env));
            }
            by_role.entry(role).or_default().push((i, env));
        }
        let mut handled: Vec<Handled> = std::thread::scope(|scope| {
            let workers: Vec<_> = self
                .parties
                .iter_mut()
                .filter_map(|(role, party)| by_role.remove(role).map(|batch| (*role, party, batch)))
                .map(|(role, party, batch)| {
                    scope.spawn(move || {
                        let mut done = Vec::with_capacity(batch.len());
                        for (i, env) in batch {
                            let mut out = Outbox::default();
                            let (res, counts) = measure(|| party.receive(&env, &mut out));
                            let failed = res.is_err();
                            done.push((i, role, env.kind, res.map(|_| out), counts));
                            if failed {
                                break;
                            }
                        }
                        done
                    })
                })
                .collect();
            workers.into_iter().flat_map(|w| w.join().expect("party thread panicked")).collect()
        });
        handled.sort_by_key(|h| h.0);
        // Keep what the sequential scheduler would have seen: stop at the first failure.
        if let Some(first) = handled.iter().position(|h| h.3.is_err()) {
            handled.truncate(first + 1);
        }
        Ok(handled)
    }
}

/// Runs one session of `protocol` under `seed`.
pub fn run_session(
    protocol: Protocol,
    setup: &SessionSetup,
    inputs: &Inputs,
    seed: &[u8],
) -> Result<SessionOutcome, HarnessError> {
    run_session_with(protocol, setup, inputs, seed, Scheduler::Sequential)
}

pub fn run_session_with(
    protocol: Protocol,
    setup: &SessionSetup,
    inputs: &Inputs,
    seed: &[u8],
    scheduler: Scheduler,
) -> Result<SessionOutcome, HarnessError> {
    session(protocol, setup, inputs, seed)?.scheduler(scheduler).run()
}

/// Builds a session without running it, for callers that want to add an
/// interceptor or pick a scheduler.
pub fn session(protocol: Protocol, setup: &SessionSetup, inputs: &Inputs, seed: &[u8]) -> Result<Session, HarnessError> {
    validate_inputs(protocol, inputs)?;
    let id = session_id(seed);
    Ok(Session::new(id, build_parties(protocol, setup, inputs, seed, id)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use oblivis_core::Message;

    #[test]
    fn party_streams_are_separated() {
        let a = PartyRng::new(b"seed", Role::P1);
        let b = PartyRng::new(b"seed", Role::P2);
        let mut x = [0u8; 8];
        let mut y = [0u8; 8];
        use rand_core::RngCore;
        a.phase("request").fill_bytes(&mut x);
        b.phase("request").fill_bytes(&mut y);
        assert_ne!(x, y);
        a.phase("query").fill_bytes(&mut y);
        assert_ne!(x, y);
        a.phase("request").fill_bytes(&mut y);
        assert_eq!(x, y);
    }

    #[test]
    fn abort_names_the_role() {
        let setup = SessionSetup::test_profile();
        let inputs = make_inputs::pair_and_bit(Protocol::Dq, "a".into(), "b".into(), true);
        let err = session(Protocol::Dq, &setup, &inputs, b"abort")
            .unwrap()
            .intercept(|env| {
                if env.kind == kind::FINAL_QUERY {
                    let last = env.payload.len() - 1;
                    env.payload[last] ^= 1;
                }
            })
            .run()
            .unwrap_err();
        match err {
            HarnessError::Aborted(e) => {
                assert_eq!(e.role, Role::S);
                assert_eq!(e.kind, Some(kind::FINAL_QUERY));
                assert!(e.to_string().starts_with("S aborted while handling FINAL_QUERY"), "{e}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_inputs_are_rejected_before_running() {
        let setup = SessionSetup::test_profile();
        let inputs = make_inputs::pair_and_bit(Protocol::Dq, Message::from("a"), "b".into(), true);
        assert!(matches!(run_session(Protocol::Duq, &setup, &inputs, b"x"), Err(HarnessError::Inputs(_))));
    }
}
