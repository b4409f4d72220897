//! Role state machines for every protocol, and the payload layouts they use.

use oblivis_core::ahe::{kgen, KeyPair, PublicKey};
use oblivis_core::ot::base::{np_gen_query, np_gen_res, np_retrieve, Compilable, NaiveNpSuite, NpQuery, NpSecret, OtSuite};
use oblivis_core::ot::compiler::{compiled_decrypt, compiled_gen_query, compiled_gen_res, CompiledQuery, CompiledResponse};
use oblivis_core::ot::dq::{dq_gen_res, dq_retrieve, dq_request, ReceiverState};
use oblivis_core::ot::duq::{duq_gen_res, duq_r_request, duq_retrieve, duq_t_request, ReceiverBlinders, ReceiverTag};
use oblivis_core::ot::mr::{
    dqmr_gen_res, dqmr_obl_filter, duqmr_gen_res, duqmr_obl_filter, duqmr_r_setup, duqmr_retrieve, duqmr_t_setup,
    FilteredResponse, MessageMatrix,
};
use oblivis_core::ot::{final_query, partial_query, FinalQuery, PartialQuery, ResponsePair};
use oblivis_core::primitives::Message;
use oblivis_core::supersonic::{ss_gen_query, ss_obl_filter, ss_retrieve, ss_setup, PadKeys, SenderSession};
use oblivis_core::wire::{kind, Envelope, Reader, Role, SessionId, Writer};
use oblivis_core::{Error, Exponent, GroupParams, SessionConfig};

use super::{Fault, Inputs, Outbox, Party, PartyResult, PartyRng, Protocol, RoleInput, RoleOutput, SessionSetup};

/// What every party knows: the public setup, its own randomness, the session.
#[derive(Clone)]
struct Ctx {
    role: Role,
    params: GroupParams,
    config: SessionConfig,
    rng: PartyRng,
    session: SessionId,
}

impl Ctx {
    /// Rejects envelopes from another session.
    fn check(&self, env: &Envelope) -> PartyResult {
        if env.session != self.session || env.to != self.role {
            return Err(Error::SessionMismatch.into());
        }
        Ok(())
    }
}

fn unexpected(env: &Envelope) -> Fault {
    Fault::Unexpected(kind::name(env.kind))
}

fn read<T>(payload: &[u8], f: impl FnOnce(&mut Reader) -> oblivis_core::Result<T>) -> PartyResult<T> {
    let mut r = Reader::new(payload);
    let v = f(&mut r)?;
    r.finish()?;
    Ok(v)
}

fn write(f: impl FnOnce(&mut Writer)) -> Vec<u8> {
    let mut w = Writer::new();
    f(&mut w);
    w.finish()
}

fn pairs_payload(params: &GroupParams, pairs: &[ResponsePair]) -> Vec<u8> {
    write(|w| {
        w.u32(pairs.len() as u32);
        for p in pairs {
            w.response_pair(params, p);
        }
    })
}

fn read_pairs(params: &GroupParams, payload: &[u8]) -> PartyResult<Vec<ResponsePair>> {
    read(payload, |r| {
        let z = r.u32()? as usize;
        (0..z).map(|_| r.response_pair(params)).collect()
    })
}

fn public_key_payload(pk: &PublicKey) -> Vec<u8> {
    write(|w| {
        w.uint(pk.n());
    })
}

fn read_public_key(r: &mut Reader) -> oblivis_core::Result<PublicKey> {
    let n = r.uint()?;
    if n.bits() < 64 {
        return Err(Error::Decode("public key too small"));
    }
    Ok(PublicKey::new(n))
}

fn message_output(out: &Option<Message>) -> PartyResult<Option<RoleOutput>> {
    out.clone().map(RoleOutput::Message).map(Some).ok_or(Fault::Transport("no response arrived".into()))
}

// Naor-Pinkas, and the two strawman fixtures built on it.

struct NpReceiver {
    ctx: Ctx,
    s: bool,
    /// Record wanted in the strawman fixtures.
    record: Option<usize>,
    indexed: bool,
    secret: Option<NpSecret>,
    result: Option<Message>,
}

impl Party for NpReceiver {
    fn role(&self) -> Role {
        Role::R
    }

    fn start(&mut self, out: &mut Outbox) -> PartyResult {
        let (q, secret) = np_gen_query(&self.ctx.params, self.s, &mut self.ctx.rng.phase("query"));
        self.secret = Some(secret);
        let params = &self.ctx.params;
        match (self.indexed, self.record) {
            // Leaks v to the sender in the clear.
            (true, Some(v)) => {
                out.send(Role::S, kind::STRAWMAN_INDEXED_QUERY, write(|w| {
                    w.u32(v as u32).element(params, &q.beta0);
                }))
            }
            _ => out.send(Role::S, kind::NP_QUERY, write(|w| {
                w.element(params, &q.beta0);
            })),
        }
        Ok(())
    }

    fn receive(&mut self, env: &Envelope, _out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        let (params, config) = (&self.ctx.params, &self.ctx.config);
        let secret = self.secret.as_ref().ok_or(Fault::Unexpected("early response"))?;
        let pair = match (env.from, env.kind) {
            (Role::S, kind::NP_RESPONSE) => read(&env.payload, |r| r.response_pair(params))?,
            (Role::S, kind::STRAWMAN_MATRIX_RESPONSE) => {
                let v = self.record.ok_or(unexpected(env))?;
                let mut all = read_pairs(params, &env.payload)?;
                if v >= all.len() {
                    return Err(Error::IndexOutOfRange { index: v, len: all.len() }.into());
                }
                all.swap_remove(v)
            }
            _ => return Err(unexpected(env)),
        };
        self.result = Some(np_retrieve(&pair, secret, params, config)?);
        Ok(())
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        message_output(&self.result)
    }
}

enum NpSenderInput {
    Pair(Message, Message),
    Matrix(MessageMatrix),
}

struct NpSender {
    ctx: Ctx,
    input: NpSenderInput,
}

impl Party for NpSender {
    fn role(&self) -> Role {
        Role::S
    }

    fn receive(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        let (params, config) = (&self.ctx.params, &self.ctx.config);
        let mut rng = self.ctx.rng.phase("response");
        match (env.from, env.kind, &self.input) {
            (Role::R, kind::NP_QUERY, NpSenderInput::Pair(m0, m1)) => {
                let q = NpQuery { beta0: read(&env.payload, |r| r.element(params))? };
                let res = np_gen_res(m0, m1, params, config, &q, &mut rng)?;
                out.send(Role::R, kind::NP_RESPONSE, write(|w| {
                    w.response_pair(params, &res);
                }));
            }
            (Role::R, kind::NP_QUERY, NpSenderInput::Matrix(matrix)) => {
                let q = NpQuery { beta0: read(&env.payload, |r| r.element(params))? };
                let all = matrix
                    .pairs()
                    .iter()
                    .map(|(m0, m1)| np_gen_res(m0, m1, params, config, &q, &mut rng))
                    .collect::<oblivis_core::Result<Vec<_>>>()?;
                out.send(Role::R, kind::STRAWMAN_MATRIX_RESPONSE, pairs_payload(params, &all));
            }
            (Role::R, kind::STRAWMAN_INDEXED_QUERY, NpSenderInput::Matrix(matrix)) => {
                let (v, beta0) = read(&env.payload, |r| Ok((r.u32()? as usize, r.element(params)?)))?;
                let (m0, m1) =
                    matrix.pairs().get(v).ok_or(Error::IndexOutOfRange { index: v, len: matrix.z() })?;
                let res = np_gen_res(m0, m1, params, config, &NpQuery { beta0 }, &mut rng)?;
                out.send(Role::R, kind::NP_RESPONSE, write(|w| {
                    w.response_pair(params, &res);
                }));
            }
            _ => return Err(unexpected(env)),
        }
        Ok(())
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        Ok(None)
    }
}

// Delegated variants. The proxies collect a share of the choice bit and a
// blinder, from R in DQ or from T and R separately in DUQ.

#[derive(Default)]
struct ProxyInputs {
    share: Option<bool>,
    blinder: Option<Exponent>,
    partial: Option<PartialQuery>,
}

impl ProxyInputs {
    fn take(&mut self, ctx: &Ctx, env: &Envelope) -> PartyResult<bool> {
        let params = &ctx.params;
        match (env.from, env.kind) {
            (Role::R, kind::REQUEST) => {
                let (share, blinder) = read(&env.payload, |r| Ok((r.bool()?, r.exponent(params)?)))?;
                self.share = Some(share);
                self.blinder = Some(blinder);
            }
            (Role::R, kind::BLIND) => self.blinder = Some(read(&env.payload, |r| r.exponent(params))?),
            (Role::T, kind::ISSUER_SHARE) => self.share = Some(read(&env.payload, |r| r.bool())?),
            (Role::P2, kind::PARTIAL_QUERY) if ctx.role == Role::P1 => {
                self.partial = Some(read(&env.payload, |r| r.partial_query(params))?)
            }
            _ => return Ok(false),
        }
        Ok(true)
    }
}

struct Proxy2 {
    ctx: Ctx,
    inputs: ProxyInputs,
    sent: bool,
}

impl Party for Proxy2 {
    fn role(&self) -> Role {
        Role::P2
    }

    fn receive(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        if !self.inputs.take(&self.ctx, env)? || self.sent {
            return Err(unexpected(env));
        }
        if let (Some(s2), Some(r2)) = (self.inputs.share, &self.inputs.blinder) {
            let params = &self.ctx.params;
            let q2 = partial_query(params, s2, r2);
            out.send(Role::P1, kind::PARTIAL_QUERY, write(|w| {
                w.partial_query(params, &q2);
            }));
            self.sent = true;
        }
        Ok(())
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        Ok(None)
    }
}

enum Filter {
    /// Single-record variants: P1 only forwards the query.
    None,
    /// Plaintext filtering by record index.
    Index(usize),
    /// Homomorphic filtering with the issuer's one-hot vector.
    OneHot(Option<(PublicKey, oblivis_core::ahe::OneHotCipherVector)>),
}

struct Proxy1 {
    ctx: Ctx,
    inputs: ProxyInputs,
    filter: Filter,
    sent_query: bool,
    records: Option<usize>,
}

impl Proxy1 {
    fn filter(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        let params = &self.ctx.params;
        let res = read_pairs(params, &env.payload)?;
        self.records = Some(res.len());
        match &self.filter {
            Filter::Index(v) => {
                let kept = dqmr_obl_filter(&res, *v)?;
                out.send(Role::R, kind::RESPONSE, write(|w| {
                    w.response_pair(params, &kept);
                }));
            }
            Filter::OneHot(Some((pk, w))) => {
                let filtered = duqmr_obl_filter(&res, w, pk)?;
                out.send(Role::R, kind::FILTERED_RESPONSE, write(|wr| {
                    for slot in &filtered.o {
                        for c in slot {
                            wr.ciphertext(pk, c);
                        }
                    }
                }));
            }
            Filter::OneHot(None) => return Err(Fault::Unexpected("MATRIX_RESPONSE before ONE_HOT_VECTOR")),
            Filter::None => return Err(unexpected(env)),
        }
        Ok(())
    }
}

impl Party for Proxy1 {
    fn role(&self) -> Role {
        Role::P1
    }

    fn receive(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        match (env.from, env.kind) {
            (Role::S, kind::MATRIX_RESPONSE) => return self.filter(env, out),
            (Role::T, kind::ONE_HOT_VECTOR) if matches!(self.filter, Filter::OneHot(None)) => {
                let (pk, w) = read(&env.payload, |r| {
                    let pk = read_public_key(r)?;
                    let w = r.one_hot(&pk)?;
                    Ok((pk, w))
                })?;
                self.filter = Filter::OneHot(Some((pk, w)));
                return Ok(());
            }
            _ => {}
        }
        if !self.inputs.take(&self.ctx, env)? || self.sent_query {
            return Err(unexpected(env));
        }
        if let (Some(s1), Some(r1), Some(q2)) = (self.inputs.share, &self.inputs.blinder, &self.inputs.partial) {
            let params = &self.ctx.params;
            let q1 = final_query(params, s1, r1, q2);
            out.send(Role::S, kind::FINAL_QUERY, write(|w| {
                w.final_query(params, &q1);
            }));
            self.sent_query = true;
        }
        Ok(())
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        match self.filter {
            Filter::None => Ok(None),
            _ => Ok(Some(RoleOutput::RecordCount(self.records.ok_or(Fault::Transport("no response".into()))?))),
        }
    }
}

enum SenderInput {
    Pair(Message, Message),
    Matrix(MessageMatrix),
}

struct DelegatedSender {
    ctx: Ctx,
    input: SenderInput,
    /// Unknown-query variants wait for the issuer's tag.
    tagged: bool,
    tag: Option<Vec<u8>>,
    query: Option<FinalQuery>,
    done: bool,
}

impl DelegatedSender {
    fn respond(&mut self, out: &mut Outbox) -> PartyResult {
        let (Some(q1), false) = (&self.query, self.done) else { return Ok(()) };
        if self.tagged && self.tag.is_none() {
            return Ok(());
        }
        let (params, config) = (&self.ctx.params, &self.ctx.config);
        let mut rng = self.ctx.rng.phase("response");
        match (&self.input, &self.tag) {
            (SenderInput::Pair(m0, m1), None) => {
                let res = dq_gen_res(m0, m1, params, config, q1, &mut rng)?;
                out.send(Role::R, kind::RESPONSE, write(|w| {
                    w.response_pair(params, &res);
                }));
            }
            (SenderInput::Pair(m0, m1), Some(tag)) => {
                let res = duq_gen_res(m0, m1, params, config, q1, tag, &mut rng)?;
                out.send(Role::R, kind::TAGGED_RESPONSE, write(|w| {
                    w.response_pair(params, &res);
                }));
            }
            (SenderInput::Matrix(matrix), None) => {
                let res = dqmr_gen_res(matrix, params, config, q1, &mut rng)?;
                out.send(Role::P1, kind::MATRIX_RESPONSE, pairs_payload(params, &res));
            }
            (SenderInput::Matrix(matrix), Some(tag)) => {
                let res = duqmr_gen_res(matrix, params, config, q1, tag, &mut rng)?;
                out.send(Role::P1, kind::MATRIX_RESPONSE, pairs_payload(params, &res));
            }
        }
        self.done = true;
        Ok(())
    }
}

impl Party for DelegatedSender {
    fn role(&self) -> Role {
        Role::S
    }

    fn receive(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        match (env.from, env.kind) {
            (Role::P1, kind::FINAL_QUERY) if self.query.is_none() => {
                let q1 = read(&env.payload, |r| r.final_query(&self.ctx.params))?;
                // Check on arrival so a bad query aborts here even before the tag shows up.
                q1.check(&self.ctx.params)?;
                self.query = Some(q1);
            }
            (Role::T, kind::ISSUER_TAG_S) if self.tagged && self.tag.is_none() => {
                self.tag = Some(read(&env.payload, |r| Ok(r.bytes()?.to_vec()))?);
            }
            _ => return Err(unexpected(env)),
        }
        self.respond(out)
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        Ok(None)
    }
}

enum ReceiverMode {
    Known { s: bool, state: Option<ReceiverState> },
    Unknown { blinders: Option<ReceiverBlinders>, tag: Option<ReceiverTag>, keys: Option<Box<KeyPair>>, multi: bool },
}

struct DelegatedReceiver {
    ctx: Ctx,
    mode: ReceiverMode,
    pending: Option<Envelope>,
    result: Option<Message>,
}

impl DelegatedReceiver {
    fn try_retrieve(&mut self) -> PartyResult {
        let Some(env) = &self.pending else { return Ok(()) };
        let (params, config) = (&self.ctx.params, &self.ctx.config);
        let m = match &self.mode {
            ReceiverMode::Known { state: Some(state), .. } => {
                let res = read(&env.payload, |r| r.response_pair(params))?;
                dq_retrieve(&res, state, params, config)?
            }
            ReceiverMode::Unknown { blinders: Some(b), tag: Some(tag), multi: false, .. } => {
                let res = read(&env.payload, |r| r.response_pair(params))?;
                duq_retrieve(&res, b, tag, params, config)?
            }
            ReceiverMode::Unknown { blinders: Some(b), tag: Some(tag), keys: Some(keys), multi: true } => {
                let filtered = read(&env.payload, |r| {
                    let mut c = || r.ciphertext(&keys.pk);
                    Ok(FilteredResponse { o: [[c()?, c()?], [c()?, c()?]] })
                })?;
                duqmr_retrieve(&filtered, b, &keys.sk, tag, params, config)?
            }
            // The issuer's tag has not arrived yet.
            _ => return Ok(()),
        };
        self.result = Some(m);
        self.pending = None;
        Ok(())
    }
}

impl Party for DelegatedReceiver {
    fn role(&self) -> Role {
        Role::R
    }

    fn start(&mut self, out: &mut Outbox) -> PartyResult {
        let params = self.ctx.params.clone();
        match &mut self.mode {
            ReceiverMode::Known { s, state } => {
                let (req1, req2, st) = dq_request(&params, *s, &mut self.ctx.rng.phase("request"));
                for (to, req) in [(Role::P1, req1), (Role::P2, req2)] {
                    out.send(to, kind::REQUEST, write(|w| {
                        w.bool(req.share).exponent(&params, &req.blinder);
                    }));
                }
                *state = Some(st);
            }
            ReceiverMode::Unknown { blinders, keys, multi, .. } => {
                if *multi {
                    let kp = duqmr_r_setup(&self.ctx.config, &params, &mut self.ctx.rng.phase("setup"))?;
                    out.send(Role::T, kind::AHE_PUBLIC_KEY, public_key_payload(&kp.pk));
                    *keys = Some(Box::new(kp));
                }
                let b = duq_r_request(&params, &mut self.ctx.rng.phase("request"));
                out.send(Role::P1, kind::BLIND, write(|w| {
                    w.exponent(&params, &b.r1);
                }));
                out.send(Role::P2, kind::BLIND, write(|w| {
                    w.exponent(&params, &b.r2);
                }));
                *blinders = Some(b);
            }
        }
        Ok(())
    }

    fn receive(&mut self, env: &Envelope, _out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        let expected = match &self.mode {
            ReceiverMode::Known { .. } => [(Role::S, kind::RESPONSE), (Role::P1, kind::RESPONSE)],
            ReceiverMode::Unknown { multi: false, .. } => [(Role::S, kind::TAGGED_RESPONSE); 2],
            ReceiverMode::Unknown { multi: true, .. } => [(Role::P1, kind::FILTERED_RESPONSE); 2],
        };
        match &mut self.mode {
            ReceiverMode::Unknown { tag: tag @ None, .. } if (env.from, env.kind) == (Role::T, kind::ISSUER_TAG_R) => {
                *tag = Some(read(&env.payload, |r| Ok(ReceiverTag { s2: r.bool()?, tag: r.bytes()?.to_vec() }))?);
            }
            _ if expected.contains(&(env.from, env.kind)) && self.pending.is_none() && self.result.is_none() => {
                self.pending = Some(env.clone());
            }
            _ => return Err(unexpected(env)),
        }
        self.try_retrieve()
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        message_output(&self.result)
    }
}

struct Issuer {
    ctx: Ctx,
    s: bool,
    /// `(v, z)` in the multi-record variant.
    record: Option<(usize, usize)>,
    sent_vector: bool,
}

impl Party for Issuer {
    fn role(&self) -> Role {
        Role::T
    }

    fn start(&mut self, out: &mut Outbox) -> PartyResult {
        let req = duq_t_request(&self.ctx.config, self.s, &mut self.ctx.rng.phase("request"));
        out.send(Role::P1, kind::ISSUER_SHARE, write(|w| {
            w.bool(req.s1);
        }));
        out.send(Role::P2, kind::ISSUER_SHARE, write(|w| {
            w.bool(req.s2);
        }));
        out.send(Role::S, kind::ISSUER_TAG_S, write(|w| {
            w.bytes(&req.tag);
        }));
        let sp_r = req.receiver_tag();
        out.send(Role::R, kind::ISSUER_TAG_R, write(|w| {
            w.bool(sp_r.s2).bytes(&sp_r.tag);
        }));
        Ok(())
    }

    fn receive(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        match (env.from, env.kind, self.record) {
            (Role::R, kind::AHE_PUBLIC_KEY, Some((v, z))) if !self.sent_vector => {
                let pk = read(&env.payload, read_public_key)?;
                let w = duqmr_t_setup(z, v, &pk, &mut self.ctx.rng.phase("setup"))?;
                out.send(Role::P1, kind::ONE_HOT_VECTOR, write(|wr| {
                    wr.uint(pk.n()).one_hot(&pk, &w);
                }));
                self.sent_vector = true;
                Ok(())
            }
            _ => Err(unexpected(env)),
        }
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        Ok(None)
    }
}

// 1-out-of-n: the plain suite and its compiled form.

struct OneOfNReceiver {
    ctx: Ctx,
    suite: NaiveNpSuite,
    index: usize,
    compiled: bool,
    keys: Option<KeyPair>,
    query: Option<(NpQuery, Exponent)>,
    result: Option<Message>,
}

impl Party for OneOfNReceiver {
    fn role(&self) -> Role {
        Role::R
    }

    fn start(&mut self, out: &mut Outbox) -> PartyResult {
        let params = &self.ctx.params;
        let mut rng = self.ctx.rng.phase("query");
        if self.compiled {
            let bits = self.ctx.config.ahe_plaintext_bits(self.suite.component_bits());
            let keys = kgen(bits, &mut self.ctx.rng.phase("setup"))?;
            out.send(Role::S, kind::AHE_PUBLIC_KEY, public_key_payload(&keys.pk));
            let (q, sp) = compiled_gen_query(&self.suite, &keys.sk, self.index, &mut rng)?;
            // The inner query followed by exactly n ciphertexts; S knows n.
            out.send(Role::S, kind::COMPILED_QUERY, write(|w| {
                w.element(params, &q.inner.beta0);
                for c in q.selector.slots() {
                    w.ciphertext(&keys.pk, c);
                }
            }));
            self.query = Some((q.inner, sp));
            self.keys = Some(keys);
        } else {
            let (q, sp) = self.suite.gen_query(self.index, &mut rng)?;
            out.send(Role::S, kind::NAIVE_QUERY, write(|w| {
                w.element(params, &q.beta0);
            }));
            self.query = Some((q, sp));
        }
        Ok(())
    }

    fn receive(&mut self, env: &Envelope, _out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        let params = &self.ctx.params;
        let (q, sp) = self.query.as_ref().ok_or(Fault::Unexpected("early response"))?;
        let m = match (env.from, env.kind, &self.keys) {
            (Role::S, kind::NAIVE_RESPONSE, None) => {
                let res = read(&env.payload, |r| {
                    let n = r.u32()? as usize;
                    (0..n).map(|_| r.response_element(params)).collect::<oblivis_core::Result<Vec<_>>>()
                })?;
                self.suite.retrieve(&res, q, sp, self.index)?
            }
            (Role::S, kind::COMPILED_RESPONSE, Some(keys)) => {
                let e = read(&env.payload, |r| (0..self.suite.width()).map(|_| r.ciphertext(&keys.pk)).collect())?;
                let element = compiled_decrypt(&self.suite, &CompiledResponse { e }, &keys.sk)?;
                self.suite.retrieve_element(&element, q, sp, self.index)?
            }
            _ => return Err(unexpected(env)),
        };
        self.result = Some(m);
        Ok(())
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        message_output(&self.result)
    }
}

struct OneOfNSender {
    ctx: Ctx,
    suite: NaiveNpSuite,
    messages: Vec<Message>,
    pk: Option<PublicKey>,
}

impl Party for OneOfNSender {
    fn role(&self) -> Role {
        Role::S
    }

    fn receive(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        let params = &self.ctx.params;
        let mut rng = self.ctx.rng.phase("response");
        match (env.from, env.kind, &self.pk) {
            (Role::R, kind::NAIVE_QUERY, None) => {
                let q = NpQuery { beta0: read(&env.payload, |r| r.element(params))? };
                let res = self.suite.gen_res(&self.messages, &q, &mut rng)?;
                out.send(Role::R, kind::NAIVE_RESPONSE, write(|w| {
                    w.u32(res.len() as u32);
                    for e in &res {
                        w.response_element(params, e);
                    }
                }));
            }
            (Role::R, kind::AHE_PUBLIC_KEY, None) => {
                self.pk = Some(read(&env.payload, read_public_key)?);
            }
            (Role::R, kind::COMPILED_QUERY, Some(pk)) => {
                let n = self.suite.n();
                let (beta0, slots) = read(&env.payload, |r| {
                    let beta0 = r.element(params)?;
                    let slots = (0..n).map(|_| r.ciphertext(pk)).collect::<oblivis_core::Result<Vec<_>>>()?;
                    Ok((beta0, slots))
                })?;
                let selector = oblivis_core::ahe::OneHotCipherVector::from_slots(pk, slots)?;
                let q = CompiledQuery { inner: NpQuery { beta0 }, selector };
                let res = compiled_gen_res(&self.suite, &self.messages, pk, &q, &mut rng)?;
                out.send(Role::R, kind::COMPILED_RESPONSE, write(|w| {
                    for c in &res.e {
                        w.ciphertext(pk, c);
                    }
                }));
            }
            _ => return Err(unexpected(env)),
        }
        Ok(())
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        Ok(None)
    }
}

// Supersonic.

struct SsReceiver {
    ctx: Ctx,
    s: bool,
    keys: Option<PadKeys>,
    result: Option<Message>,
}

impl Party for SsReceiver {
    fn role(&self) -> Role {
        Role::R
    }

    fn start(&mut self, out: &mut Outbox) -> PartyResult {
        let keys = ss_setup(&self.ctx.config, &mut self.ctx.rng.phase("setup"));
        out.send(Role::S, kind::SS_KEYS, write(|w| {
            w.bytes(&keys.k0).bytes(&keys.k1);
        }));
        let (s1, s2) = ss_gen_query(self.s, &mut self.ctx.rng.phase("query"));
        out.send(Role::S, kind::SS_SHARE_S, write(|w| {
            w.bool(s1);
        }));
        out.send(Role::P, kind::SS_SHARE_P, write(|w| {
            w.bool(s2);
        }));
        self.keys = Some(keys);
        Ok(())
    }

    fn receive(&mut self, env: &Envelope, _out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        match (env.from, env.kind, &self.keys) {
            (Role::P, kind::SS_FINAL, Some(keys)) if self.result.is_none() => {
                let e = read(&env.payload, |r| Ok(r.bytes()?.to_vec()))?;
                self.result = Some(ss_retrieve(&e, keys, self.s, &self.ctx.config)?);
                Ok(())
            }
            _ => Err(unexpected(env)),
        }
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        message_output(&self.result)
    }
}

struct SsSender {
    ctx: Ctx,
    m0: Message,
    m1: Message,
    session: SenderSession,
    share: Option<bool>,
    keyed: bool,
}

impl Party for SsSender {
    fn role(&self) -> Role {
        Role::S
    }

    fn receive(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        match (env.from, env.kind) {
            (Role::R, kind::SS_KEYS) => {
                let (k0, k1) = read(&env.payload, |r| Ok((r.bytes()?.to_vec(), r.bytes()?.to_vec())))?;
                // The session guard checks the session id and rejects reuse.
                self.session.install_keys(env.session, PadKeys { k0, k1 })?;
                self.keyed = true;
            }
            (Role::R, kind::SS_SHARE_S) if self.share.is_none() => {
                self.ctx.check(env)?;
                self.share = Some(read(&env.payload, |r| r.bool())?);
            }
            _ => return Err(unexpected(env)),
        }
        if let (Some(s1), true) = (self.share, self.keyed) {
            let pair = self.session.respond(env.session, &self.m0, &self.m1, s1, &self.ctx.config)?;
            out.send(Role::P, kind::SS_PAIR, write(|w| {
                w.bytes(&pair.0).bytes(&pair.1);
            }));
            self.keyed = false;
        }
        Ok(())
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        Ok(None)
    }
}

struct SsProxy {
    ctx: Ctx,
    share: Option<bool>,
    pair: Option<(Vec<u8>, Vec<u8>)>,
    sent: bool,
}

impl Party for SsProxy {
    fn role(&self) -> Role {
        Role::P
    }

    fn receive(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        self.ctx.check(env)?;
        match (env.from, env.kind) {
            (Role::R, kind::SS_SHARE_P) if self.share.is_none() => self.share = Some(read(&env.payload, |r| r.bool())?),
            (Role::S, kind::SS_PAIR) if self.pair.is_none() => {
                self.pair = Some(read(&env.payload, |r| Ok((r.bytes()?.to_vec(), r.bytes()?.to_vec())))?)
            }
            _ => return Err(unexpected(env)),
        }
        if let (Some(s2), Some(pair), false) = (self.share, &self.pair, self.sent) {
            let first = ss_obl_filter(pair.clone(), s2);
            out.send(Role::R, kind::SS_FINAL, write(|w| {
                w.bytes(&first);
            }));
            self.sent = true;
        }
        Ok(())
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        Ok(None)
    }
}

/// Instantiates the parties of `protocol`, in start order. Inputs must
/// already have been validated.
pub fn build_parties(
    protocol: Protocol,
    setup: &SessionSetup,
    inputs: &Inputs,
    seed: &[u8],
    session: SessionId,
) -> Vec<Box<dyn Party>> {
    let ctx = |role| Ctx {
        role,
        params: setup.params.clone(),
        config: setup.config,
        rng: PartyRng::new(seed, role),
        session,
    };
    let input = |role| inputs.get(&role).cloned();
    let bit = |role| match input(role) {
        Some(RoleInput::Bit(s)) => s,
        other => panic!("{role} input not validated: {other:?}"),
    };
    let sender_input = || match input(Role::S) {
        Some(RoleInput::Pair(m0, m1)) => SenderInput::Pair(m0, m1),
        Some(RoleInput::Matrix(m)) => SenderInput::Matrix(m),
        other => panic!("sender input not validated: {other:?}"),
    };
    let proxies = |filter| -> [Box<dyn Party>; 2] {
        [
            Box::new(Proxy1 { ctx: ctx(Role::P1), inputs: ProxyInputs::default(), filter, sent_query: false, records: None }),
            Box::new(Proxy2 { ctx: ctx(Role::P2), inputs: ProxyInputs::default(), sent: false }),
        ]
    };
    let delegated_sender = |tagged| DelegatedSender {
        ctx: ctx(Role::S),
        input: sender_input(),
        tagged,
        tag: None,
        query: None,
        done: false,
    };
    let receiver = |mode| DelegatedReceiver { ctx: ctx(Role::R), mode, pending: None, result: None };

    let mut parties: Vec<Box<dyn Party>> = Vec::new();
    match protocol {
        Protocol::NaorPinkas | Protocol::StrawmanAll | Protocol::StrawmanIndexed => {
            let (s, record, sender) = match (input(Role::R), input(Role::S)) {
                (Some(RoleInput::Bit(s)), Some(RoleInput::Pair(m0, m1))) => (s, None, NpSenderInput::Pair(m0, m1)),
                (Some(RoleInput::Choice { s, v }), Some(RoleInput::Matrix(m))) => (s, Some(v), NpSenderInput::Matrix(m)),
                other => panic!("inputs not validated: {other:?}"),
            };
            parties.push(Box::new(NpSender { ctx: ctx(Role::S), input: sender }));
            parties.push(Box::new(NpReceiver {
                ctx: ctx(Role::R),
                s,
                record,
                indexed: protocol == Protocol::StrawmanIndexed,
                secret: None,
                result: None,
            }));
        }
        Protocol::Dq | Protocol::Dqmr => {
            parties.push(Box::new(delegated_sender(false)));
            parties.push(Box::new(receiver(ReceiverMode::Known { s: bit(Role::R), state: None })));
            let filter = match input(Role::P1) {
                Some(RoleInput::Record(v)) => Filter::Index(v),
                _ => Filter::None,
            };
            parties.extend(proxies(filter));
        }
        Protocol::Duq | Protocol::Duqmr => {
            let multi = protocol == Protocol::Duqmr;
            let (s, record) = match input(Role::T) {
                Some(RoleInput::Bit(s)) => (s, None),
                Some(RoleInput::Issuer { s, v, z }) => (s, Some((v, z))),
                other => panic!("issuer input not validated: {other:?}"),
            };
            parties.push(Box::new(delegated_sender(true)));
            parties.push(Box::new(receiver(ReceiverMode::Unknown { blinders: None, tag: None, keys: None, multi })));
            parties.push(Box::new(Issuer { ctx: ctx(Role::T), s, record, sent_vector: false }));
            parties.extend(proxies(if multi { Filter::OneHot(None) } else { Filter::None }));
        }
        Protocol::Naive | Protocol::Compiled => {
            let (messages, index) = match (input(Role::S), input(Role::R)) {
                (Some(RoleInput::Messages(ms)), Some(RoleInput::Selection { index, .. })) => (ms, index),
                other => panic!("inputs not validated: {other:?}"),
            };
            let suite = NaiveNpSuite::new(setup.params.clone(), setup.config, messages.len())
                .expect("validated suite size");
            let compiled = protocol == Protocol::Compiled;
            parties.push(Box::new(OneOfNSender { ctx: ctx(Role::S), suite: suite.clone(), messages, pk: None }));
            parties.push(Box::new(OneOfNReceiver {
                ctx: ctx(Role::R),
                suite,
                index,
                compiled,
                keys: None,
                query: None,
                result: None,
            }));
        }
        Protocol::Supersonic => {
            let (m0, m1) = match input(Role::S) {
                Some(RoleInput::Pair(m0, m1)) => (m0, m1),
                other => panic!("sender input not validated: {other:?}"),
            };
            parties.push(Box::new(SsSender {
                ctx: ctx(Role::S),
                m0,
                m1,
                session: SenderSession::new(session),
                share: None,
                keyed: false,
            }));
            parties.push(Box::new(SsReceiver { ctx: ctx(Role::R), s: bit(Role::R), keys: None, result: None }));
            parties.push(Box::new(SsProxy { ctx: ctx(Role::P), share: None, pair: None, sent: false }));
        }
    }
    parties
}
