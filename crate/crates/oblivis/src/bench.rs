//! Phase-resolved timing of the protocols.
//!
//! Each repetition runs `n` invocations phase by phase: phase 1 for all
//! invocations, then phase 2, and so on. Phases are the protocol steps
//! after public setup; unused phases report zero. Protocol functions are
//! called directly so transport plumbing does not pollute the numbers.

use std::time::{Duration, Instant};

use oblivis_core::ahe::kgen;
use oblivis_core::ot::base::{np_gen_query, np_gen_res, np_retrieve, Compilable, NaiveNpSuite, OtSuite};
use oblivis_core::ot::compiler::{compiled_decrypt, compiled_gen_query, compiled_gen_res};
use oblivis_core::ot::dq::{dq_gen_res, dq_p1_gen_query, dq_p2_gen_query, dq_request, dq_retrieve};
use oblivis_core::ot::duq::{duq_gen_res, duq_p1_gen_query, duq_p2_gen_query, duq_r_request, duq_retrieve, duq_t_request};
use oblivis_core::ot::mr::{
    dqmr_gen_res, dqmr_obl_filter, duqmr_decrypt, duqmr_gen_res, duqmr_obl_filter, duqmr_r_setup, duqmr_t_setup,
    MessageMatrix,
};
use oblivis_core::primitives::rng::{derive, random_bytes, Csprng};
use oblivis_core::supersonic::{ss_gen_query, ss_gen_res, ss_obl_filter, ss_retrieve, ss_setup};
use oblivis_core::Message;

use crate::harness::{Protocol, SessionSetup};

pub const PHASES: usize = 5;
pub const WARMUP: usize = 10;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub protocol: Protocol,
    /// Invocations per repetition.
    pub n: usize,
    pub reps: usize,
    pub setup: SessionSetup,
    pub seed: Vec<u8>,
    pub s: bool,
    /// Record index, or the selected message for the compiled suite.
    pub v: usize,
    /// Records, or messages for the compiled suite.
    pub z: usize,
    /// Worker threads per phase; 1 for acceptance timing.
    pub threads: usize,
    pub warmup: usize,
}

impl BenchConfig {
    pub fn new(protocol: Protocol, n: usize, setup: SessionSetup) -> Self {
        BenchConfig {
            protocol,
            n,
            reps: 50,
            setup,
            seed: b"oblivis-bench".to_vec(),
            s: true,
            v: 0,
            z: 8,
            threads: 1,
            warmup: WARMUP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub protocol: Protocol,
    pub invocations: usize,
    /// Mean milliseconds per phase over the repetitions.
    pub phase_ms: [f64; PHASES],
    /// Mean measured wall time of a repetition, in milliseconds.
    pub total_ms: f64,
    pub reps: usize,
    pub environment: String,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "protocol,N,phase1,phase2,phase3,phase4,phase5,total,reps";

    pub fn csv_row(&self) -> String {
        let phases: Vec<String> = self.phase_ms.iter().map(|p| format!("{p:.6}")).collect();
        format!("{},{},{},{:.6},{}", self.protocol, self.invocations, phases.join(","), self.total_ms, self.reps)
    }

    pub fn per_invocation_ms(&self) -> f64 {
        self.total_ms / self.invocations as f64
    }
}

pub fn environment() -> String {
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    let build = if cfg!(debug_assertions) { "debug" } else { "optimized" };
    format!("{}-{} cpus={cpus} build={build}", std::env::consts::OS, std::env::consts::ARCH)
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Config(String),
    #[error("protocol error in phase {phase}: {error}")]
    Protocol { phase: usize, error: oblivis_core::Error },
    #[error("invocation {0} retrieved the wrong message")]
    WrongMessage(usize),
}

type Res<T> = Result<T, BenchError>;

/// Timer for one repetition.
struct Phases {
    seed: Vec<u8>,
    threads: usize,
    times: [Duration; PHASES],
}

impl Phases {
    /// Runs phase `k` (1-based) over every invocation's state.
    fn run<S: Send, O: Send>(
        &mut self,
        k: usize,
        state: Vec<S>,
        f: impl Fn(S, &mut Csprng) -> oblivis_core::Result<O> + Sync,
    ) -> Res<Vec<O>> {
        let start = Instant::now();
        let out = if self.threads <= 1 {
            let mut rng = derive(&self.seed, format!("phase{k}/0").as_bytes());
            state.into_iter().map(|s| f(s, &mut rng)).collect::<oblivis_core::Result<Vec<_>>>()
        } else {
            self.run_threaded(k, state, &f)
        };
        self.times[k - 1] += start.elapsed();
        out.map_err(|error| BenchError::Protocol { phase: k, error })
    }

    fn run_threaded<S: Send, O: Send>(
        &self,
        k: usize,
        state: Vec<S>,
        f: &(impl Fn(S, &mut Csprng) -> oblivis_core::Result<O> + Sync),
    ) -> oblivis_core::Result<Vec<O>> {
        let chunk = state.len().div_ceil(self.threads).max(1);
        let mut chunks: Vec<Vec<S>> = Vec::new();
        let mut it = state.into_iter().peekable();
        while it.peek().is_some() {
            chunks.push(it.by_ref().take(chunk).collect());
        }
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .into_iter()
                .enumerate()
                .map(|(c, part)| {
                    let mut rng = derive(&self.seed, format!("phase{k}/{c}").as_bytes());
                    scope.spawn(move || part.into_iter().map(|s| f(s, &mut rng)).collect::<oblivis_core::Result<Vec<_>>>())
                })
                .collect();
            let mut out = Vec::new();
            for h in handles {
                out.extend(h.join().expect("bench worker panicked")?);
            }
            Ok(out)
        })
    }
}

fn check(got: Vec<Message>, want: &Message) -> Res<()> {
    match got.iter().position(|m| m != want) {
        Some(i) => Err(BenchError::WrongMessage(i)),
        None => Ok(()),
    }
}

fn full_message(rng: &mut Csprng, cfg: &BenchConfig) -> Message {
    Message::new(random_bytes(rng, cfg.setup.config.message_capacity()))
}

/// Runs one repetition of `n` invocations and returns the phase times.
fn repetition(cfg: &BenchConfig, n: usize, rep: usize) -> Res<([Duration; PHASES], Duration)> {
    let seed = [&cfg.seed[..], &(rep as u64).to_be_bytes()].concat();
    let mut inputs = derive(&seed, b"inputs");
    let mut ph = Phases { seed, threads: cfg.threads, times: [Duration::ZERO; PHASES] };
    let (params, config) = (&cfg.setup.params, &cfg.setup.config);
    let m0 = full_message(&mut inputs, cfg);
    let m1 = full_message(&mut inputs, cfg);
    let want = if cfg.s { m1.clone() } else { m0.clone() };
    let s = cfg.s;
    let unit = vec![(); n];

    let wall = Instant::now();
    match cfg.protocol {
        Protocol::Supersonic => {
            let keys = ph.run(1, unit, |_, rng| Ok(ss_setup(config, rng)))?;
            let q = ph.run(2, keys, |k, rng| Ok((k, ss_gen_query(s, rng))))?;
            let res = ph.run(3, q, |(k, (s1, s2)), _| {
                let pair = ss_gen_res(&m0, &m1, &k, s1, config)?;
                Ok((k, s2, pair))
            })?;
            let fin = ph.run(4, res, |(k, s2, pair), _| Ok((k, ss_obl_filter(pair, s2))))?;
            let got = ph.run(5, fin, |(k, e), _| ss_retrieve(&e, &k, s, config))?;
            check(got, &want)?;
        }
        Protocol::NaorPinkas => {
            let q = ph.run(1, unit, |_, rng| Ok(np_gen_query(params, s, rng)))?;
            let res = ph.run(2, q, |(q, sp), rng| Ok((sp, np_gen_res(&m0, &m1, params, config, &q, rng)?)))?;
            let got = ph.run(3, res, |(sp, r), _| np_retrieve(&r, &sp, params, config))?;
            check(got, &want)?;
        }
        Protocol::Dq => {
            let req = ph.run(1, unit, |_, rng| Ok(dq_request(params, s, rng)))?;
            let q2 = ph.run(2, req, |(r1, r2, st), _| Ok((r1, dq_p2_gen_query(&r2, params), st)))?;
            let q1 = ph.run(3, q2, |(r1, q2, st), _| Ok((dq_p1_gen_query(&r1, &q2, params), st)))?;
            let res = ph.run(4, q1, |(q1, st), rng| Ok((dq_gen_res(&m0, &m1, params, config, &q1, rng)?, st)))?;
            let got = ph.run(5, res, |(r, st), _| dq_retrieve(&r, &st, params, config))?;
            check(got, &want)?;
        }
        Protocol::Duq => {
            let req = ph.run(1, unit, |_, rng| Ok((duq_r_request(params, rng), duq_t_request(config, s, rng))))?;
            let q2 = ph.run(2, req, |(b, t), _| Ok((duq_p2_gen_query(&b.r2, t.s2, params), b, t)))?;
            let q1 = ph.run(3, q2, |(q2, b, t), _| Ok((duq_p1_gen_query(&b.r1, t.s1, &q2, params), b, t)))?;
            let res = ph.run(4, q1, |(q1, b, t), rng| {
                Ok((duq_gen_res(&m0, &m1, params, config, &q1, &t.tag, rng)?, b, t.receiver_tag()))
            })?;
            let got = ph.run(5, res, |(r, b, tag), _| duq_retrieve(&r, &b, &tag, params, config))?;
            check(got, &want)?;
        }
        Protocol::Dqmr | Protocol::Duqmr => {
            let pairs = (0..cfg.z).map(|_| (full_message(&mut inputs, cfg), full_message(&mut inputs, cfg))).collect();
            let matrix = MessageMatrix::new(pairs).map_err(|e| BenchError::Config(e.to_string()))?;
            let want = matrix.get(s, cfg.v).ok_or_else(|| BenchError::Config("--v out of range".into()))?.clone();
            let v = cfg.v;
            if cfg.protocol == Protocol::Dqmr {
                let req = ph.run(1, unit, |_, rng| Ok(dq_request(params, s, rng)))?;
                let q1 = ph.run(2, req, |(r1, r2, st), _| {
                    Ok((dq_p1_gen_query(&r1, &dq_p2_gen_query(&r2, params), params), st))
                })?;
                let res = ph.run(3, q1, |(q1, st), rng| Ok((dqmr_gen_res(&matrix, params, config, &q1, rng)?, st)))?;
                let kept = ph.run(4, res, |(all, st), _| Ok((dqmr_obl_filter(&all, v)?, st)))?;
                let got = ph.run(5, kept, |(r, st), _| dq_retrieve(&r, &st, params, config))?;
                check(got, &want)?;
            } else {
                // The key pair and one-hot vector are one-off setup, shared by the batch.
                let setup = ph.run(1, vec![()], |_, rng| {
                    let keys = duqmr_r_setup(config, params, rng)?;
                    let w = duqmr_t_setup(cfg.z, v, &keys.pk, rng)?;
                    Ok((keys, w))
                })?;
                let (keys, w) = setup.into_iter().next().expect("one setup");
                let req = ph.run(1, unit, |_, rng| Ok((duq_r_request(params, rng), duq_t_request(config, s, rng))))?;
                let q1 = ph.run(2, req, |(b, t), _| {
                    let q2 = duq_p2_gen_query(&b.r2, t.s2, params);
                    Ok((duq_p1_gen_query(&b.r1, t.s1, &q2, params), b, t))
                })?;
                let res = ph.run(3, q1, |(q1, b, t), rng| {
                    Ok((duqmr_gen_res(&matrix, params, config, &q1, &t.tag, rng)?, b, t.receiver_tag()))
                })?;
                let filtered = ph.run(4, res, |(all, b, tag), _| Ok((duqmr_obl_filter(&all, &w, &keys.pk)?, b, tag)))?;
                let got = ph.run(5, filtered, |(f, b, tag), _| {
                    let pair = duqmr_decrypt(&f, &keys.sk, params, config)?;
                    duq_retrieve(&pair, &b, &tag, params, config)
                })?;
                check(got, &want)?;
            }
        }
        Protocol::Compiled | Protocol::Naive => {
            let messages: Vec<Message> = (0..cfg.z).map(|_| full_message(&mut inputs, cfg)).collect();
            let index = cfg.v;
            let want = messages.get(index).ok_or_else(|| BenchError::Config("--v out of range".into()))?.clone();
            let suite = NaiveNpSuite::new(params.clone(), *config, cfg.z).map_err(|e| BenchError::Config(e.to_string()))?;
            if cfg.protocol == Protocol::Naive {
                let q = ph.run(1, unit, |_, rng| suite.gen_query(index, rng))?;
                let res = ph.run(2, q, |(q, sp), rng| Ok((suite.gen_res(&messages, &q, rng)?, q, sp)))?;
                let got = ph.run(3, res, |(r, q, sp), _| suite.retrieve(&r, &q, &sp, index))?;
                check(got, &want)?;
            } else {
                let keys = ph.run(1, vec![()], |_, rng| kgen(config.ahe_plaintext_bits(suite.component_bits()), rng))?;
                let keys = keys.into_iter().next().expect("one key pair");
                let q = ph.run(2, unit, |_, rng| compiled_gen_query(&suite, &keys.sk, index, rng))?;
                let res = ph.run(3, q, |(q, sp), rng| {
                    Ok((compiled_gen_res(&suite, &messages, &keys.pk, &q, rng)?, q, sp))
                })?;
                let el = ph.run(4, res, |(r, q, sp), _| Ok((compiled_decrypt(&suite, &r, &keys.sk)?, q, sp)))?;
                let got = ph.run(5, el, |(e, q, sp), _| suite.retrieve_element(&e, &q.inner, &sp, index))?;
                check(got, &want)?;
            }
        }
        Protocol::StrawmanAll | Protocol::StrawmanIndexed => {
            return Err(BenchError::Config(format!("{} is a test fixture, not a benchmark target", cfg.protocol)))
        }
    }
    Ok((ph.times, wall.elapsed()))
}

pub fn run_bench(cfg: &BenchConfig) -> Res<BenchReport> {
    if cfg.n == 0 || cfg.reps == 0 {
        return Err(BenchError::Config("--n and --reps must be at least 1".into()));
    }
    for w in 0..cfg.warmup {
        repetition(cfg, 1, usize::MAX - w)?;
    }
    let mut phases = [0f64; PHASES];
    let mut total = 0f64;
    for rep in 0..cfg.reps {
        let (times, wall) = repetition(cfg, cfg.n, rep)?;
        for (acc, t) in phases.iter_mut().zip(times) {
            *acc += t.as_secs_f64() * 1e3;
        }
        total += wall.as_secs_f64() * 1e3;
    }
    let reps = cfg.reps as f64;
    Ok(BenchReport {
        protocol: cfg.protocol,
        invocations: cfg.n,
        phase_ms: phases.map(|p| p / reps),
        total_ms: total / reps,
        reps: cfg.reps,
        environment: environment(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(protocol: Protocol) -> BenchConfig {
        let mut cfg = BenchConfig::new(protocol, 3, SessionSetup::test_profile());
        cfg.reps = 2;
        cfg.warmup = 1;
        cfg.z = 3;
        cfg.v = 2;
        cfg
    }

    #[test]
    fn every_protocol_benches_and_accounts_for_its_time() {
        for protocol in [
            Protocol::Supersonic,
            Protocol::NaorPinkas,
            Protocol::Dq,
            Protocol::Duq,
            Protocol::Dqmr,
            Protocol::Duqmr,
            Protocol::Naive,
            Protocol::Compiled,
        ] {
            let report = run_bench(&quick(protocol)).unwrap();
            let max = report.phase_ms.iter().cloned().fold(0.0, f64::max);
            let sum: f64 = report.phase_ms.iter().sum();
            assert!(report.total_ms >= max, "{protocol}");
            assert!(sum <= report.total_ms * 1.0001, "{protocol}");
        }
    }

    #[test]
    fn threaded_phases_still_retrieve_correctly() {
        let mut cfg = quick(Protocol::Dq);
        cfg.threads = 3;
        cfg.n = 7;
        run_bench(&cfg).unwrap();
    }

    #[test]
    fn csv_row_layout() {
        let report = BenchReport {
            protocol: Protocol::Supersonic,
            invocations: 10,
            phase_ms: [0.5, 0.25, 0.0, 1.0, 2.0],
            total_ms: 4.0,
            reps: 50,
            environment: String::new(),
        };
        assert_eq!(report.csv_row(), "supersonic,10,0.500000,0.250000,0.000000,1.000000,2.000000,4.000000,50");
        assert_eq!(BenchReport::CSV_HEADER.split(',').count(), report.csv_row().split(',').count());
    }

    #[test]
    fn fixtures_and_empty_runs_are_rejected() {
        assert!(run_bench(&quick(Protocol::StrawmanAll)).is_err());
        let mut cfg = quick(Protocol::Dq);
        cfg.n = 0;
        assert!(run_bench(&cfg).is_err());
    }
}
