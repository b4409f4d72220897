//! Stream-socket transport.
//!
//! Each party runs behind [`host_party`] on its own connection. The hub
//! drives them with the same round scheduler as in-process sessions through
//! [`RemoteParty`] stubs, so the routing log is identical. Frames use the
//! envelope wire format; a few reserved kinds carry control messages.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};

use oblivis_core::wire::{Envelope, Role, SessionId, HEADER_LEN};
use oblivis_core::Message;

use super::{
    build_parties, session_id, validate_inputs, Fault, HarnessError, Inputs, Outbox, Party, PartyResult, Protocol,
    RoleOutput, Session, SessionOutcome, SessionSetup,
};

/// Hub to party: run `start`.
pub const CTRL_START: u16 = 0xFFF0;
/// Party to hub: no more envelopes for this step.
pub const CTRL_DONE: u16 = 0xFFF1;
/// Hub to party: return your output and exit.
pub const CTRL_FINISH: u16 = 0xFFF2;
/// Party to hub: the output.
pub const CTRL_OUTPUT: u16 = 0xFFF3;
/// Party to hub: the step failed; payload is the error text.
pub const CTRL_ERROR: u16 = 0xFFF4;
/// Party to hub, first frame on a connection: announces the role.
pub const CTRL_HELLO: u16 = 0xFFF5;

pub fn write_frame(stream: &mut impl Write, env: &Envelope) -> std::io::Result<()> {
    stream.write_all(&env.encode())?;
    stream.flush()
}

pub fn read_frame(stream: &mut impl Read) -> std::io::Result<Envelope> {
    let mut header = [0u8; HEADER_LEN];
    stream.read_exact(&mut header)?;
    let len = Envelope::payload_len(&header).map_err(invalid)?;
    let mut bytes = header.to_vec();
    bytes.resize(HEADER_LEN + len, 0);
    stream.read_exact(&mut bytes[HEADER_LEN..])?;
    Envelope::decode(&bytes).map_err(invalid)
}

fn invalid(e: impl std::fmt::Display) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
}

fn control(session: SessionId, from: Role, to: Role, kind: u16, payload: Vec<u8>) -> Envelope {
    Envelope { session, from, to, kind, seq: 0, payload }
}

fn encode_output(out: &Option<RoleOutput>) -> Vec<u8> {
    match out {
        None => vec![0],
        Some(RoleOutput::Message(m)) => [&[1u8][..], m.as_bytes()].concat(),
        Some(RoleOutput::RecordCount(z)) => [&[2u8][..], &(*z as u64).to_be_bytes()].concat(),
    }
}

fn decode_output(payload: &[u8]) -> PartyResult<Option<RoleOutput>> {
    match payload.split_first() {
        Some((0, [])) => Ok(None),
        Some((1, m)) => Ok(Some(RoleOutput::Message(Message::new(m.to_vec())))),
        Some((2, z)) if z.len() == 8 => {
            Ok(Some(RoleOutput::RecordCount(u64::from_be_bytes(z.try_into().expect("8 bytes")) as usize)))
        }
        _ => Err(Fault::Transport("malformed output frame".into())),
    }
}

/// Serves one party over `stream` until the hub sends FINISH.
pub fn host_party(mut stream: TcpStream, mut party: Box<dyn Party>, session: SessionId) -> std::io::Result<()> {
    let role = party.role();
    write_frame(&mut stream, &control(session, role, role, CTRL_HELLO, Vec::new()))?;
    loop {
        let env = read_frame(&mut stream)?;
        let mut out = Outbox::default();
        let res = match env.kind {
            CTRL_FINISH => {
                let reply = match party.finish() {
                    Ok(o) => control(session, role, role, CTRL_OUTPUT, encode_output(&o)),
                    Err(e) => control(session, role, role, CTRL_ERROR, e.to_string().into_bytes()),
                };
                return write_frame(&mut stream, &reply);
            }
            CTRL_START => party.start(&mut out),
            _ => party.receive(&env, &mut out),
        };
        match res {
            Ok(()) => {
                for (to, kind, payload) in out.into_inner() {
                    write_frame(&mut stream, &control(session, role, to, kind, payload))?;
                }
                write_frame(&mut stream, &control(session, role, role, CTRL_DONE, Vec::new()))?;
            }
            Err(e) => write_frame(&mut stream, &control(session, role, role, CTRL_ERROR, e.to_string().into_bytes()))?,
        }
    }
}

/// Hub-side stand-in for a party living on the other end of a connection.
pub struct RemoteParty {
    role: Role,
    session: SessionId,
    stream: TcpStream,
}

impl RemoteParty {
    /// Reads the HELLO frame to learn the role.
    pub fn accept(mut stream: TcpStream) -> std::io::Result<RemoteParty> {
        let hello = read_frame(&mut stream)?;
        if hello.kind != CTRL_HELLO {
            return Err(invalid("expected HELLO"));
        }
        Ok(RemoteParty { role: hello.from, session: hello.session, stream })
    }

    fn step(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        let io = |e: std::io::Error| Fault::Transport(e.to_string());
        write_frame(&mut self.stream, env).map_err(io)?;
        loop {
            let reply = read_frame(&mut self.stream).map_err(io)?;
            match reply.kind {
                CTRL_DONE => return Ok(()),
                CTRL_ERROR => return Err(Fault::Remote(String::from_utf8_lossy(&reply.payload).into_owned())),
                _ => out.send(reply.to, reply.kind, reply.payload),
            }
        }
    }
}

impl Party for RemoteParty {
    fn role(&self) -> Role {
        self.role
    }

    fn start(&mut self, out: &mut Outbox) -> PartyResult {
        let env = control(self.session, self.role, self.role, CTRL_START, Vec::new());
        self.step(&env, out)
    }

    fn receive(&mut self, env: &Envelope, out: &mut Outbox) -> PartyResult {
        self.step(env, out)
    }

    fn finish(&mut self) -> PartyResult<Option<RoleOutput>> {
        let io = |e: std::io::Error| Fault::Transport(e.to_string());
        let env = control(self.session, self.role, self.role, CTRL_FINISH, Vec::new());
        write_frame(&mut self.stream, &env).map_err(io)?;
        let reply = read_frame(&mut self.stream).map_err(io)?;
        match reply.kind {
            CTRL_OUTPUT => decode_output(&reply.payload),
            CTRL_ERROR => Err(Fault::Remote(String::from_utf8_lossy(&reply.payload).into_owned())),
            _ => Err(Fault::Transport("expected OUTPUT".into())),
        }
    }
}

/// Runs a session with every party on its own loopback connection and thread.
pub fn run_session_over_tcp(
    protocol: Protocol,
    setup: &SessionSetup,
    inputs: &Inputs,
    seed: &[u8],
) -> Result<SessionOutcome, HarnessError> {
    validate_inputs(protocol, inputs)?;
    let id = session_id(seed);
    let parties = build_parties(protocol, setup, inputs, seed, id);
    let order: Vec<Role> = parties.iter().map(|p| p.role()).collect();
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;

    std::thread::scope(|scope| {
        let hosts: Vec<_> = parties
            .into_iter()
            .map(|party| {
                scope.spawn(move || -> std::io::Result<()> {
                    let stream = TcpStream::connect(addr)?;
                    stream.set_nodelay(true)?;
                    host_party(stream, party, id)
                })
            })
            .collect();
        let mut remotes = Vec::with_capacity(order.len());
        for _ in 0..order.len() {
            let (stream, _) = listener.accept()?;
            stream.set_nodelay(true)?;
            remotes.push(RemoteParty::accept(stream)?);
        }
        // Start in protocol order regardless of connection order.
        remotes.sort_by_key(|r| order.iter().position(|o| *o == r.role));
        let boxed: Vec<Box<dyn Party>> = remotes.into_iter().map(|r| Box::new(r) as Box<dyn Party>).collect();
        let outcome = Session::new(id, boxed).run();
        for h in hosts {
            // A host that lost its hub after an abort just reports a closed socket.
            let _ = h.join().expect("host thread panicked");
        }
        outcome
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_frames_round_trip() {
        for out in [None, Some(RoleOutput::Message("hi".into())), Some(RoleOutput::RecordCount(9))] {
            assert_eq!(decode_output(&encode_output(&out)).unwrap(), out);
        }
        assert!(decode_output(&[3]).is_err());
    }
}
