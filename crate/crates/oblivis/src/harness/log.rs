//! Append-only routing log and its JSON-lines export.

use std::io::{BufRead, Write};

use oblivis_core::wire::{kind, Envelope, Role};
use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub envelope: Envelope,
    /// Payload bytes on the wire.
    pub size: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoutingLog {
    entries: Vec<LogEntry>,
}

/// One exported line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub session: String,
    pub seq: u64,
    pub from: String,
    pub to: String,
    pub kind: String,
    pub size: usize,
    pub payload: String,
}

impl RoutingLog {
    pub(crate) fn push(&mut self, env: &Envelope) {
        self.entries.push(LogEntry { envelope: env.clone(), size: env.payload.len() });
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Kinds in the order they were sent.
    pub fn kinds(&self) -> Vec<u16> {
        self.entries.iter().map(|e| e.envelope.kind).collect()
    }

    pub fn find(&self, from: Role, to: Role) -> impl Iterator<Item = &LogEntry> {
        self.entries.iter().filter(move |e| e.envelope.from == from && e.envelope.to == to)
    }

    /// Every envelope in wire encoding, concatenated.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.entries.iter().flat_map(|e| e.envelope.encode()).collect()
    }

    pub fn records(&self) -> Vec<LogRecord> {
        self.entries
            .iter()
            .map(|e| LogRecord {
                session: hex::encode(e.envelope.session),
                seq: e.envelope.seq,
                from: e.envelope.from.name().into(),
                to: e.envelope.to.name().into(),
                kind: kind::name(e.envelope.kind).into(),
                size: e.size,
                payload: hex::encode(&e.envelope.payload),
            })
            .collect()
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for record in self.records() {
            serde_json::to_writer(&mut w, &record)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<RoutingLog, HarnessError> {
        let bad = |msg: String| HarnessError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, msg));
        let mut log = RoutingLog::default();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: LogRecord = serde_json::from_str(&line).map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
            let session = hex::decode(&rec.session)
                .ok()
                .and_then(|s| s.try_into().ok())
                .ok_or_else(|| bad(format!("line {}: bad session id", n + 1)))?;
            let role = |name: &str| Role::from_name(name).map_err(|e| bad(format!("line {}: {e}", n + 1)));
            let payload = hex::decode(&rec.payload).map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
            if payload.len() != rec.size {
                return Err(bad(format!("line {}: size {} but payload has {} bytes", n + 1, rec.size, payload.len())));
            }
            let env = Envelope {
                session,
                from: role(&rec.from)?,
                to: role(&rec.to)?,
                kind: kind::from_name(&rec.kind).ok_or_else(|| bad(format!("line {}: unknown kind", n + 1)))?,
                seq: rec.seq,
                payload,
            };
            log.push(&env);
        }
        Ok(log)
    }
}

/// True iff the receiver never sent anything to the sender.
pub fn assert_sender_push(log: &RoutingLog) -> bool {
    log.find(Role::R, Role::S).next().is_none()
}

/// Total payload bytes delivered to `role`.
pub fn bytes_to_role(log: &RoutingLog, role: Role) -> usize {
    log.entries.iter().filter(|e| e.envelope.to == role).map(|e| e.size).sum()
}

/// Total payload bytes sent by `role`.
pub fn bytes_from_role(log: &RoutingLog, role: Role) -> usize {
    log.entries.iter().filter(|e| e.envelope.from == role).map(|e| e.size).sum()
}
