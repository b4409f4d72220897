//! Protocol ids and the per-role inputs and outputs of each protocol.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use oblivis_core::ot::mr::MessageMatrix;
use oblivis_core::wire::Role;
use oblivis_core::Message;

use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    NaorPinkas,
    Dq,
    Duq,
    Dqmr,
    Duqmr,
    /// The plain 1-out-of-n suite the compiler wraps; its download grows with n.
    Naive,
    Compiled,
    Supersonic,
    /// Negative fixture: the sender ships every record to the receiver.
    StrawmanAll,
    /// Negative fixture: the receiver tells the sender which record it wants.
    StrawmanIndexed,
}

impl Protocol {
    pub const ALL: [Protocol; 10] = [
        Protocol::NaorPinkas,
        Protocol::Dq,
        Protocol::Duq,
        Protocol::Dqmr,
        Protocol::Duqmr,
        Protocol::Naive,
        Protocol::Compiled,
        Protocol::Supersonic,
        Protocol::StrawmanAll,
        Protocol::StrawmanIndexed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::NaorPinkas => "naor-pinkas",
            Protocol::Dq => "dq",
            Protocol::Duq => "duq",
            Protocol::Dqmr => "dqmr",
            Protocol::Duqmr => "duqmr",
            Protocol::Naive => "naive",
            Protocol::Compiled => "compiled",
            Protocol::Supersonic => "supersonic",
            Protocol::StrawmanAll => "strawman-1",
            Protocol::StrawmanIndexed => "strawman-2",
        }
    }

    /// Parties taking part, in the order they are started.
    pub fn roles(self) -> &'static [Role] {
        match self {
            Protocol::NaorPinkas | Protocol::Naive | Protocol::Compiled => &[Role::S, Role::R],
            Protocol::StrawmanAll | Protocol::StrawmanIndexed => &[Role::S, Role::R],
            Protocol::Dq | Protocol::Dqmr => &[Role::S, Role::R, Role::P1, Role::P2],
            Protocol::Duq | Protocol::Duqmr => &[Role::S, Role::R, Role::T, Role::P1, Role::P2],
            Protocol::Supersonic => &[Role::S, Role::R, Role::P],
        }
    }

    /// True for the delegated variants, where the receiver must never
    /// contact the sender.
    pub fn is_delegated(self) -> bool {
        matches!(self, Protocol::Dq | Protocol::Duq | Protocol::Dqmr | Protocol::Duqmr)
    }

    pub fn is_multi_record(self) -> bool {
        matches!(self, Protocol::Dqmr | Protocol::Duqmr | Protocol::StrawmanAll | Protocol::StrawmanIndexed)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        let key = key.strip_suffix("-ot").unwrap_or(&key);
        let p = match key {
            "naor-pinkas" | "np" => Protocol::NaorPinkas,
            "dq" => Protocol::Dq,
            "duq" => Protocol::Duq,
            "dqmr" | "dq-mr" => Protocol::Dqmr,
            "duqmr" | "duq-mr" => Protocol::Duqmr,
            "naive" => Protocol::Naive,
            "compiled" => Protocol::Compiled,
            "supersonic" => Protocol::Supersonic,
            "strawman-1" => Protocol::StrawmanAll,
            "strawman-2" => Protocol::StrawmanIndexed,
            _ => return Err(format!("unknown protocol `{s}`")),
        };
        Ok(p)
    }
}

/// A party's private input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RoleInput {
    /// Two messages.
    Pair(Message, Message),
    /// `z` message pairs, one per record.
    Matrix(MessageMatrix),
    /// `n` messages for a 1-out-of-n suite.
    Messages(Vec<Message>),
    /// A choice bit.
    Bit(bool),
    /// A record index.
    Record(usize),
    /// An index into `of` messages; the receiver knows the suite size.
    Selection { index: usize, of: usize },
    /// The issuer's view in the multi-record unknown-query variant.
    Issuer { s: bool, v: usize, z: usize },
    /// Choice bit and record index, both held by the receiver.
    Choice { s: bool, v: usize },
}

impl RoleInput {
    fn shape(&self) -> &'static str {
        match self {
            RoleInput::Pair(..) => "message pair",
            RoleInput::Matrix(_) => "message matrix",
            RoleInput::Messages(_) => "message list",
            RoleInput::Bit(_) => "choice bit",
            RoleInput::Record(_) => "record index",
            RoleInput::Selection { .. } => "selection",
            RoleInput::Issuer { .. } => "issuer input (v, s, z)",
            RoleInput::Choice { .. } => "choice (s, v)",
        }
    }
}

/// A party's output. Parties with no output are absent from the result map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RoleOutput {
    Message(Message),
    RecordCount(usize),
}

pub type Inputs = BTreeMap<Role, RoleInput>;
pub type Outputs = BTreeMap<Role, RoleOutput>;

fn shape_error(protocol: Protocol, msg: String) -> HarnessError {
    HarnessError::Inputs(format!("{protocol}: {msg}"))
}

/// Checks that `inputs` has exactly the shape the protocol's parties expect.
pub fn validate_inputs(protocol: Protocol, inputs: &Inputs) -> Result<(), HarnessError> {
    use RoleInput as I;
    let expected: &[(Role, &str)] = match protocol {
        Protocol::NaorPinkas | Protocol::Dq => &[(Role::S, "message pair"), (Role::R, "choice bit")],
        Protocol::Duq => &[(Role::S, "message pair"), (Role::T, "choice bit")],
        Protocol::Dqmr => &[(Role::S, "message matrix"), (Role::P1, "record index"), (Role::R, "choice bit")],
        Protocol::Duqmr => &[(Role::S, "message matrix"), (Role::T, "issuer input (v, s, z)")],
        Protocol::Naive | Protocol::Compiled => &[(Role::S, "message list"), (Role::R, "selection")],
        Protocol::Supersonic => &[(Role::S, "message pair"), (Role::R, "choice bit")],
        Protocol::StrawmanAll | Protocol::StrawmanIndexed => {
            &[(Role::S, "message matrix"), (Role::R, "choice (s, v)")]
        }
    };
    for (role, input) in inputs {
        match expected.iter().find(|(r, _)| r == role) {
            None => return Err(shape_error(protocol, format!("{role} takes no input"))),
            Some((_, shape)) if *shape != input.shape() => {
                return Err(shape_error(protocol, format!("{role} expects a {shape}, got a {}", input.shape())))
            }
            _ => {}
        }
    }
    for (role, shape) in expected {
        if !inputs.contains_key(role) {
            return Err(shape_error(protocol, format!("{role} needs a {shape}")));
        }
    }

    let records = match inputs.get(&Role::S) {
        Some(I::Matrix(m)) => Some(m.z()),
        _ => None,
    };
    let in_range = |v: usize, z: usize, what: &str| {
        if v < z {
            Ok(())
        } else {
            Err(shape_error(protocol, format!("{what} {v} out of range for {z} records")))
        }
    };
    match (protocol, inputs.get(&Role::P1), inputs.get(&Role::T), inputs.get(&Role::R), inputs.get(&Role::S)) {
        (Protocol::Dqmr, Some(I::Record(v)), ..) => in_range(*v, records.unwrap_or(0), "record")?,
        (Protocol::Duqmr, _, Some(I::Issuer { v, z, .. }), ..) => {
            if Some(*z) != records {
                return Err(shape_error(protocol, format!("issuer z = {z} but the sender holds {records:?} records")));
            }
            in_range(*v, *z, "record")?
        }
        (Protocol::StrawmanAll | Protocol::StrawmanIndexed, _, _, Some(I::Choice { v, .. }), _) => {
            in_range(*v, records.unwrap_or(0), "record")?
        }
        (Protocol::Naive | Protocol::Compiled, _, _, Some(I::Selection { index, of }), Some(I::Messages(ms))) => {
            if *of != ms.len() {
                return Err(shape_error(protocol, format!("receiver expects {of} messages, sender holds {}", ms.len())));
            }
            in_range(*index, *of, "index")?
        }
        _ => {}
    }
    Ok(())
}

/// Convenience constructors for the common input shapes.
pub mod make_inputs {
    use super::*;

    pub fn pair_and_bit(protocol: Protocol, m0: Message, m1: Message, s: bool) -> Inputs {
        let chooser = if protocol == Protocol::Duq { Role::T } else { Role::R };
        BTreeMap::from([(Role::S, RoleInput::Pair(m0, m1)), (chooser, RoleInput::Bit(s))])
    }

    pub fn dqmr(matrix: MessageMatrix, v: usize, s: bool) -> Inputs {
        BTreeMap::from([
            (Role::S, RoleInput::Matrix(matrix)),
            (Role::P1, RoleInput::Record(v)),
            (Role::R, RoleInput::Bit(s)),
        ])
    }

    pub fn duqmr(matrix: MessageMatrix, v: usize, s: bool) -> Inputs {
        let z = matrix.z();
        BTreeMap::from([(Role::S, RoleInput::Matrix(matrix)), (Role::T, RoleInput::Issuer { s, v, z })])
    }

    pub fn one_of_n(messages: Vec<Message>, index: usize) -> Inputs {
        let of = messages.len();
        BTreeMap::from([(Role::S, RoleInput::Messages(messages)), (Role::R, RoleInput::Selection { index, of })])
    }

    pub fn strawman(matrix: MessageMatrix, v: usize, s: bool) -> Inputs {
        BTreeMap::from([(Role::S, RoleInput::Matrix(matrix)), (Role::R, RoleInput::Choice { s, v })])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(z: usize) -> MessageMatrix {
        MessageMatrix::new((0..z).map(|t| (Message::new(format!("a{t}")), Message::new(format!("b{t}")))).collect())
            .unwrap()
    }

    #[test]
    fn names_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(p.name().parse::<Protocol>().unwrap(), p);
        }
        assert_eq!("dq-ot".parse::<Protocol>().unwrap(), Protocol::Dq);
        assert_eq!("DUQMR".parse::<Protocol>().unwrap(), Protocol::Duqmr);
        assert!("ot".parse::<Protocol>().is_err());
    }

    #[test]
    fn accepts_each_protocol_shape() {
        let pair = || (Message::from("x"), Message::from("y"));
        let cases = [
            (Protocol::NaorPinkas, make_inputs::pair_and_bit(Protocol::NaorPinkas, pair().0, pair().1, true)),
            (Protocol::Dq, make_inputs::pair_and_bit(Protocol::Dq, pair().0, pair().1, true)),
            (Protocol::Duq, make_inputs::pair_and_bit(Protocol::Duq, pair().0, pair().1, false)),
            (Protocol::Supersonic, make_inputs::pair_and_bit(Protocol::Supersonic, pair().0, pair().1, false)),
            (Protocol::Dqmr, make_inputs::dqmr(matrix(3), 2, true)),
            (Protocol::Duqmr, make_inputs::duqmr(matrix(3), 0, true)),
            (Protocol::Compiled, make_inputs::one_of_n(vec![pair().0, pair().1], 1)),
            (Protocol::StrawmanAll, make_inputs::strawman(matrix(2), 1, false)),
        ];
        for (p, i) in cases {
            validate_inputs(p, &i).unwrap();
        }
    }

    #[test]
    fn rejects_misplaced_inputs() {
        // In DUQ the receiver has no input; the issuer holds the choice.
        let bad = make_inputs::pair_and_bit(Protocol::Dq, "x".into(), "y".into(), true);
        assert!(validate_inputs(Protocol::Duq, &bad).is_err());
        let mut missing = make_inputs::dqmr(matrix(2), 1, true);
        missing.remove(&Role::P1);
        assert!(validate_inputs(Protocol::Dqmr, &missing).is_err());
        assert!(validate_inputs(Protocol::Dqmr, &make_inputs::dqmr(matrix(2), 2, true)).is_err());
        let mut wrong_z = make_inputs::duqmr(matrix(2), 1, true);
        wrong_z.insert(Role::T, RoleInput::Issuer { s: true, v: 1, z: 3 });
        assert!(validate_inputs(Protocol::Duqmr, &wrong_z).is_err());
        let mut extra = make_inputs::pair_and_bit(Protocol::Supersonic, "x".into(), "y".into(), true);
        extra.insert(Role::P, RoleInput::Bit(false));
        assert!(validate_inputs(Protocol::Supersonic, &extra).is_err());
    }
}
