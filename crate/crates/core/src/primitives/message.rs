use alloc::vec;
use alloc::vec::Vec;

use super::config::LENGTH_PREFIX;
use super::BitLength;
use crate::error::{Error, Result};

/// A sender message. Inside a protocol it travels padded to `sigma` bits as
/// a 32-bit big-endian length followed by the bytes and a zero fill.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Message(Vec<u8>);

impl Message {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Message(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pad(&self, sigma: BitLength) -> Result<Vec<u8>> {
        let width = sigma.bytes();
        if width < LENGTH_PREFIX || self.0.len() > width - LENGTH_PREFIX {
            return Err(Error::Precondition("message longer than sigma allows"));
        }
        let mut out = vec![0u8; width];
        out[..LENGTH_PREFIX].copy_from_slice(&(self.0.len() as u32).to_be_bytes());
        out[LENGTH_PREFIX..LENGTH_PREFIX + self.0.len()].copy_from_slice(&self.0);
        Ok(out)
    }

    /// Inverse of [`Message::pad`]. Rejects a wrong width, a length prefix
    /// past the slot and a non-zero fill.
    pub fn unpad(padded: &[u8], sigma: BitLength) -> Result<Message> {
        if padded.len() != sigma.bytes() || padded.len() < LENGTH_PREFIX {
            return Err(Error::Decode("padded message has the wrong width"));
        }
        let (prefix, body) = padded.split_at(LENGTH_PREFIX);
        let len = u32::from_be_bytes(prefix.try_into().expect("4 bytes")) as usize;
        if len > body.len() {
            return Err(Error::Decode("length prefix exceeds slot"));
        }
        if body[len..].iter().any(|&b| b != 0) {
            return Err(Error::Decode("non-zero padding"));
        }
        Ok(Message(body[..len].to_vec()))
    }
}

impl From<&[u8]> for Message {
    fn from(bytes: &[u8]) -> Self {
        Message(bytes.to_vec())
    }
}

impl From<&str> for Message {
    fn from(s: &str) -> Self {
        Message(s.as_bytes().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sigma() -> BitLength {
        BitLength::new(256).unwrap()
    }

    #[test]
    fn pad_layout() {
        let p = Message::from("hi").pad(sigma()).unwrap();
        assert_eq!(p.len(), 32);
        assert_eq!(&p[..6], &[0, 0, 0, 2, b'h', b'i']);
        assert!(p[6..].iter().all(|&b| b == 0));
    }

    #[test]
    fn too_long_rejected() {
        assert!(Message::new(vec![1u8; 29]).pad(sigma()).is_err());
        assert!(Message::new(vec![1u8; 28]).pad(sigma()).is_ok());
    }

    #[test]
    fn unpad_rejects_garbage() {
        let mut p = Message::from("x").pad(sigma()).unwrap();
        p[31] = 1;
        assert!(Message::unpad(&p, sigma()).is_err());
        let mut q = Message::from("x").pad(sigma()).unwrap();
        q[0] = 0xFF;
        assert!(Message::unpad(&q, sigma()).is_err());
        assert!(Message::unpad(&q[..31], sigma()).is_err());
    }

    proptest! {
        #[test]
        fn pad_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..=28)) {
            let m = Message::new(bytes);
            let padded = m.pad(sigma()).unwrap();
            prop_assert_eq!(padded.len(), 32);
            prop_assert_eq!(Message::unpad(&padded, sigma()).unwrap(), m);
        }
    }
}
