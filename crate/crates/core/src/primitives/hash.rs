use alloc::vec;
use alloc::vec::Vec;

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use super::BitLength;
use crate::error::{Error, Result};

const TAG_H: u8 = 0x48;
const TAG_G: u8 = 0x47;

/// SHAKE256 over the concatenation of `parts`, squeezed to `out_len` bytes.
pub fn shake256(parts: &[&[u8]], out_len: usize) -> Vec<u8> {
    let mut hasher = Shake256::default();
    for part in parts {
        hasher.update(part);
    }
    let mut out = vec![0u8; out_len];
    hasher.finalize_xof().read(&mut out);
    out
}

/// Random oracle `H: {0,1}* -> {0,1}^sigma`.
pub fn hash_h(input: &[u8], sigma: BitLength) -> Vec<u8> {
    shake256(&[&[TAG_H], input], sigma.bytes())
}

/// Random oracle `G: {0,1}* -> {0,1}^(sigma + lambda)`.
pub fn hash_g(input: &[u8], sigma: BitLength, lambda: BitLength) -> Vec<u8> {
    shake256(&[&[TAG_G], input], sigma.bytes() + lambda.bytes())
}

/// Splits `y` into its leading `|y| - lambda` bits and trailing `lambda` bits.
pub fn parse(lambda: BitLength, y: &[u8]) -> Result<(&[u8], &[u8])> {
    if y.len() < lambda.bytes() {
        return Err(Error::Precondition("parse input shorter than lambda"));
    }
    Ok(y.split_at(y.len() - lambda.bytes()))
}
