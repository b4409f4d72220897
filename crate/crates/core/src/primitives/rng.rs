//! Seedable CSPRNG and labelled stream derivation.

use alloc::vec::Vec;

use num_bigint::BigUint;
pub use rand_chacha::ChaCha20Rng as Csprng;
use rand_core::{CryptoRng, RngCore, SeedableRng};

use super::hash::shake256;

/// ChaCha20 keyed by a hash of an arbitrary-length seed.
pub fn seeded(seed: &[u8]) -> Csprng {
    Csprng::from_seed(derive_seed(seed, b"oblivis-rng"))
}

/// An independent stream for `label` under `seed`. Streams for distinct
/// labels are unrelated, so the order parties draw in does not matter.
pub fn derive(seed: &[u8], label: &[u8]) -> Csprng {
    Csprng::from_seed(derive_seed(seed, label))
}

pub fn derive_seed(seed: &[u8], label: &[u8]) -> [u8; 32] {
    let len = (label.len() as u32).to_be_bytes();
    let out = shake256(&[b"oblivis-derive", &len, label, seed], 32);
    out.try_into().expect("32 bytes")
}

pub fn random_bit<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> bool {
    rng.next_u32() & 1 == 1
}

pub fn random_bytes<R: RngCore + CryptoRng + ?Sized>(rng: &mut R, len: usize) -> Vec<u8> {
    let mut out = alloc::vec![0u8; len];
    rng.fill_bytes(&mut out);
    out
}

/// Uniform integer in `[0, bound)` by rejection sampling.
pub fn random_below<R: RngCore + CryptoRng + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(bound.bits() > 0, "bound must be positive");
    let bits = bound.bits();
    let len = bits.div_ceil(8) as usize;
    let excess = (len as u64) * 8 - bits;
    let mut buf = alloc::vec![0u8; len];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xFF >> excess;
        let candidate = BigUint::from_bytes_be(&buf);
        if &candidate < bound {
            return candidate;
        }
    }
}
