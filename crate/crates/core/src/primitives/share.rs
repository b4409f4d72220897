use alloc::vec::Vec;

use rand_core::{CryptoRng, RngCore};

use super::rng::{random_bit, random_bytes};

/// One additive (XOR) share of a byte string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Share(pub Vec<u8>);

/// 2-of-2 XOR sharing of a bit: `s1` uniform, `s2 = s1 ^ s`.
pub fn share_bit<R: RngCore + CryptoRng + ?Sized>(s: bool, rng: &mut R) -> (bool, bool) {
    let s1 = random_bit(rng);
    (s1, s1 ^ s)
}

/// 2-of-2 XOR sharing of a byte string.
pub fn share_bytes<R: RngCore + CryptoRng + ?Sized>(secret: &[u8], rng: &mut R) -> (Share, Share) {
    let first = random_bytes(rng, secret.len());
    let second = xor_bytes(&first, secret);
    (Share(first), Share(second))
}

/// Controlled swap: identity for `s = false`, transposition for `s = true`.
pub fn swap_pair<T>(s: bool, pair: (T, T)) -> (T, T) {
    if s {
        (pair.1, pair.0)
    } else {
        pair
    }
}

/// Random permutation of a pair. Returns the permuted pair and the swap bit.
pub fn permute_pair<T, R: RngCore + CryptoRng + ?Sized>(rng: &mut R, pair: (T, T)) -> ((T, T), bool) {
    let b = random_bit(rng);
    (swap_pair(b, pair), b)
}

pub fn xor_bytes(a: &[u8], b: &[u8]) -> Vec<u8> {
    assert_eq!(a.len(), b.len(), "xor operands differ in length");
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn xor_into(dst: &mut [u8], src: &[u8]) {
    assert_eq!(dst.len(), src.len(), "xor operands differ in length");
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::rng::seeded;

    #[test]
    fn bit_shares_reconstruct() {
        let mut rng = seeded(b"share");
        for s in [false, true] {
            for _ in 0..1000 {
                let (a, b) = share_bit(s, &mut rng);
                assert_eq!(a ^ b, s);
            }
        }
        let (a, b) = share_bit(false, &mut rng);
        assert_eq!(a, b);
        let (a, b) = share_bit(true, &mut rng);
        assert_ne!(a, b);
    }

    #[test]
    fn byte_shares_reconstruct() {
        let mut rng = seeded(b"bytes");
        let secret = b"lambda-bit secret".to_vec();
        let (a, b) = share_bytes(&secret, &mut rng);
        assert_eq!(xor_bytes(&a.0, &b.0), secret);
    }

    #[test]
    fn swap_cases() {
        assert_eq!(swap_pair(false, ('x', 'y')), ('x', 'y'));
        assert_eq!(swap_pair(true, ('x', 'y')), ('y', 'x'));
        for a in [false, true] {
            for b in [false, true] {
                let twice = swap_pair(b, swap_pair(a, (1, 2)));
                assert_eq!(twice, swap_pair(a ^ b, (1, 2)));
            }
            assert_eq!(swap_pair(a, swap_pair(a, (1, 2))), (1, 2));
        }
    }

    #[test]
    fn permute_reports_its_bit() {
        let mut rng = seeded(b"perm");
        for _ in 0..200 {
            let ((a, b), bit) = permute_pair(&mut rng, (1u8, 2u8));
            assert_eq!((a, b), swap_pair(bit, (1, 2)));
            let mut got = [a, b];
            got.sort();
            assert_eq!(got, [1, 2]);
        }
    }
}
