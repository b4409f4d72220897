//! Montgomery multiplication over 64-bit limbs for a fixed odd modulus.
//!
//! `num-bigint` reduces with long division after every product, which makes
//! hand-written exponentiation loops several times slower than its own
//! `modpow`. Values here stay in Montgomery form (`x * 2^(64n) mod m`) as
//! plain limb vectors until converted back.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::One;

/// A residue in Montgomery form, `n` little-endian limbs, always below the modulus.
pub(crate) type Residue = Vec<u64>;

#[derive(Clone, Debug)]
pub(crate) struct Montgomery {
    modulus: Vec<u64>,
    /// `-m^-1 mod 2^64`
    m_prime: u64,
    /// `R^2 mod m` in limbs, for converting into Montgomery form.
    r_squared: Vec<u64>,
}

fn limbs(x: &BigUint, n: usize) -> Vec<u64> {
    let mut out = x.to_u64_digits();
    out.resize(n, 0);
    out
}

impl Montgomery {
    /// Panics if `modulus` is even or below 3.
    pub(crate) fn new(modulus: &BigUint) -> Self {
        assert!(modulus.bit(0) && modulus.bits() > 1, "Montgomery modulus must be odd and above 1");
        let m = modulus.to_u64_digits();
        let n = m.len();
        // Newton iteration for m0^-1 mod 2^64; each step doubles the correct bits.
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(m[0].wrapping_mul(inv)));
        }
        let r_squared = (BigUint::one() << (128 * n)) % modulus;
        Montgomery { modulus: m, m_prime: inv.wrapping_neg(), r_squared: limbs(&r_squared, n) }
    }

    fn len(&self) -> usize {
        self.modulus.len()
    }

    /// `a * b * R^-1 mod m` (CIOS).
    pub(crate) fn mul(&self, a: &[u64], b: &[u64]) -> Residue {
        let n = self.len();
        let m = &self.modulus;
        let mut t = vec![0u64; n + 2];
        for &bi in &b[..n] {
            let mut carry = 0u128;
            for j in 0..n {
                let s = t[j] as u128 + a[j] as u128 * bi as u128 + carry;
                t[j] = s as u64;
                carry = s >> 64;
            }
            let s = t[n] as u128 + carry;
            t[n] = s as u64;
            t[n + 1] = (s >> 64) as u64;

            let q = t[0].wrapping_mul(self.m_prime);
            let mut carry = (t[0] as u128 + q as u128 * m[0] as u128) >> 64;
            for j in 1..n {
                let s = t[j] as u128 + q as u128 * m[j] as u128 + carry;
                t[j - 1] = s as u64;
                carry = s >> 64;
            }
            let s = t[n] as u128 + carry;
            t[n - 1] = s as u64;
            t[n] = t[n + 1] + (s >> 64) as u64;
        }
        if t[n] != 0 || !less(&t[..n], m) {
            let mut borrow = false;
            for j in 0..n {
                let (d, b1) = t[j].overflowing_sub(m[j]);
                let (d, b2) = d.overflowing_sub(borrow as u64);
                t[j] = d;
                borrow = b1 || b2;
            }
        }
        t.truncate(n);
        t
    }

    /// Montgomery form of `x`, which must be below the modulus.
    pub(crate) fn to_residue(&self, x: &BigUint) -> Residue {
        self.mul(&limbs(x, self.len()), &self.r_squared)
    }

    pub(crate) fn to_uint(&self, a: &[u64]) -> BigUint {
        let mut one = vec![0u64; self.len()];
        one[0] = 1;
        let t = self.mul(a, &one);
        BigUint::from_slice(&t.iter().flat_map(|&l| [l as u32, (l >> 32) as u32]).collect::<Vec<_>>())
    }
}

/// Little-endian comparison `a < b` for equal lengths.
fn less(a: &[u64], b: &[u64]) -> bool {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        if x != y {
            return x < y;
        }
    }
    false
}
