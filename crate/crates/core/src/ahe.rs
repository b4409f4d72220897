//! Paillier encryption with `g = N + 1`, plus encrypted one-hot vectors.
//!
//! Ciphertexts carry an 8-byte fingerprint of the public key they were made
//! under so that mixing keys is caught instead of producing garbage.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_core::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::metrics;
use crate::primitives::group::fixed_width;
use crate::primitives::montgomery::{Montgomery, Residue};
use crate::primitives::prime::random_prime;
use crate::primitives::rng::random_below;
use crate::primitives::shake256;

const PRIME_BUDGET: usize = 1 << 20;

pub type Fingerprint = [u8; 8];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    n: BigUint,
    n_squared: BigUint,
    fingerprint: Fingerprint,
}

/// Keeps the factorization so decryption and owner-side encryption can
/// work modulo `p^2` and `q^2` separately.
#[derive(Clone, Debug)]
pub struct SecretKey {
    public: PublicKey,
    p: Factor,
    q: Factor,
    /// `q^-1 mod p`
    q_inv_p: BigUint,
    /// `(q^2)^-1 mod p^2`
    q2_inv_p2: BigUint,
}

#[derive(Clone, Debug)]
struct Factor {
    prime: BigUint,
    squared: BigUint,
    /// `(L_p((N + 1)^(p - 1) mod p^2))^-1 mod p`
    h: BigUint,
    /// `N mod p(p - 1)`, the exponent for `r^N mod p^2`.
    n_reduced: BigUint,
}

impl Factor {
    fn new(prime: BigUint, n: &BigUint) -> Option<Factor> {
        let squared = &prime * &prime;
        let p1 = &prime - 1u32;
        let g = (n + 1u32) % &squared;
        let l = (g.modpow(&p1, &squared) - 1u32) / &prime;
        let h = l.modinv(&prime)?;
        let n_reduced = n % (&prime * &p1);
        Some(Factor { prime, squared, h, n_reduced })
    }

    fn dec(&self, c: &BigUint) -> BigUint {
        let u = c.modpow(&(&self.prime - 1u32), &self.squared);
        (u - 1u32) / &self.prime * &self.h % &self.prime
    }
}

#[derive(Clone, Debug)]
pub struct KeyPair {
    pub pk: PublicKey,
    pub sk: SecretKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    value: BigUint,
    fingerprint: Fingerprint,
}

impl Ciphertext {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }
}

/// Generates a key whose modulus `N` has exactly `plaintext_bits` bits
/// (rounded up to an even count).
pub fn kgen<R: RngCore + CryptoRng + ?Sized>(plaintext_bits: u64, rng: &mut R) -> Result<KeyPair> {
    if plaintext_bits < 64 {
        return Err(Error::Precondition("plaintext_bits must be at least 64"));
    }
    let half = plaintext_bits.div_ceil(2);
    loop {
        let p = random_prime(rng, half, PRIME_BUDGET)?;
        let q = random_prime(rng, half, PRIME_BUDGET)?;
        if p == q {
            continue;
        }
        let n = &p * &q;
        let p1 = &p - 1u32;
        let q1 = &q - 1u32;
        // gcd(N, (p-1)(q-1)) = 1 holds for equal-size primes, but check anyway.
        if !n.gcd(&(&p1 * &q1)).is_one() {
            continue;
        }
        let public = PublicKey::new(n);
        let (Some(pf), Some(qf)) = (Factor::new(p, &public.n), Factor::new(q, &public.n)) else {
            continue;
        };
        let (Some(q_inv_p), Some(q2_inv_p2)) =
            (qf.prime.modinv(&pf.prime), qf.squared.modinv(&pf.squared))
        else {
            continue;
        };
        let sk = SecretKey { public: public.clone(), p: pf, q: qf, q_inv_p, q2_inv_p2 };
        return Ok(KeyPair { pk: public, sk });
    }
}

impl PublicKey {
    pub fn new(n: BigUint) -> Self {
        let n_squared = &n * &n;
        let digest = shake256(&[b"oblivis-ahe-pk", &n.to_bytes_be()], 8);
        let fingerprint = digest.try_into().expect("8 bytes");
        PublicKey { n, n_squared, fingerprint }
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn plaintext_bits(&self) -> u64 {
        self.n.bits()
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    /// Bytes of the fixed-width ciphertext value.
    pub fn ciphertext_width(&self) -> usize {
        self.n_squared.bits().div_ceil(8) as usize
    }

    pub fn enc<R: RngCore + CryptoRng + ?Sized>(&self, m: &BigUint, rng: &mut R) -> Result<Ciphertext> {
        if m >= &self.n {
            return Err(Error::PlaintextRange);
        }
        metrics::count_ahe();
        let r = self.randomness(rng);
        Ok(self.assemble(m, &r.modpow(&self.n, &self.n_squared)))
    }

    fn randomness<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> BigUint {
        loop {
            let r = random_below(rng, &self.n);
            if !r.is_zero() && r.gcd(&self.n).is_one() {
                return r;
            }
        }
    }

    /// `(1 + N)^m * r^N`, given `r^N`; note `(1 + N)^m = 1 + mN mod N^2`.
    fn assemble(&self, m: &BigUint, r_to_n: &BigUint) -> Ciphertext {
        let gm = (BigUint::one() + m * &self.n) % &self.n_squared;
        Ciphertext { value: gm * r_to_n % &self.n_squared, fingerprint: self.fingerprint }
    }

    fn check(&self, c: &Ciphertext) -> Result<()> {
        if c.fingerprint != self.fingerprint {
            return Err(Error::KeyMismatch);
        }
        Ok(())
    }

    pub fn hom_add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.check(a)?;
        self.check(b)?;
        metrics::count_ahe();
        Ok(Ciphertext {
            value: &a.value * &b.value % &self.n_squared,
            fingerprint: self.fingerprint,
        })
    }

    /// Encryption of `k * m mod N` given an encryption of `m`.
    pub fn hom_scale(&self, c: &Ciphertext, k: &BigUint) -> Result<Ciphertext> {
        self.check(c)?;
        metrics::count_ahe();
        Ok(Ciphertext {
            value: c.value.modpow(k, &self.n_squared),
            fingerprint: self.fingerprint,
        })
    }

    /// The encryption of zero with randomness 1; the neutral element of `hom_add`.
    pub fn trivial_zero(&self) -> Ciphertext {
        Ciphertext { value: BigUint::one(), fingerprint: self.fingerprint }
    }

    /// Fingerprint, then the fixed-width value behind a 4-byte length.
    pub fn ciphertext_to_bytes(&self, c: &Ciphertext) -> Vec<u8> {
        let width = self.ciphertext_width();
        let mut out = Vec::with_capacity(12 + width);
        out.extend_from_slice(&(width as u32).to_be_bytes());
        out.extend_from_slice(&fixed_width(&c.value, width));
        out.extend_from_slice(&c.fingerprint);
        out
    }

    pub fn ciphertext_from_bytes(&self, bytes: &[u8]) -> Result<Ciphertext> {
        let width = self.ciphertext_width();
        if bytes.len() != width + 12 {
            return Err(Error::Decode("ciphertext has the wrong length"));
        }
        let declared = u32::from_be_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
        if declared != width {
            return Err(Error::Decode("ciphertext length prefix mismatch"));
        }
        let value = BigUint::from_bytes_be(&bytes[4..4 + width]);
        let fingerprint: Fingerprint = bytes[4 + width..].try_into().expect("8 bytes");
        if fingerprint != self.fingerprint {
            return Err(Error::KeyMismatch);
        }
        if value.is_zero() || value >= self.n_squared || !value.gcd(&self.n).is_one() {
            return Err(Error::Decode("ciphertext outside the ciphertext space"));
        }
        Ok(Ciphertext { value, fingerprint })
    }

    /// Encoded size of one ciphertext.
    pub fn ciphertext_len(&self) -> usize {
        self.ciphertext_width() + 12
    }
}

impl SecretKey {
    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn dec(&self, c: &Ciphertext) -> Result<BigUint> {
        self.public.check(c)?;
        metrics::count_ahe();
        let mp = self.p.dec(&(&c.value % &self.p.squared));
        let mq = self.q.dec(&(&c.value % &self.q.squared));
        Ok(crt(&mp, &mq, &self.q.prime, &self.p.prime, &self.q_inv_p))
    }

    /// Encryption by the key owner; same distribution as [`PublicKey::enc`]
    /// but computes `r^N` modulo each prime square.
    pub fn enc<R: RngCore + CryptoRng + ?Sized>(&self, m: &BigUint, rng: &mut R) -> Result<Ciphertext> {
        let pk = &self.public;
        if m >= &pk.n {
            return Err(Error::PlaintextRange);
        }
        metrics::count_ahe();
        let r = pk.randomness(rng);
        let rp = (&r % &self.p.squared).modpow(&self.p.n_reduced, &self.p.squared);
        let rq = (&r % &self.q.squared).modpow(&self.q.n_reduced, &self.q.squared);
        let r_to_n = crt(&rp, &rq, &self.q.squared, &self.p.squared, &self.q2_inv_p2);
        Ok(pk.assemble(m, &r_to_n))
    }
}

/// The `x` modulo `a * b` with `x = xa mod a`, `x = xb mod b`, given `b^-1 mod a`.
fn crt(xa: &BigUint, xb: &BigUint, b: &BigUint, a: &BigUint, b_inv_a: &BigUint) -> BigUint {
    let diff = (xa + a - xb % a) % a;
    xb + b * (diff * b_inv_a % a)
}

/// Per-base tables `base^0 .. base^(2^width - 1)` in Montgomery form.
struct WindowTables {
    ctx: Montgomery,
    width: u64,
    tables: Vec<Vec<Residue>>,
}

impl WindowTables {
    /// Picks the width that minimises table building plus window
    /// multiplications for `columns` exponent vectors of `bits` bits.
    fn new(bases: &[&BigUint], m: &BigUint, columns: usize, bits: u64) -> Self {
        let cost = |w: u64| {
            let build = bases.len() as u64 * ((1 << w) - 2);
            build + columns as u64 * bits.div_ceil(w) * (bases.len() as u64 + w)
        };
        let width = (1..=8).min_by_key(|&w| cost(w)).expect("nonempty range");
        let ctx = Montgomery::new(m);
        let one = ctx.to_residue(&BigUint::one());
        let tables = bases
            .iter()
            .map(|&b| {
                let mut t = Vec::with_capacity(1 << width);
                t.push(one.clone());
                t.push(ctx.to_residue(&(b % m)));
                for i in 2..(1usize << width) {
                    let next = ctx.mul(&t[i - 1], &t[1]);
                    t.push(next);
                }
                t
            })
            .collect();
        WindowTables { ctx, width, tables }
    }

    /// `prod bases[i]^exps[i] mod m` with shared squarings.
    fn multi_pow(&self, exps: &[BigUint]) -> BigUint {
        let (ctx, width) = (&self.ctx, self.width);
        let bits = exps.iter().map(|e| e.bits()).max().unwrap_or(0);
        let mut acc: Option<Residue> = None;
        for w in (0..bits.div_ceil(width)).rev() {
            if let Some(a) = acc.as_mut() {
                for _ in 0..width {
                    *a = ctx.mul(a, a);
                }
            }
            for (table, e) in self.tables.iter().zip(exps) {
                let digit = (0..width).filter(|k| e.bit(w * width + k)).fold(0, |d, k| d | 1 << k);
                if digit != 0 {
                    acc = Some(match acc {
                        Some(a) => ctx.mul(&a, &table[digit]),
                        None => table[digit].clone(),
                    });
                }
            }
        }
        acc.map_or_else(BigUint::one, |a| ctx.to_uint(&a))
    }
}

/// Component-wise encryption of the indicator vector of `index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneHotCipherVector {
    slots: Vec<Ciphertext>,
    fingerprint: Fingerprint,
}

impl OneHotCipherVector {
    pub fn new<R: RngCore + CryptoRng + ?Sized>(
        pk: &PublicKey,
        len: usize,
        index: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Self::build(pk, len, index, |bit| pk.enc(bit, rng))
    }

    /// As [`OneHotCipherVector::new`], encrypting under the caller's own key.
    pub fn new_with_secret<R: RngCore + CryptoRng + ?Sized>(
        sk: &SecretKey,
        len: usize,
        index: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Self::build(&sk.public, len, index, |bit| sk.enc(bit, rng))
    }

    fn build(
        pk: &PublicKey,
        len: usize,
        index: usize,
        mut enc: impl FnMut(&BigUint) -> Result<Ciphertext>,
    ) -> Result<Self> {
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
        let mut slots = Vec::with_capacity(len);
        for t in 0..len {
            let bit = if t == index { BigUint::one() } else { BigUint::zero() };
            slots.push(enc(&bit)?);
        }
        Ok(OneHotCipherVector { slots, fingerprint: pk.fingerprint })
    }

    pub fn from_slots(pk: &PublicKey, slots: Vec<Ciphertext>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::Precondition("one-hot vector must not be empty"));
        }
        for c in &slots {
            pk.check(c)?;
        }
        Ok(OneHotCipherVector { slots, fingerprint: pk.fingerprint })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Ciphertext] {
        &self.slots
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    /// `sum_t scalars[t] * w[t]`: the plaintext scalars multiply the
    /// encrypted selection bits, so the result encrypts `scalars[index]`.
    pub fn dot(&self, pk: &PublicKey, scalars: &[BigUint]) -> Result<Ciphertext> {
        let mut out = self.dot_many(pk, &[scalars])?;
        Ok(out.pop().expect("one column"))
    }

    /// [`OneHotCipherVector::dot`] for several scalar columns at once,
    /// sharing the per-slot precomputation.
    pub fn dot_many(&self, pk: &PublicKey, columns: &[&[BigUint]]) -> Result<Vec<Ciphertext>> {
        if self.fingerprint != pk.fingerprint {
            return Err(Error::KeyMismatch);
        }
        for scalars in columns {
            if scalars.len() != self.slots.len() {
                return Err(Error::Precondition("scalar vector length differs from the one-hot vector"));
            }
            if let Some(big) = scalars.iter().find(|k| *k >= pk.n()) {
                return Err(Error::Capacity { bits: big.bits(), capacity: pk.plaintext_bits() - 1 });
            }
        }
        let bases: Vec<&BigUint> = self.slots.iter().map(|c| &c.value).collect();
        let bits = columns.iter().flat_map(|c| c.iter()).map(BigUint::bits).max().unwrap_or(0);
        let tables = WindowTables::new(&bases, &pk.n_squared, columns.len(), bits);
        let out = columns
            .iter()
            .map(|scalars| {
                // One scaling and one addition per slot, evaluated as a single multi-exponentiation.
                for _ in 0..2 * scalars.len() {
                    metrics::count_ahe();
                }
                Ciphertext { value: tables.multi_pow(scalars), fingerprint: pk.fingerprint }
            })
            .collect();
        Ok(out)
    }
}
