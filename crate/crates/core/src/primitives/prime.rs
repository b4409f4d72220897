//! Primality testing and prime generation over `BigUint`.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand_core::{CryptoRng, RngCore};

use super::hash::shake256;
use super::rng::random_bytes;
use crate::error::{Error, Result};

const SIEVE_LIMIT: usize = 1 << 14;
const MR_ROUNDS: usize = 32;

pub(crate) fn small_primes() -> Vec<u32> {
    let mut composite = alloc::vec![false; SIEVE_LIMIT];
    let mut primes = Vec::new();
    for i in 2..SIEVE_LIMIT {
        if !composite[i] {
            primes.push(i as u32);
            let mut j = i * i;
            while j < SIEVE_LIMIT {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Miller–Rabin with witnesses derived by hashing `n`, so the answer is a
/// deterministic function of `n`.
pub fn is_probable_prime(n: &BigUint) -> bool {
    is_probable_prime_rounds(n, MR_ROUNDS)
}

fn is_probable_prime_rounds(n: &BigUint, rounds: usize) -> bool {
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return false;
        }
        if small < 4 {
            return true;
        }
    }
    if n.is_even() {
        return false;
    }
    for p in [3u32, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let shift = n_minus_1.trailing_zeros().expect("n > 1");
    let d = &n_minus_1 >> shift;
    let n_bytes = n.to_bytes_be();
    let span = n - 3u32;
    for i in 0..rounds {
        let seed = shake256(&[b"oblivis-mr", &(i as u32).to_be_bytes(), &n_bytes], n_bytes.len() + 8);
        let a = BigUint::from_bytes_be(&seed) % &span + 2u32;
        if !witness_passes(&a, &d, shift, n, &n_minus_1) {
            return false;
        }
    }
    true
}

fn witness_passes(a: &BigUint, d: &BigUint, shift: u64, n: &BigUint, n_minus_1: &BigUint) -> bool {
    let mut x = a.modpow(d, n);
    if x.is_one() || &x == n_minus_1 {
        return true;
    }
    for _ in 1..shift {
        x = &x * &x % n;
        if &x == n_minus_1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

/// Fermat test to base 2; a cheap filter ahead of Miller–Rabin.
fn fermat_base2(n: &BigUint) -> bool {
    BigUint::from(2u32).modpow(&(n - 1u32), n).is_one()
}

/// Smallest `q >= start` (stepping by 2 from the first odd value) such that
/// `q` and `2q + 1` are both prime and `q` has at most `max_bits` bits.
pub(crate) fn next_sophie_germain(start: &BigUint, max_bits: u64, budget: usize) -> Result<BigUint> {
    let primes = small_primes();
    let mut q = start | BigUint::one();
    let mut residues: Vec<u32> = primes.iter().map(|&l| (&q % l).to_u32().expect("< l")).collect();
    for _ in 0..budget {
        if q.bits() > max_bits {
            break;
        }
        let q_small = q.to_u64();
        let sieved = primes.iter().zip(&residues).all(|(&l, &r)| {
            let l64 = l as u64;
            let q_ok = r != 0 || q_small == Some(l64);
            let p_res = (2 * r as u64 + 1) % l64;
            let p_ok = p_res != 0 || q_small.and_then(|q| q.checked_mul(2)).map(|d| d + 1) == Some(l64);
            q_ok && p_ok
        });
        if sieved && q > BigUint::one() {
            let p = (&q << 1u32) + 1u32;
            if fermat_base2(&q) && fermat_base2(&p) && is_probable_prime(&q) && is_probable_prime(&p) {
                return Ok(q);
            }
        }
        q += 2u32;
        for (r, &l) in residues.iter_mut().zip(&primes) {
            *r = (*r + 2) % l;
        }
    }
    Err(Error::PrimeBudget(budget))
}

/// Random prime of exactly `bits` bits with the top two bits set, so the
/// product of two such primes has exactly `2 * bits` bits.
pub fn random_prime<R: RngCore + CryptoRng + ?Sized>(rng: &mut R, bits: u64, budget: usize) -> Result<BigUint> {
    if bits < 8 {
        return Err(Error::Precondition("prime must have at least 8 bits"));
    }
    let primes = small_primes();
    let len = bits.div_ceil(8) as usize;
    let excess = len as u64 * 8 - bits;
    for _ in 0..budget {
        let mut buf = random_bytes(rng, len);
        buf[0] &= 0xFF >> excess;
        let mut candidate = BigUint::from_bytes_be(&buf);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(bits - 2, true);
        candidate.set_bit(0, true);
        if primes.iter().any(|&l| {
            let l = BigUint::from(l);
            (&candidate % &l).is_zero() && candidate != l
        }) {
            continue;
        }
        if fermat_base2(&candidate) && is_probable_prime(&candidate) {
            return Ok(candidate);
        }
    }
    Err(Error::PrimeBudget(budget))
}

/// Jacobi symbol `(a / n)` for odd positive `n`.
pub fn jacobi(a: &BigUint, n: &BigUint) -> i8 {
    assert!(n.is_odd(), "jacobi needs an odd modulus");
    let mut a = a % n;
    let mut n = n.clone();
    let mut t = 1i8;
    while !a.is_zero() {
        let zeros = a.trailing_zeros().unwrap_or(0);
        if zeros > 0 {
            a >>= zeros;
            let n_mod_8 = (&n % 8u32).to_u8().expect("< 8");
            if zeros % 2 == 1 && (n_mod_8 == 3 || n_mod_8 == 5) {
                t = -t;
            }
        }
        core::mem::swap(&mut a, &mut n);
        if (&a % 4u32) == BigUint::from(3u32) && (&n % 4u32) == BigUint::from(3u32) {
            t = -t;
        }
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}
