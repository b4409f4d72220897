use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand_core::{CryptoRng, RngCore};

use super::hash::shake256;
use super::prime::{is_probable_prime, jacobi, next_sophie_germain};
use super::rng::random_below;
use crate::error::{Error, Result};
use crate::metrics;

const DEFAULT_BUDGET: usize = 1 << 24;

/// An element of the order-`q` subgroup of quadratic residues mod `p`.
///
/// Values of this type are only produced by validated constructors or by
/// group operations, so they are always subgroup members.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(BigUint);

impl GroupElement {
    pub fn as_uint(&self) -> &BigUint {
        &self.0
    }
}

/// An exponent in `Z_q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(BigUint);

impl Exponent {
    pub fn as_uint(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// Public group parameters `(p, q, g, C)`: `p = 2q + 1` is a safe prime,
/// `g` generates the order-`q` subgroup and `C` is a subgroup element whose
/// discrete logarithm nobody knows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams {
    p: BigUint,
    q: BigUint,
    g: GroupElement,
    c: GroupElement,
    width: usize,
}

/// Deterministically generates group parameters.
///
/// The subgroup order `q` is the first Sophie Germain prime at or above
/// `2^(bits-1) | seed`, where the seed is read as a big-endian integer
/// reduced below `2^(bits-1)`. So `q` has exactly `bits` bits and `p`
/// has `bits + 1`.
pub fn gen_group(bits: usize, seed: &[u8]) -> Result<GroupParams> {
    gen_group_with_budget(bits, seed, DEFAULT_BUDGET)
}

pub fn gen_group_with_budget(bits: usize, seed: &[u8], budget: usize) -> Result<GroupParams> {
    if bits < 8 {
        return Err(Error::Precondition("group_bits must be at least 8"));
    }
    let top = BigUint::one() << (bits - 1);
    let offset = BigUint::from_bytes_be(seed) % &top;
    let start = &top | &offset;
    let q = next_sophie_germain(&start, bits as u64, budget)?;
    let p = (&q << 1u32) + 1u32;
    GroupParams::with_generator(p, q, BigUint::from(4u32))
}

impl GroupParams {
    /// Validates a safe prime `p` and generator `g`, then derives `C`.
    pub fn new(p: BigUint, g: BigUint) -> Result<Self> {
        if p < BigUint::from(7u32) || !is_probable_prime(&p) {
            return Err(Error::Precondition("p must be a prime of at least 7"));
        }
        let q = (&p - 1u32) >> 1u32;
        if !is_probable_prime(&q) {
            return Err(Error::Precondition("p must be a safe prime"));
        }
        GroupParams::with_generator(p, q, g)
    }

    /// Rebuilds parameters from all four values, checking every invariant.
    pub fn from_parts(p: BigUint, q: BigUint, g: BigUint, c: BigUint) -> Result<Self> {
        let params = GroupParams::new(p, g)?;
        if params.q != q {
            return Err(Error::Precondition("q must equal (p - 1) / 2"));
        }
        let c = params.element(c)?;
        if c.0.is_one() {
            return Err(Error::Precondition("C must not be the identity"));
        }
        Ok(GroupParams { c, ..params })
    }

    fn with_generator(p: BigUint, q: BigUint, g: BigUint) -> Result<Self> {
        let width = p.bits().div_ceil(8) as usize;
        let mut params = GroupParams {
            g: GroupElement(BigUint::one()),
            c: GroupElement(BigUint::one()),
            p,
            q,
            width,
        };
        let g = params.element(g)?;
        if g.0.is_one() {
            return Err(Error::Precondition("generator must not be the identity"));
        }
        params.g = g;
        let mut label = Vec::from(&b"oblivis-C"[..]);
        label.extend_from_slice(&encode_uint(&params.p));
        label.extend_from_slice(&encode_uint(&params.g.0));
        params.c = params.hash_to_subgroup(&label);
        Ok(params)
    }

    /// Safe-prime group from RFC 3526 (2048-bit MODP), with `g = 4`.
    pub fn modp_2048() -> Self {
        let p = BigUint::parse_bytes(MODP_2048_HEX.as_bytes(), 16).expect("static constant");
        let q = (&p - 1u32) >> 1u32;
        GroupParams::with_generator(p, q, BigUint::from(4u32)).expect("static constant")
    }

    /// The test-profile group: `gen_group(512, b"oblivis-test-profile")`.
    pub fn test_profile() -> Self {
        let p = BigUint::parse_bytes(TEST_512_HEX.as_bytes(), 16).expect("static constant");
        let q = (&p - 1u32) >> 1u32;
        GroupParams::with_generator(p, q, BigUint::from(4u32)).expect("static constant")
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn g(&self) -> &GroupElement {
        &self.g
    }

    pub fn c(&self) -> &GroupElement {
        &self.c
    }

    /// Byte width of an encoded element.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Checks subgroup membership: `0 < x < p` and `x` is a quadratic residue.
    pub fn element(&self, x: BigUint) -> Result<GroupElement> {
        if x.is_zero() || x >= self.p || jacobi(&x, &self.p) != 1 {
            return Err(Error::NotInSubgroup);
        }
        Ok(GroupElement(x))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(BigUint::one())
    }

    pub fn exponent(&self, x: BigUint) -> Exponent {
        Exponent(x % &self.q)
    }

    pub fn random_exponent<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> Exponent {
        Exponent(random_below(rng, &self.q))
    }

    pub fn random_nonzero_exponent<R: RngCore + CryptoRng + ?Sized>(&self, rng: &mut R) -> Exponent {
        loop {
            let e = self.random_exponent(rng);
            if !e.is_zero() {
                return e;
            }
        }
    }

    pub fn exp_add(&self, a: &Exponent, b: &Exponent) -> Exponent {
        Exponent((&a.0 + &b.0) % &self.q)
    }

    pub fn exp_neg(&self, a: &Exponent) -> Exponent {
        Exponent((&self.q - &a.0) % &self.q)
    }

    pub fn exp_sub(&self, a: &Exponent, b: &Exponent) -> Exponent {
        self.exp_add(a, &self.exp_neg(b))
    }

    /// `base^e mod p`.
    pub fn exp(&self, base: &GroupElement, e: &Exponent) -> GroupElement {
        metrics::count_exp();
        GroupElement(base.0.modpow(&e.0, &self.p))
    }

    /// `base^e mod p` for an unvalidated base; the exponent is reduced mod `q`.
    pub fn group_exp(&self, base: &BigUint, exponent: &BigUint) -> Result<GroupElement> {
        let base = self.element(base.clone())?;
        Ok(self.exp(&base, &self.exponent(exponent.clone())))
    }

    pub fn pow_g(&self, e: &Exponent) -> GroupElement {
        self.exp(&self.g, e)
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        metrics::count_mul();
        GroupElement(&a.0 * &b.0 % &self.p)
    }

    /// `a^-1 = a^(q-1)`.
    pub fn invert(&self, a: &GroupElement) -> GroupElement {
        self.exp(a, &Exponent(&self.q - 1u32))
    }

    /// `a / b`.
    pub fn div(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.mul(a, &self.invert(b))
    }

    /// `a / g^e`, computed as `a * g^(q - e)`.
    pub fn div_pow_g(&self, a: &GroupElement, e: &Exponent) -> GroupElement {
        self.mul(a, &self.pow_g(&self.exp_neg(e)))
    }

    /// Hashes `label` into `Z_p` and squares, landing in the subgroup
    /// without revealing a discrete logarithm.
    pub fn hash_to_subgroup(&self, label: &[u8]) -> GroupElement {
        let mut counter = 0u32;
        loop {
            let bytes = shake256(&[b"oblivis-h2g", &counter.to_be_bytes(), label], self.width + 16);
            let x = BigUint::from_bytes_be(&bytes) % &self.p;
            let c = &x * &x % &self.p;
            if !c.is_zero() && !c.is_one() {
                return GroupElement(c);
            }
            counter += 1;
        }
    }

    /// Fixed-width big-endian encoding.
    pub fn element_bytes(&self, e: &GroupElement) -> Vec<u8> {
        fixed_width(&e.0, self.width)
    }

    pub fn element_from_bytes(&self, bytes: &[u8]) -> Result<GroupElement> {
        if bytes.len() != self.width {
            return Err(Error::Decode("group element has the wrong width"));
        }
        self.element(BigUint::from_bytes_be(bytes))
    }

    pub fn exponent_bytes(&self, e: &Exponent) -> Vec<u8> {
        fixed_width(&e.0, self.q.bits().div_ceil(8) as usize)
    }

    pub fn exponent_from_bytes(&self, bytes: &[u8]) -> Result<Exponent> {
        let x = BigUint::from_bytes_be(bytes);
        if x >= self.q {
            return Err(Error::Decode("exponent not reduced mod q"));
        }
        Ok(Exponent(x))
    }
}

pub(crate) fn fixed_width(x: &BigUint, width: usize) -> Vec<u8> {
    let raw = x.to_bytes_be();
    let raw: &[u8] = if x.is_zero() { &[] } else { &raw };
    assert!(raw.len() <= width, "integer wider than its slot");
    let mut out = alloc::vec![0u8; width - raw.len()];
    out.extend_from_slice(raw);
    out
}

/// 4-byte big-endian length followed by the minimal big-endian bytes.
pub(crate) fn encode_uint(x: &BigUint) -> Vec<u8> {
    let raw = if x.is_zero() { Vec::new() } else { x.to_bytes_be() };
    let mut out = (raw.len() as u32).to_be_bytes().to_vec();
    out.extend_from_slice(&raw);
    out
}

const MODP_2048_HEX: &str = concat!(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1",
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD",
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245",
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED",
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D",
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F",
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D",
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B",
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9",
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510",
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF",
);

const TEST_512_HEX: &str = concat!(
    "1000000000000000000000000000000000000000000000000000000000000000",
    "0000000000000000000000000DEC4D8D2ECD2E65AE8CAE6E85AE0E4DECCDE776B",
);
