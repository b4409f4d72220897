use crate::error::{Error, Result};

/// A length in bits that is a whole number of bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitLength(usize);

impl BitLength {
    pub fn new(bits: usize) -> Result<Self> {
        if !bits.is_multiple_of(8) {
            return Err(Error::Precondition("bit length must be a multiple of 8"));
        }
        Ok(BitLength(bits))
    }

    pub const fn from_bytes(bytes: usize) -> Self {
        BitLength(bytes * 8)
    }

    pub const fn bits(self) -> usize {
        self.0
    }

    pub const fn bytes(self) -> usize {
        self.0 / 8
    }
}

/// Session-wide lengths: tag length `lambda`, maximum message length
/// `sigma` and the bit length of the subgroup order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionConfig {
    pub lambda: BitLength,
    pub sigma: BitLength,
    pub group_bits: usize,
}

/// Bytes taken by the length prefix of a padded message.
pub(crate) const LENGTH_PREFIX: usize = 4;

impl SessionConfig {
    pub fn new(lambda_bits: usize, sigma_bits: usize, group_bits: usize) -> Result<Self> {
        let lambda = BitLength::new(lambda_bits)?;
        let sigma = BitLength::new(sigma_bits)?;
        if lambda_bits < 8 {
            return Err(Error::Precondition("lambda must be at least 8 bits"));
        }
        if sigma.bytes() <= LENGTH_PREFIX {
            return Err(Error::Precondition("sigma must leave room for the 4-byte length prefix"));
        }
        if group_bits < 8 {
            return Err(Error::Precondition("group_bits must be at least 8"));
        }
        Ok(SessionConfig { lambda, sigma, group_bits })
    }

    /// lambda = 32, sigma = 256, 512-bit subgroup order.
    pub fn test_profile() -> Self {
        SessionConfig::new(32, 256, 512).expect("static profile")
    }

    /// lambda = 128, sigma = 256, 2048-bit modulus.
    pub fn production_profile() -> Self {
        SessionConfig::new(128, 256, 2047).expect("static profile")
    }

    pub fn with_sigma(self, sigma_bits: usize) -> Result<Self> {
        SessionConfig::new(self.lambda.bits(), sigma_bits, self.group_bits)
    }

    /// Longest message that fits a padded slot.
    pub fn message_capacity(&self) -> usize {
        self.sigma.bytes() - LENGTH_PREFIX
    }

    /// Byte length of a tagged slot, `pad(m) || r3`.
    pub fn tagged_len(&self) -> usize {
        self.sigma.bytes() + self.lambda.bytes()
    }

    /// Paillier plaintext size for values up to `modulus_bits` wide:
    /// `max(modulus_bits, sigma + lambda) + 8`, rounded up to an even count
    /// so both primes have the same size.
    pub fn ahe_plaintext_bits(&self, modulus_bits: u64) -> u64 {
        let widest = core::cmp::max(modulus_bits, (self.sigma.bits() + self.lambda.bits()) as u64);
        let bits = widest + 8;
        bits + (bits & 1)
    }
}
