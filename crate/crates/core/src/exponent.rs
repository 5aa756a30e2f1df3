use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Arbitrary-precision nonnegative exponent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Exponent(BigUint);

impl Exponent {
    pub fn zero() -> Self {
        Self(BigUint::zero())
    }

    pub fn one() -> Self {
        Self(BigUint::one())
    }

    /// `10^digits`.
    pub fn pow10(digits: u32) -> Self {
        Self(BigUint::from(10u32).pow(digits))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Bit length; zero has length 0.
    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    pub fn bit(&self, i: u64) -> bool {
        self.0.bit(i)
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        u64::try_from(&self.0).ok()
    }

    /// Number of decimal digits.
    pub fn digits(&self) -> usize {
        self.0.to_str_radix(10).len()
    }

    /// Uniform draw from the inclusive range `[lo, hi]`.
    pub fn sample_range<R: Rng + ?Sized>(lo: &Self, hi: &Self, rng: &mut R) -> Result<Self> {
        if lo > hi {
            return Err(Error::Unsupported(format!(
                "empty exponent range [{lo}, {hi}]"
            )));
        }
        let upper = &hi.0 + 1u32;
        Ok(Self(rng.gen_biguint_range(&lo.0, &upper)))
    }
}

impl From<u64> for Exponent {
    fn from(v: u64) -> Self {
        Self(BigUint::from(v))
    }
}

impl From<BigUint> for Exponent {
    fn from(v: BigUint) -> Self {
        Self(v)
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Plain decimal digits, or `1eD` / `10^D` for a power of ten.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let power = s.strip_prefix("1e").or_else(|| s.strip_prefix("10^"));
        if let Some(d) = power {
            let d: u32 = d
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent {s:?}")))?;
            return Ok(Self::pow10(d));
        }
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad exponent {s:?}")));
        }
        BigUint::parse_bytes(s.as_bytes(), 10)
            .map(Self)
            .ok_or_else(|| Error::Parse(format!("bad exponent {s:?}")))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Mul for &Exponent {
    type Output = Exponent;
    fn mul(self, rhs: Self) -> Exponent {
        Exponent(&self.0 * &rhs.0)
    }
}
