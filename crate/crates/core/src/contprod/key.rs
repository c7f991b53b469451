use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational position in a linearly ordered index set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderKey(BigRational);

impl OrderKey {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::Invalid("order key with zero denominator".into()));
        }
        Ok(Self(BigRational::new(numer.into(), denom)))
    }

    pub fn integer(n: i64) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Self(r)
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Strictly between `self` and `other` when they differ.
    pub fn midpoint(&self, other: &Self) -> Self {
        Self((&self.0 + &other.0) / BigRational::from_integer(2.into()))
    }

    pub fn plus_one(&self) -> Self {
        Self(&self.0 + BigRational::one())
    }

    pub fn minus_one(&self) -> Self {
        Self(&self.0 - BigRational::one())
    }

    pub fn neg(&self) -> Self {
        Self(-&self.0)
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for OrderKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for OrderKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
