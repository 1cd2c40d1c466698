//! Exact rational arithmetic for rates, capacities, and distances.
//!
//! Every rate in this crate is a ratio of retrieved bits to downloaded bits,
//! and capacity comparisons are exact, so rationals are never approximated by
//! floats except for display.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Sub};
use thiserror::Error;

use crate::model::SchemeParams;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RateError {
    #[error("denominator must be nonzero")]
    ZeroDenominator,
}

/// Reduced ratio of arbitrary-precision integers with positive denominator.
///
/// Backed by [`num_rational::BigRational`], which keeps values in lowest
/// terms with the sign on the numerator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numerator: i64, denominator: i64) -> Result<Self, RateError> {
        if denominator == 0 {
            return Err(RateError::ZeroDenominator);
        }
        Ok(Self(BigRational::new(
            BigInt::from(numerator),
            BigInt::from(denominator),
        )))
    }

    /// Ratio of two counts; the usual entry point for rate accounting.
    pub fn from_counts(numerator: u64, denominator: u64) -> Result<Self, RateError> {
        if denominator == 0 {
            return Err(RateError::ZeroDenominator);
        }
        Ok(Self(BigRational::new(
            BigInt::from(numerator),
            BigInt::from(denominator),
        )))
    }

    pub fn from_integer(value: u64) -> Self {
        Self(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Multiplicative inverse; errors on zero.
    pub fn recip(&self) -> Result<Self, RateError> {
        if self.0.is_zero() {
            return Err(RateError::ZeroDenominator);
        }
        Ok(Self(self.0.recip()))
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Human-facing form: `p/q (≈ d)` with six decimal places.
    pub fn display_with_decimal(&self) -> String {
        format!("{} (≈ {:.6})", self, self.to_f64())
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl Add for ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: ExactRational) -> ExactRational {
        ExactRational(self.0 + rhs.0)
    }
}

impl Sub for ExactRational {
    type Output = ExactRational;
    fn sub(self, rhs: ExactRational) -> ExactRational {
        ExactRational(self.0 - rhs.0)
    }
}

/// Maximum retrieval rate for `K` messages on `N` databases:
/// `(1 + 1/N + 1/N² + … + 1/N^{K-1})^{-1}`.
///
/// Computed as the exact geometric sum, which also covers N = 1 (where the
/// sum has K unit terms, giving 1/K). For N ≥ 2 this reduces to the closed
/// form `N^{K-1}(N-1) / (N^K - 1)`.
pub fn capacity(params: SchemeParams) -> ExactRational {
    let n = BigInt::from(params.databases);
    let mut sum = BigRational::zero();
    let mut power = BigInt::one();
    for _ in 0..params.messages {
        sum += BigRational::new(BigInt::one(), power.clone());
        power *= &n;
    }
    ExactRational(sum.recip())
}

/// The trivially achievable rate floor `1 - 1/N` that any capacity result
/// must meet or beat.
pub fn capacity_lower_bound(databases: usize) -> ExactRational {
    ExactRational(
        BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(databases.max(1))),
    )
}
