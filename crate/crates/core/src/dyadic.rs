//! Exact dyadic rationals `numerator / 2^k`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DyadicParseError {
    #[error("expected \"p/q\" or an integer, got {0:?}")]
    Malformed(String),
    #[error("denominator {0} is not a power of two")]
    NotDyadic(String),
}

/// A non-negative rational whose denominator is a power of two.
///
/// Always kept reduced: the numerator is odd, or the value is zero with
/// `log2_denominator == 0`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "DyadicRepr", try_from = "DyadicRepr")]
pub struct Dyadic {
    numerator: BigUint,
    log2_denominator: u32,
}

#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    numerator: String,
    log2_denominator: u32,
}

impl From<Dyadic> for DyadicRepr {
    fn from(d: Dyadic) -> Self {
        Self {
            numerator: d.numerator.to_string(),
            log2_denominator: d.log2_denominator,
        }
    }
}

impl TryFrom<DyadicRepr> for Dyadic {
    type Error = DyadicParseError;

    fn try_from(r: DyadicRepr) -> Result<Self, Self::Error> {
        let n = r
            .numerator
            .parse::<BigUint>()
            .map_err(|_| DyadicParseError::Malformed(r.numerator.clone()))?;
        Ok(Dyadic::new(n, r.log2_denominator))
    }
}

impl Dyadic {
    pub fn new(numerator: impl Into<BigUint>, log2_denominator: u32) -> Self {
        let mut d = Self {
            numerator: numerator.into(),
            log2_denominator,
        };
        d.reduce();
        d
    }

    pub fn zero() -> Self {
        Self::new(0u32, 0)
    }

    pub fn one() -> Self {
        Self::new(1u32, 0)
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Self::new(1u32, k)
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_denominator
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::one() << self.log2_denominator as usize
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Display-only approximation.
    pub fn to_f64(&self) -> f64 {
        let n = self.numerator.to_f64().unwrap_or(f64::INFINITY);
        n / 2f64.powi(self.log2_denominator as i32)
    }

    /// `self * 2^-k`.
    pub fn shr(&self, k: u32) -> Self {
        Self::new(self.numerator.clone(), self.log2_denominator + k)
    }

    /// Rescales the numerator to denominator `2^k`; `k` must be at least the
    /// reduced exponent.
    pub fn numerator_at(&self, k: u32) -> BigUint {
        assert!(k >= self.log2_denominator, "exponent too small for exact rescale");
        &self.numerator << (k - self.log2_denominator) as usize
    }

    fn reduce(&mut self) {
        if self.numerator.is_zero() {
            self.log2_denominator = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.log2_denominator as u64) as u32;
        if shift > 0 {
            self.numerator >>= shift as usize;
            self.log2_denominator -= shift;
        }
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let k = self.log2_denominator.max(rhs.log2_denominator);
        Dyadic::new(self.numerator_at(k) + rhs.numerator_at(k), k)
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let k = self.log2_denominator.max(other.log2_denominator);
        self.numerator_at(k).cmp(&other.numerator_at(k))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator())
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

impl FromStr for Dyadic {
    type Err = DyadicParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || DyadicParseError::Malformed(s.to_string());
        let (num, den) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num: BigUint = num.parse().map_err(|_| malformed())?;
        let den: BigUint = den.parse().map_err(|_| malformed())?;
        if den.is_zero() || (&den & (&den - 1u32)) != BigUint::zero() {
            return Err(DyadicParseError::NotDyadic(den.to_string()));
        }
        let k = den.trailing_zeros().unwrap_or(0) as u32;
        Ok(Dyadic::new(num, k))
    }
}
