//! Locating a point of `[0, 1)` by nested bisection.
//!
//! Bit `i` of σ is 1 when the point lies in the upper half of the current
//! interval. Intervals are closed below and open above, so σ is exactly the
//! binary expansion and a dyadic boundary point belongs to the upper half.

use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::dyadic::Dyadic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SigmaError {
    #[error("point {0} is outside [0, 1)")]
    OutOfRange(Dyadic),
    #[error("oracle answers contradict each other at level {level}")]
    InconsistentOracle { level: usize },
    #[error("oracle gave no answer at level {level}")]
    OracleSilent { level: usize },
}

/// `[low, low + 2^-log2_inv_width)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DyadicInterval {
    pub low: Dyadic,
    pub log2_inv_width: u32,
}

impl DyadicInterval {
    pub fn unit() -> Self {
        Self {
            low: Dyadic::zero(),
            log2_inv_width: 0,
        }
    }

    pub fn width(&self) -> Dyadic {
        Dyadic::pow2_neg(self.log2_inv_width)
    }

    pub fn high(&self) -> Dyadic {
        &self.low + &self.width()
    }

    pub fn midpoint(&self) -> Dyadic {
        &self.low + &Dyadic::pow2_neg(self.log2_inv_width + 1)
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.low <= x && x < &self.high()
    }

    pub fn lower_half(&self) -> Self {
        Self {
            low: self.low.clone(),
            log2_inv_width: self.log2_inv_width + 1,
        }
    }

    pub fn upper_half(&self) -> Self {
        Self {
            low: self.midpoint(),
            log2_inv_width: self.log2_inv_width + 1,
        }
    }
}

impl std::fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {})", self.low, self.high())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SigmaEncoding {
    pub bits: BitString,
    pub interval: DyadicInterval,
}

impl SigmaEncoding {
    /// The interval a bitstring names.
    pub fn from_bits(bits: BitString) -> Self {
        let interval = bits.iter().fold(DyadicInterval::unit(), |iv, b| {
            if b == 1 {
                iv.upper_half()
            } else {
                iv.lower_half()
            }
        });
        Self { bits, interval }
    }
}

pub fn sigma_encode(x: &Dyadic, n: usize) -> Result<SigmaEncoding, SigmaError> {
    if x >= &Dyadic::one() {
        return Err(SigmaError::OutOfRange(x.clone()));
    }
    let mut interval = DyadicInterval::unit();
    let mut bits = BitString::with_capacity(n);
    for _ in 0..n {
        if x >= &interval.midpoint() {
            bits.push(1);
            interval = interval.upper_half();
        } else {
            bits.push(0);
            interval = interval.lower_half();
        }
    }
    Ok(SigmaEncoding { bits, interval })
}

/// A dichotomic measurement source: "is the system in this half of the
/// interval?".
pub trait HalfSpaceOracle {
    fn in_upper_half(&mut self, interval: &DyadicInterval) -> Option<bool>;

    /// The orthogonal question. Defaults to the negation of
    /// [`HalfSpaceOracle::in_upper_half`].
    fn in_lower_half(&mut self, interval: &DyadicInterval) -> Option<bool> {
        self.in_upper_half(interval).map(|up| !up)
    }
}

/// Answers from a hidden point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiddenPoint(pub Dyadic);

impl HalfSpaceOracle for HiddenPoint {
    fn in_upper_half(&mut self, interval: &DyadicInterval) -> Option<bool> {
        Some(interval.upper_half().contains(&self.0))
    }

    fn in_lower_half(&mut self, interval: &DyadicInterval) -> Option<bool> {
        Some(interval.lower_half().contains(&self.0))
    }
}

/// Answers level `i` with bit `i` of a stream, i.e. a hidden point whose
/// binary expansion is the stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStreamPoint(pub BitString);

impl HalfSpaceOracle for BitStreamPoint {
    fn in_upper_half(&mut self, interval: &DyadicInterval) -> Option<bool> {
        self.0.get(interval.log2_inv_width as usize).map(|b| b == 1)
    }
}

/// Localizes the oracle's hidden state to `n` bits, asking at every level
/// both the half-space question and its orthogonal complement.
pub fn localize(oracle: &mut impl HalfSpaceOracle, n: usize) -> Result<SigmaEncoding, SigmaError> {
    let mut interval = DyadicInterval::unit();
    let mut bits = BitString::with_capacity(n);
    for level in 0..n {
        let up = oracle
            .in_upper_half(&interval)
            .ok_or(SigmaError::OracleSilent { level })?;
        let down = oracle
            .in_lower_half(&interval)
            .ok_or(SigmaError::OracleSilent { level })?;
        if up == down {
            return Err(SigmaError::InconsistentOracle { level });
        }
        bits.push(up as u8);
        interval = if up {
            interval.upper_half()
        } else {
            interval.lower_half()
        };
    }
    Ok(SigmaEncoding { bits, interval })
}
