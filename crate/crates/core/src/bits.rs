//! Plain bitstrings used for programs, machine output, and σ encodings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit character {found:?} at position {position}")]
pub struct BitParseError {
    pub position: usize,
    pub found: char,
}

/// An MSB-first string of bits, stored one bit per byte.
///
/// Text form is a run of ASCII `'0'`/`'1'`; whitespace is ignored when
/// parsing. Ordering is (length, lexicographic), which is the canonical
/// enumeration order for programs.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn with_capacity(n: usize) -> Self {
        Self(Vec::with_capacity(n))
    }

    /// Builds from 0/1 values. Any nonzero byte counts as a 1.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        Self(bits.into_iter().map(|b| (b != 0) as u8).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The low `width` bits of `value`, most significant first.
    pub fn from_uint(value: u64, width: usize) -> Self {
        Self(
            (0..width)
                .rev()
                .map(|i| if i < 64 { ((value >> i) & 1) as u8 } else { 0 })
                .collect(),
        )
    }

    /// Interprets the bits as an unsigned integer (MSB first).
    ///
    /// Only meaningful for strings of at most 64 bits.
    pub fn to_uint(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push((bit != 0) as u8);
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.0.get(i).copied()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    pub fn prefix(&self, n: usize) -> BitString {
        Self(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len() < other.len() && other.0.starts_with(&self.0)
    }

    pub fn truncate(&mut self, n: usize) {
        self.0.truncate(n);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = BitParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for (position, c) in s.chars().enumerate() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_whitespace() => {}
                found => return Err(BitParseError { position, found }),
            }
        }
        Ok(Self(bits))
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromIterator<u8> for BitString {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Self::from_bits(iter)
    }
}
