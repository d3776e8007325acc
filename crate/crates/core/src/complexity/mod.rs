//! Brute-force Kolmogorov complexity over the reference machine.
//!
//! `K(ξ)` here is the length of the canonical-order first program that
//! halts within the step cap with output exactly `ξ`, searched exhaustively
//! up to a length bound. A step cap can only hide producers, so a reported
//! value is an upper bound on the machine's true `K` and an absent value
//! means only "nothing up to `search_max_bits` within the cap".
//!
//! Also home to the algorithm/oracle decomposition ([`edis`]) and the
//! bisection encoding of positions ([`sigma`]).

pub mod edis;
mod kernel;
pub mod sigma;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::hvm::{self, MachineConfig, Program};
use kernel::{Exit, Scratch};

/// Largest census length accepted by [`incompressibility_census`].
pub const MAX_CENSUS_N: usize = 12;

/// `DEC DEC [OUT DEC DEC] HALT`: 24 bits that print 127 zeros.
pub const ZERO_GENERATOR: &str = "001001101100001001110111";

// Prefix depth used to split each length level into parallel work units.
const SPLIT_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexityError {
    #[error("search_max_bits must be at least 3, got {0}")]
    SearchTooSmall(usize),
    #[error("step cap must be at least 1")]
    BudgetZero,
    #[error("census length {0} exceeds the supported maximum of {MAX_CENSUS_N}")]
    CensusTooLarge(usize),
    #[error("generator produced {produced} bits, {needed} needed")]
    GeneratorTooShort { produced: usize, needed: usize },
    #[error("generator did not halt within {0} steps")]
    GeneratorDidNotHalt(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum KStatus {
    Exact { k_bits: usize, witness: BitString },
    LowerBoundOnly { k_exceeds: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityRecord {
    pub target: BitString,
    pub status: KStatus,
    pub search_max_bits: usize,
    pub step_cap: u64,
}

impl ComplexityRecord {
    pub fn k_bits(&self) -> Option<usize> {
        match &self.status {
            KStatus::Exact { k_bits, .. } => Some(*k_bits),
            KStatus::LowerBoundOnly { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<&BitString> {
        match &self.status {
            KStatus::Exact { witness, .. } => Some(witness),
            KStatus::LowerBoundOnly { .. } => None,
        }
    }

    pub fn bound(&self) -> KBound {
        match &self.status {
            KStatus::Exact { k_bits, .. } => KBound::Exact(*k_bits),
            KStatus::LowerBoundOnly { k_exceeds } => KBound::Exceeds(*k_exceeds),
        }
    }
}

/// A K value that is either known or known only to exceed the search bound.
///
/// Ordered so that every `Exceeds(b)` sorts after every `Exact(k)` with
/// `k <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum KBound {
    Exact(usize),
    Exceeds(usize),
}

impl std::fmt::Display for KBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KBound::Exact(k) => write!(f, "{k}"),
            KBound::Exceeds(b) => write!(f, ">{b}"),
        }
    }
}

fn check_bounds(search_max_bits: usize, step_cap: u64) -> Result<(), ComplexityError> {
    if search_max_bits < hvm::OPCODE_BITS {
        return Err(ComplexityError::SearchTooSmall(search_max_bits));
    }
    if step_cap == 0 {
        return Err(ComplexityError::BudgetZero);
    }
    Ok(())
}

/// Canonical-order first producer of `target`, searching programs of at
/// most `search_max_bits` bits with input cell 0.
pub fn k_complexity(
    target: &BitString,
    search_max_bits: usize,
    step_cap: u64,
) -> Result<ComplexityRecord, ComplexityError> {
    check_bounds(search_max_bits, step_cap)?;
    let want = target.as_slice();
    let max_body = search_max_bits / hvm::OPCODE_BITS - 1;
    for body_len in 0..=max_body {
        let units = kernel::prefixes(body_len, body_len.min(SPLIT_DEPTH));
        // Units are in lexicographic order; the first unit with a hit holds
        // the canonical witness for this length.
        let hit = units
            .par_iter()
            .map_init(
                || Scratch::new(step_cap),
                |scratch, (prefix, shape)| {
                    let mut found = None;
                    kernel::complete(prefix, *shape, body_len, |body| {
                        let (exit, emitted) =
                            scratch.run(body, |bit, i| want.get(i) == Some(&bit));
                        if exit == Exit::Halted && emitted == want.len() {
                            found = Some(body.to_vec());
                            return false;
                        }
                        true
                    });
                    found
                },
            )
            .find_first(Option::is_some)
            .flatten();
        if let Some(body) = hit {
            return Ok(exact_record(target.clone(), &body, search_max_bits, step_cap));
        }
    }
    Ok(ComplexityRecord {
        target: target.clone(),
        status: KStatus::LowerBoundOnly {
            k_exceeds: search_max_bits,
        },
        search_max_bits,
        step_cap,
    })
}

fn exact_record(target: BitString, body: &[u8], search_max_bits: usize, step_cap: u64) -> ComplexityRecord {
    let program =
        Program::from_instructions(&kernel::body_to_opcodes(body)).expect("pruned bodies are valid");
    ComplexityRecord {
        target,
        status: KStatus::Exact {
            k_bits: program.length_bits(),
            witness: program.bits().clone(),
        },
        search_max_bits,
        step_cap,
    }
}

// Slot of a string of length `len` with value `v` in a table covering all
// strings up to some length: lengths are laid out back to back.
fn slot(len: usize, value: u64) -> usize {
    (1usize << len) - 1 + value as usize
}

/// First producers for every output of at most `max_output_len` bits, from
/// one exhaustive sweep.
///
/// Sharing a sweep across all targets is what makes whole-length censuses
/// affordable: each candidate program runs once, and runs are cut off as
/// soon as their output grows past `max_output_len`.
#[derive(Debug, Clone)]
pub struct ProducerTable {
    max_output_len: usize,
    search_max_bits: usize,
    step_cap: u64,
    // Pruned body of the first producer, per slot.
    producers: Vec<Option<Vec<u8>>>,
}

impl ProducerTable {
    pub fn sweep(
        max_output_len: usize,
        search_max_bits: usize,
        step_cap: u64,
    ) -> Result<Self, ComplexityError> {
        check_bounds(search_max_bits, step_cap)?;
        if max_output_len > MAX_CENSUS_N {
            return Err(ComplexityError::CensusTooLarge(max_output_len));
        }
        let slots = slot(max_output_len + 1, 0);
        let mut producers: Vec<Option<Vec<u8>>> = vec![None; slots];
        let max_body = search_max_bits / hvm::OPCODE_BITS - 1;
        for body_len in 0..=max_body {
            let units = kernel::prefixes(body_len, body_len.min(SPLIT_DEPTH));
            let found: Vec<Vec<(usize, Vec<u8>)>> = units
                .par_iter()
                .map_init(
                    || Scratch::new(step_cap),
                    |scratch, (prefix, shape)| {
                        let mut local: Vec<(usize, Vec<u8>)> = Vec::new();
                        let mut seen = vec![false; slots];
                        kernel::complete(prefix, *shape, body_len, |body| {
                            let mut value = 0u64;
                            let (exit, emitted) = scratch.run(body, |bit, i| {
                                value = (value << 1) | bit as u64;
                                i < max_output_len
                            });
                            if exit == Exit::Halted {
                                let s = slot(emitted, value);
                                if !seen[s] {
                                    seen[s] = true;
                                    local.push((s, body.to_vec()));
                                }
                            }
                            true
                        });
                        local
                    },
                )
                .collect();
            // Merge in unit order so the lexicographically first body wins.
            for local in found {
                for (s, body) in local {
                    if producers[s].is_none() {
                        producers[s] = Some(body);
                    }
                }
            }
        }
        Ok(Self {
            max_output_len,
            search_max_bits,
            step_cap,
            producers,
        })
    }

    pub fn max_output_len(&self) -> usize {
        self.max_output_len
    }

    pub fn record(&self, target: &BitString) -> Option<ComplexityRecord> {
        if target.len() > self.max_output_len {
            return None;
        }
        let status = match &self.producers[slot(target.len(), target.to_uint())] {
            Some(body) => {
                return Some(exact_record(
                    target.clone(),
                    body,
                    self.search_max_bits,
                    self.step_cap,
                ))
            }
            None => KStatus::LowerBoundOnly {
                k_exceeds: self.search_max_bits,
            },
        };
        Some(ComplexityRecord {
            target: target.clone(),
            status,
            search_max_bits: self.search_max_bits,
            step_cap: self.step_cap,
        })
    }

    fn bound(&self, len: usize, value: u64) -> KBound {
        match &self.producers[slot(len, value)] {
            Some(body) => KBound::Exact((body.len() + 1) * hvm::OPCODE_BITS),
            None => KBound::Exceeds(self.search_max_bits),
        }
    }

    /// Census of all strings of length `n` (at most `max_output_len`).
    pub fn census(&self, n: usize) -> RandomnessCensus {
        assert!(n <= self.max_output_len, "census length beyond sweep");
        let bounds: Vec<KBound> = (0..1u64 << n).map(|v| self.bound(n, v)).collect();
        RandomnessCensus::from_bounds(n, self.search_max_bits, self.step_cap, bounds)
    }
}

/// K values for every string of one length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RandomnessCensus {
    pub n: usize,
    pub search_max_bits: usize,
    pub step_cap: u64,
    /// K value → number of n-bit strings attaining it.
    pub counts: BTreeMap<usize, u64>,
    /// Strings with no producer within the search bounds.
    pub unresolved: u64,
    /// `n - K` → count, over resolved strings.
    pub deficiency_histogram: BTreeMap<i64, u64>,
    /// Per-string bound, indexed by the string's value.
    #[serde(skip)]
    pub bounds: Vec<KBound>,
}

impl RandomnessCensus {
    fn from_bounds(n: usize, search_max_bits: usize, step_cap: u64, bounds: Vec<KBound>) -> Self {
        let mut counts = BTreeMap::new();
        let mut deficiency_histogram = BTreeMap::new();
        let mut unresolved = 0;
        for b in &bounds {
            match *b {
                KBound::Exact(k) => {
                    *counts.entry(k).or_insert(0) += 1;
                    *deficiency_histogram.entry(n as i64 - k as i64).or_insert(0) += 1;
                }
                KBound::Exceeds(_) => unresolved += 1,
            }
        }
        Self {
            n,
            search_max_bits,
            step_cap,
            counts,
            unresolved,
            deficiency_histogram,
            bounds,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum::<u64>() + self.unresolved
    }

    pub fn bound_of(&self, s: &BitString) -> KBound {
        assert_eq!(s.len(), self.n);
        self.bounds[s.to_uint() as usize]
    }

    /// Number of n-bit strings with a producer shorter than `m` bits.
    pub fn count_below(&self, m: usize) -> u64 {
        self.counts.range(..m).map(|(_, c)| c).sum()
    }

    /// Checks `#{s : K(s) < m} < 2^m` for every `m` the search can speak to.
    pub fn counting_bound_holds(&self) -> bool {
        (0..=self.search_max_bits + 1).all(|m| (self.count_below(m) as u128) < (1u128 << m))
    }

    /// Lower median of the per-string bounds.
    pub fn median(&self) -> KBound {
        let mut sorted = self.bounds.clone();
        sorted.sort_unstable();
        sorted[(sorted.len() - 1) / 2]
    }

    pub fn min_resolved(&self) -> Option<usize> {
        self.counts.keys().next().copied()
    }

    /// Rows of `n,K,count`; unresolved strings appear with K `>max`.
    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows: Vec<String> = self
            .counts
            .iter()
            .map(|(k, c)| format!("{},{},{}", self.n, k, c))
            .collect();
        if self.unresolved > 0 {
            rows.push(format!("{},>{},{}", self.n, self.search_max_bits, self.unresolved));
        }
        rows
    }
}

/// K census for all `n`-bit strings.
pub fn incompressibility_census(
    n: usize,
    search_max_bits: usize,
    step_cap: u64,
) -> Result<RandomnessCensus, ComplexityError> {
    if n > MAX_CENSUS_N {
        return Err(ComplexityError::CensusTooLarge(n));
    }
    Ok(ProducerTable::sweep(n, search_max_bits, step_cap)?.census(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub record: ComplexityRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthTable {
    pub generator: BitString,
    /// Length of the generator itself, the reference line for the rows.
    pub generator_bits: usize,
    pub rows: Vec<GrowthRow>,
}

impl GrowthTable {
    /// Rows of `n,K,status`.
    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                let status = match r.record.status {
                    KStatus::Exact { .. } => "exact",
                    KStatus::LowerBoundOnly { .. } => "lower_bound",
                };
                format!("{},{},{}", r.n, r.record.bound(), status)
            })
            .collect()
    }
}

/// K of each requested prefix of a generator program's output.
pub fn compressibility_growth(
    generator: &Program,
    prefix_lengths: &[usize],
    search_max_bits: usize,
    step_cap: u64,
) -> Result<GrowthTable, ComplexityError> {
    check_bounds(search_max_bits, step_cap)?;
    let run = hvm::run(
        generator,
        &MachineConfig::with_cap(step_cap).map_err(|_| ComplexityError::BudgetZero)?,
    );
    if !run.halted() {
        return Err(ComplexityError::GeneratorDidNotHalt(step_cap));
    }
    let needed = prefix_lengths.iter().copied().max().unwrap_or(0);
    if run.output.len() < needed {
        return Err(ComplexityError::GeneratorTooShort {
            produced: run.output.len(),
            needed,
        });
    }
    let rows = prefix_lengths
        .iter()
        .map(|&n| {
            Ok(GrowthRow {
                n,
                record: k_complexity(&run.output.prefix(n), search_max_bits, step_cap)?,
            })
        })
        .collect::<Result<Vec<_>, ComplexityError>>()?;
    Ok(GrowthTable {
        generator: generator.bits().clone(),
        generator_bits: generator.length_bits(),
        rows,
    })
}
