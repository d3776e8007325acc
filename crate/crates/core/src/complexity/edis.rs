//! A deterministic rule interleaved with oracle bits, and its inverse.
//!
//! `u(n) = n²` when `3 ∤ n`, otherwise `u(n) = ρ(n)` for an external bit
//! oracle `ρ`. Observing `u` lets one split the data into the positions the
//! rule explains and a residue of raw oracle bits.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;

/// The oracle listing used in the worked example: `1101110101011010`.
pub const LISTED_RHO: &str = "1101110101011010";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EdisError {
    #[error("oracle has no bit for n = {0}")]
    OracleExhausted(u64),
    #[error("observation ({n}, {value}) contradicts the rule")]
    HypothesisViolated { n: u64, value: u64 },
    #[error("input {0} observed more than once")]
    DuplicateInput(u64),
    #[error("n = {0} is too large to square")]
    Overflow(u64),
}

/// Source of the random bits `ρ(n)`.
pub trait BitOracle {
    fn bit(&self, n: u64) -> Option<u8>;
}

/// A finite listing read with 1-based positions: `ρ(n)` is the `n`th listed
/// bit. `n = 0` has no position of its own and reads the first bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListedOracle {
    bits: BitString,
}

impl ListedOracle {
    pub fn new(bits: BitString) -> Self {
        Self { bits }
    }

    pub fn listed() -> Self {
        Self::new(LISTED_RHO.parse().expect("constant is a bitstring"))
    }

    /// `len` bits from ChaCha8 seeded with `seed`.
    pub fn seeded(seed: u64, len: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new((0..len).map(|_| rng.gen::<bool>() as u8).collect())
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }
}

impl BitOracle for ListedOracle {
    fn bit(&self, n: u64) -> Option<u8> {
        let position = n.max(1) - 1;
        usize::try_from(position).ok().and_then(|p| self.bits.get(p))
    }
}

/// Bits known only at specific inputs, as recovered by [`edis_decompose`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SparseOracle(pub BTreeMap<u64, u8>);

impl BitOracle for SparseOracle {
    fn bit(&self, n: u64) -> Option<u8> {
        self.0.get(&n).copied()
    }
}

pub fn edis_eval(n: u64, rho: &impl BitOracle) -> Result<u64, EdisError> {
    if !n.is_multiple_of(3) {
        n.checked_mul(n).ok_or(EdisError::Overflow(n))
    } else {
        rho.bit(n).map(u64::from).ok_or(EdisError::OracleExhausted(n))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdisTrace {
    pub inputs: Vec<u64>,
    pub outputs: Vec<u64>,
    /// Oracle bits in the order they were consumed.
    pub oracle_bits_consumed: BitString,
    /// Indices into `inputs` explained by the rule.
    pub algorithmic_positions: BTreeSet<usize>,
    /// Indices into `inputs` answered by the oracle.
    pub random_positions: BTreeSet<usize>,
}

impl EdisTrace {
    /// The oracle restricted to the inputs that consulted it.
    pub fn extracted_oracle(&self) -> SparseOracle {
        SparseOracle(
            self.random_positions
                .iter()
                .map(|&i| (self.inputs[i], self.outputs[i] as u8))
                .collect(),
        )
    }

    pub fn observations(&self) -> Vec<(u64, u64)> {
        self.inputs.iter().copied().zip(self.outputs.iter().copied()).collect()
    }
}

/// Evaluates `u` on each input, recording which positions used the oracle.
pub fn edis_trace(inputs: &[u64], rho: &impl BitOracle) -> Result<EdisTrace, EdisError> {
    let mut trace = EdisTrace {
        inputs: inputs.to_vec(),
        outputs: Vec::with_capacity(inputs.len()),
        oracle_bits_consumed: BitString::new(),
        algorithmic_positions: BTreeSet::new(),
        random_positions: BTreeSet::new(),
    };
    for (i, &n) in inputs.iter().enumerate() {
        let value = edis_eval(n, rho)?;
        trace.outputs.push(value);
        if n % 3 == 0 {
            trace.oracle_bits_consumed.push(value as u8);
            trace.random_positions.insert(i);
        } else {
            trace.algorithmic_positions.insert(i);
        }
    }
    Ok(trace)
}

/// Splits observations into the part explained by `n ↦ n²` on `3 ∤ n` and
/// the residual oracle bits.
pub fn edis_decompose(observations: &[(u64, u64)]) -> Result<EdisTrace, EdisError> {
    let mut seen = BTreeSet::new();
    let mut residue = SparseOracle::default();
    for &(n, value) in observations {
        if !seen.insert(n) {
            return Err(EdisError::DuplicateInput(n));
        }
        if !n.is_multiple_of(3) {
            if n.checked_mul(n) != Some(value) {
                return Err(EdisError::HypothesisViolated { n, value });
            }
        } else if value > 1 {
            return Err(EdisError::HypothesisViolated { n, value });
        } else {
            residue.0.insert(n, value as u8);
        }
    }
    let inputs: Vec<u64> = observations.iter().map(|&(n, _)| n).collect();
    let trace = edis_trace(&inputs, &residue)?;
    debug_assert_eq!(trace.observations(), observations);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rule_examples() {
        let rho = ListedOracle::listed();
        assert_eq!(edis_eval(4, &rho), Ok(16));
        assert_eq!(edis_eval(3, &rho), Ok(0));
        assert_eq!(edis_eval(0, &rho), Ok(1));
        assert_eq!(edis_eval(6, &rho), Ok(1));
        assert_eq!(edis_eval(15, &rho), Ok(1));
        assert_eq!(edis_eval(18, &rho), Err(EdisError::OracleExhausted(18)));
        assert_eq!(edis_eval(u64::MAX - 1, &rho), Err(EdisError::Overflow(u64::MAX - 1)));
    }

    #[test]
    fn decompose_examples() {
        let t = edis_decompose(&[(1, 1), (2, 4), (3, 0)]).unwrap();
        assert_eq!(t.algorithmic_positions, BTreeSet::from([0, 1]));
        assert_eq!(t.random_positions, BTreeSet::from([2]));
        assert_eq!(t.oracle_bits_consumed.to_string(), "0");

        assert_eq!(
            edis_decompose(&[(2, 5)]),
            Err(EdisError::HypothesisViolated { n: 2, value: 5 })
        );
        assert_eq!(
            edis_decompose(&[(3, 2)]),
            Err(EdisError::HypothesisViolated { n: 3, value: 2 })
        );
        assert_eq!(edis_decompose(&[(3, 1), (3, 0)]), Err(EdisError::DuplicateInput(3)));
    }

    #[test]
    fn seeded_round_trip() {
        let rho = ListedOracle::seeded(7, 16);
        let inputs: Vec<u64> = (1..=12).collect();
        let trace = edis_trace(&inputs, &rho).unwrap();
        let back = edis_decompose(&trace.observations()).unwrap();
        assert_eq!(back, trace);
        let replay = edis_trace(&inputs, &back.extracted_oracle()).unwrap();
        assert_eq!(replay.outputs, trace.outputs);
    }

    proptest! {
        #[test]
        fn decompose_inverts_eval(seed in any::<u64>(), inputs in proptest::collection::btree_set(0u64..500, 0..60)) {
            let rho = ListedOracle::seeded(seed, 500);
            let inputs: Vec<u64> = inputs.into_iter().collect();
            let trace = edis_trace(&inputs, &rho).unwrap();
            let back = edis_decompose(&trace.observations()).unwrap();
            prop_assert_eq!(&back.inputs, &trace.inputs);
            prop_assert_eq!(&back.oracle_bits_consumed, &trace.oracle_bits_consumed);
            prop_assert_eq!(back, trace);
        }
    }
}
