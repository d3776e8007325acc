//! Budget-relative lower bounds on the halting probability of the reference
//! machine, and the procedure that turns such a bound back into halting
//! verdicts.
//!
//! Every quantity here carries its `(max_bits, step_cap)` provenance: the
//! bound counts programs that halt *within the cap*, nothing more.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::hvm::{self, Machine, MachineConfig, MachineState, Program, VmRun};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OmegaError {
    #[error("step cap must be at least 1")]
    BudgetZero,
    #[error("max_bits must be at least 3, got {0}")]
    MaxBitsTooSmall(usize),
    #[error("oracle covers programs up to {oracle_bits} bits but the target has {target_bits}")]
    OracleTooSmall {
        oracle_bits: usize,
        target_bits: usize,
    },
    #[error("oracle mass {expected} was not matched by dovetailing within {step_cap} steps")]
    OracleInconsistent { expected: Dyadic, step_cap: u64 },
    #[error("series axes must be nonempty and strictly increasing")]
    BadSeries,
}

/// One halting program behind an estimate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusEntry {
    pub program: BitString,
    pub steps: u64,
    pub output: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OmegaEstimate {
    pub lower_bound: Dyadic,
    pub max_bits: usize,
    pub step_cap: u64,
    /// Halting programs in canonical enumeration order.
    pub halting_census: Vec<CensusEntry>,
}

impl OmegaEstimate {
    /// Assembles an estimate from runs performed in any order.
    ///
    /// Runs that did not halt are dropped; the rest are merged into
    /// canonical order before summing, so the result does not depend on how
    /// the work was scheduled.
    pub fn from_runs<I>(max_bits: usize, step_cap: u64, runs: I) -> Self
    where
        I: IntoIterator<Item = (Program, VmRun)>,
    {
        let mut census: Vec<CensusEntry> = runs
            .into_iter()
            .filter(|(_, r)| r.halted())
            .map(|(p, r)| CensusEntry {
                program: p.bits().clone(),
                steps: r.steps,
                output: r.output,
            })
            .collect();
        census.sort_by(|a, b| a.program.cmp(&b.program));
        let lower_bound = census_mass(census.iter().map(|e| e.program.len()));
        Self {
            lower_bound,
            max_bits,
            step_cap,
            halting_census: census,
        }
    }

    pub fn census_size(&self) -> usize {
        self.halting_census.len()
    }

    /// Halting mass restricted to programs of at most `bits` bits.
    pub fn mass_up_to(&self, bits: usize) -> Dyadic {
        census_mass(
            self.halting_census
                .iter()
                .map(|e| e.program.len())
                .filter(|&l| l <= bits),
        )
    }

    /// Recomputes the bound from the census and checks it matches.
    pub fn is_consistent(&self) -> bool {
        census_mass(self.halting_census.iter().map(|e| e.program.len())) == self.lower_bound
            && self.lower_bound < Dyadic::one()
            && self
                .halting_census
                .windows(2)
                .all(|w| w[0].program < w[1].program)
    }

    pub fn contains(&self, program: &BitString) -> Option<&CensusEntry> {
        self.halting_census
            .binary_search_by(|e| e.program.cmp(program))
            .ok()
            .map(|i| &self.halting_census[i])
    }

    /// `max_bits,step_cap,numerator,log2_denominator,census_size`
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.max_bits,
            self.step_cap,
            self.lower_bound.numerator(),
            self.lower_bound.log2_denominator(),
            self.census_size()
        )
    }
}

pub const CSV_HEADER: &str = "max_bits,step_cap,numerator,log2_denominator,census_size";

fn census_mass(lengths: impl Iterator<Item = usize>) -> Dyadic {
    lengths.map(|l| Dyadic::pow2_neg(l as u32)).sum()
}

/// Runs every valid program of at most `max_bits` bits on an empty tape and
/// sums `2^-length` over those halting within `step_cap` steps.
pub fn estimate_omega(max_bits: usize, step_cap: u64) -> Result<OmegaEstimate, OmegaError> {
    let cfg = MachineConfig::with_cap(step_cap).map_err(|_| OmegaError::BudgetZero)?;
    if max_bits < hvm::OPCODE_BITS {
        return Err(OmegaError::MaxBitsTooSmall(max_bits));
    }
    let programs: Vec<Program> = hvm::enumerate_valid(max_bits).collect();
    let runs: Vec<(Program, VmRun)> = programs
        .into_par_iter()
        .map(|p| {
            let r = hvm::run(&p, &cfg);
            (p, r)
        })
        .collect();
    Ok(OmegaEstimate::from_runs(max_bits, step_cap, runs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    HaltsWithin(u64),
    NotDecidedWithinBudget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HaltingVerdict {
    pub program: BitString,
    pub verdict: Verdict,
    /// Step count at which the dovetailed mass reached the oracle's.
    pub decided_at: u64,
}

/// Decides halting for `target` from a halting-mass oracle.
///
/// All programs no longer than the target are dovetailed with doubling step
/// budgets. Halting events are folded in step order, so the decision point
/// is the first step count at which the accumulated mass equals the
/// oracle's mass restricted to that length. Programs still running there
/// are declared non-halting relative to the oracle.
pub fn decide_by_prefix(
    target: &Program,
    oracle: &OmegaEstimate,
) -> Result<HaltingVerdict, OmegaError> {
    let bits = target.length_bits();
    if oracle.max_bits < bits {
        return Err(OmegaError::OracleTooSmall {
            oracle_bits: oracle.max_bits,
            target_bits: bits,
        });
    }
    let expected = oracle.mass_up_to(bits);
    let inconsistent = || OmegaError::OracleInconsistent {
        expected: expected.clone(),
        step_cap: oracle.step_cap,
    };

    let programs: Vec<Program> = hvm::enumerate_valid(bits).collect();
    let mut machines: Vec<Machine<'_>> = programs.iter().map(|p| Machine::new(p, 0)).collect();
    let mut halted_at: Vec<Option<u64>> = vec![None; machines.len()];
    let mut mass = Dyadic::zero();
    let mut decided_at = None;
    if mass == expected {
        decided_at = Some(0);
    }

    let mut budget = 1u64;
    while decided_at.is_none() {
        let mut events: Vec<(u64, usize)> = machines
            .par_iter_mut()
            .enumerate()
            .filter_map(|(i, m)| {
                let was_running = m.state() == MachineState::Running;
                (was_running && m.run_until(budget) == MachineState::Halted).then(|| (m.steps(), i))
            })
            .collect();
        events.sort_unstable();
        for group in events.chunk_by(|a, b| a.0 == b.0) {
            let steps = group[0].0;
            for &(_, i) in group {
                halted_at[i] = Some(steps);
                mass += &Dyadic::pow2_neg(programs[i].length_bits() as u32);
            }
            match mass.cmp(&expected) {
                std::cmp::Ordering::Equal => {
                    decided_at = Some(steps);
                    break;
                }
                std::cmp::Ordering::Greater => return Err(inconsistent()),
                std::cmp::Ordering::Less => {}
            }
        }
        if decided_at.is_none() {
            if budget >= oracle.step_cap {
                return Err(inconsistent());
            }
            budget = budget.saturating_mul(2).min(oracle.step_cap);
        }
    }
    let decided_at = decided_at.unwrap_or(0);

    let idx = programs
        .binary_search(target)
        .expect("target is a valid program within the enumerated length");
    let verdict = match halted_at[idx] {
        Some(s) if s <= decided_at => Verdict::HaltsWithin(s),
        _ => Verdict::NotDecidedWithinBudget,
    };
    Ok(HaltingVerdict {
        program: target.bits().clone(),
        verdict,
        decided_at,
    })
}

/// Estimates over the grid `max_bits_list × step_cap_list`, row-major by
/// `max_bits`.
pub fn convergence_series(
    max_bits_list: &[usize],
    step_cap_list: &[u64],
) -> Result<Vec<OmegaEstimate>, OmegaError> {
    let increasing_bits = max_bits_list.windows(2).all(|w| w[0] < w[1]);
    let increasing_caps = step_cap_list.windows(2).all(|w| w[0] < w[1]);
    if max_bits_list.is_empty() || step_cap_list.is_empty() || !increasing_bits || !increasing_caps {
        return Err(OmegaError::BadSeries);
    }
    let mut out = Vec::with_capacity(max_bits_list.len() * step_cap_list.len());
    for &bits in max_bits_list {
        for &cap in step_cap_list {
            out.push(estimate_omega(bits, cap)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prog(s: &str) -> Program {
        s.parse().unwrap()
    }

    #[test]
    fn small_estimates() {
        let e = estimate_omega(3, 10).unwrap();
        assert_eq!(e.lower_bound.to_string(), "1/8");
        assert_eq!(e.halting_census.len(), 1);
        assert_eq!(e.halting_census[0].program.to_string(), "111");

        let e = estimate_omega(6, 10).unwrap();
        assert_eq!(e.lower_bound.to_string(), "13/64");
        assert_eq!(e.csv_row(), "6,10,13,6,6");

        let e = estimate_omega(6, 1).unwrap();
        assert_eq!(e.lower_bound.to_string(), "1/8");
    }

    #[test]
    fn errors() {
        assert_eq!(estimate_omega(6, 0), Err(OmegaError::BudgetZero));
        assert_eq!(estimate_omega(2, 5), Err(OmegaError::MaxBitsTooSmall(2)));
        let small = estimate_omega(3, 10).unwrap();
        assert!(matches!(
            decide_by_prefix(&prog("000111"), &small),
            Err(OmegaError::OracleTooSmall { oracle_bits: 3, target_bits: 6 })
        ));
        assert_eq!(convergence_series(&[6, 3], &[1]), Err(OmegaError::BadSeries));
        assert_eq!(convergence_series(&[], &[1]), Err(OmegaError::BadSeries));
    }

    #[test]
    fn decide_examples() {
        let oracle = estimate_omega(6, 10).unwrap();
        let v = decide_by_prefix(&prog("111"), &oracle).unwrap();
        assert_eq!(v.verdict, Verdict::HaltsWithin(1));
        let v = decide_by_prefix(&prog("000111"), &oracle).unwrap();
        assert_eq!(v.verdict, Verdict::HaltsWithin(2));

        let oracle = estimate_omega(9, 10).unwrap();
        let v = decide_by_prefix(&prog("101110111"), &oracle).unwrap();
        assert!(matches!(v.verdict, Verdict::HaltsWithin(s) if s <= 3));
    }

    #[test]
    fn decide_reports_non_halters() {
        // INC [ ] HALT never halts on an empty tape.
        let oracle = estimate_omega(12, 100).unwrap();
        let v = decide_by_prefix(&prog("000101110111"), &oracle).unwrap();
        assert_eq!(v.verdict, Verdict::NotDecidedWithinBudget);
    }

    #[test]
    fn inflated_oracle_is_rejected() {
        let mut oracle = estimate_omega(6, 10).unwrap();
        oracle.halting_census.push(CensusEntry {
            program: "101111".parse().unwrap(),
            steps: 1,
            output: BitString::new(),
        });
        assert!(matches!(
            decide_by_prefix(&prog("111"), &oracle).map(|v| v.verdict),
            Ok(Verdict::HaltsWithin(1))
        ));
        assert!(matches!(
            decide_by_prefix(&prog("000111"), &oracle),
            Err(OmegaError::OracleInconsistent { .. })
        ));
    }

    #[test]
    fn estimates_are_consistent() {
        for bits in [3, 6, 9, 12] {
            assert!(estimate_omega(bits, 50).unwrap().is_consistent());
        }
    }

    #[test]
    fn series_is_row_major() {
        let s = convergence_series(&[3, 6], &[1, 10]).unwrap();
        let keys: Vec<_> = s.iter().map(|e| (e.max_bits, e.step_cap)).collect();
        assert_eq!(keys, vec![(3, 1), (3, 10), (6, 1), (6, 10)]);
    }
}
