mod common;

use std::sync::OnceLock;

use horizon_lab::bits::BitString;
use horizon_lab::complexity::sigma::{self, BitStreamPoint, HiddenPoint, SigmaEncoding};
use horizon_lab::complexity::{self, KBound};
use horizon_lab::diagonal::{self, AlphabetMap, OutcomeTable};
use horizon_lab::dyadic::Dyadic;
use horizon_lab::hvm::{self, Machine, MachineConfig, MachineState, Program};
use horizon_lab::omega::{self, OmegaEstimate};
use horizon_lab::toybit::{
    self, Disturbance, EpistemicState, MeasurementSequence, OnticState, Property, ToyMeasurement, ToySystem,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn valid_upto_15() -> &'static [Program] {
    static PROGRAMS: OnceLock<Vec<Program>> = OnceLock::new();
    PROGRAMS.get_or_init(|| hvm::enumerate_valid(15).collect())
}

#[test]
fn parser_and_interpreter_agree_with_naive_versions() {
    for p in valid_upto_15() {
        let text = p.bits().to_string();
        for input in [0u8, 1, 255] {
            let run = hvm::run(p, &MachineConfig::new(300, input).unwrap());
            let (halted, output, steps) = common::naive_run(&text, input, 300);
            assert_eq!(run.halted(), halted, "{text} input {input}");
            if halted {
                assert_eq!(run.output.to_string(), output, "{text}");
                assert_eq!(run.steps, steps, "{text}");
            }
        }
    }
}

#[test]
fn kraft_sum_at_most_one() {
    let mut total = Dyadic::zero();
    for p in hvm::enumerate_valid(21) {
        total = &total + &Dyadic::pow2_neg(p.length_bits() as u32);
    }
    assert!(total <= Dyadic::one(), "Kraft sum {total}");
    assert!(total > Dyadic::zero());
}

#[test]
fn property_lattice_is_boolean() {
    let all: Vec<Property> = Property::all().collect();
    assert_eq!(all.len(), 16);
    for &a in &all {
        assert_eq!(a.complement().complement(), a);
        assert_eq!(a.meet(a.complement()), Property::EMPTY);
        assert_eq!(a.join(a.complement()), Property::FULL);
        for &b in &all {
            assert_eq!(a.meet(b).complement(), a.complement().join(b.complement()));
            assert_eq!(a.implies(b), a.meet(b) == a);
            for &c in &all {
                assert_eq!(a.meet(b.join(c)), a.meet(b).join(a.meet(c)));
                assert_eq!(a.join(b.meet(c)), a.join(b).meet(a.join(c)));
            }
        }
    }
}

#[test]
fn orthogonal_measurements_negate_every_entry() {
    for m in ToyMeasurement::ALL.into_iter().filter(|m| !m.orthogonal) {
        for t in OnticState::ALL {
            assert_eq!(toybit::measure(t, m) ^ 1, toybit::measure(t, m.perp()), "{m} at {t}");
        }
    }
}

fn measurement() -> impl Strategy<Value = ToyMeasurement> {
    (0..6usize).prop_map(|i| ToyMeasurement::ALL[i])
}

fn ontic() -> impl Strategy<Value = OnticState> {
    (0..4usize).prop_map(|i| OnticState::ALL[i])
}

proptest! {
    #[test]
    fn toy_invariants_hold_along_any_sequence(
        start in ontic(),
        ms in prop::collection::vec(measurement(), 1..20),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sys = ToySystem::unknown(start);
        for m in ms {
            let (b, next) = toybit::apply_measurement(&sys, m, &mut rng);
            prop_assert_eq!(next.epistemic().members().len(), 2);
            prop_assert!(next.epistemic().members().contains(next.ontic()));
            prop_assert_eq!(toybit::measure(next.ontic(), m), b);
            let (again, _) = toybit::apply_measurement(&next, m, &mut rng);
            prop_assert_eq!(again, b);
            sys = next;
        }
    }

    #[test]
    fn exact_law_is_a_distribution(seq in prop::collection::vec(measurement(), 1..6)) {
        let seq = MeasurementSequence::new(seq).unwrap();
        for disturbance in [Disturbance::Resample, Disturbance::None] {
            let law = toybit::run_sequence_exact(&seq, &EpistemicState::ignorance(), disturbance);
            let total = law.probability_where(|_| true);
            prop_assert_eq!(total, num_rational::BigRational::from_integer(1.into()));
        }
    }

    #[test]
    fn halting_is_monotone_in_the_cap(index in 0usize..949, c1 in 1u64..200, extra in 0u64..200) {
        let programs = valid_upto_15();
        let p = &programs[index];
        let small = hvm::run(p, &MachineConfig::with_cap(c1).unwrap());
        let large = hvm::run(p, &MachineConfig::with_cap(c1 + extra).unwrap());
        if small.halted() {
            prop_assert_eq!(small, large);
        }
    }

    #[test]
    fn resumed_execution_matches_one_shot(index in 0usize..949, chunks in prop::collection::vec(1u64..40, 1..8)) {
        let programs = valid_upto_15();
        let p = &programs[index];
        let total: u64 = chunks.iter().sum();
        let mut m = Machine::new(p, 0);
        let mut budget = 0;
        for c in chunks {
            budget += c;
            if m.run_until(budget) != MachineState::Running {
                break;
            }
        }
        let one_shot = hvm::run(p, &MachineConfig::with_cap(total).unwrap());
        prop_assert_eq!(m.into_run(), one_shot);
    }

    #[test]
    fn omega_does_not_depend_on_schedule(seed in any::<u64>(), bits in 3usize..12, cap in 1u64..60) {
        let cfg = MachineConfig::with_cap(cap).unwrap();
        let mut runs: Vec<_> = hvm::enumerate_valid(bits).map(|p| {
            let r = hvm::run(&p, &cfg);
            (p, r)
        }).collect();
        runs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = OmegaEstimate::from_runs(bits, cap, runs);
        prop_assert_eq!(shuffled, omega::estimate_omega(bits, cap).unwrap());
    }

    #[test]
    fn sigma_round_trips(log2_den in 0u32..40, raw in any::<u64>(), n in 0usize..48) {
        let num = if log2_den == 0 { 0 } else { raw % (1u64 << log2_den) };
        let x = Dyadic::new(num, log2_den);
        let enc = sigma::sigma_encode(&x, n).unwrap();
        prop_assert_eq!(enc.bits.len(), n);
        prop_assert!(enc.interval.contains(&x));
        prop_assert_eq!(SigmaEncoding::from_bits(enc.bits.clone()), enc.clone());
        prop_assert_eq!(sigma::localize(&mut HiddenPoint(x), n).unwrap(), enc.clone());
        prop_assert_eq!(sigma::localize(&mut BitStreamPoint(enc.bits.clone()), n).unwrap(), enc);
    }

    #[test]
    fn diagonal_refutes_every_row(n in 1usize..40, size in 2u8..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = OutcomeTable::random(n, size, &mut rng).unwrap();
        let alpha = AlphabetMap::cyclic_successor(size).unwrap();
        let beta = diagonal::random_permutation(n, &mut rng);
        let report = diagonal::diagonalize_beta(&table, &beta, &alpha).unwrap();
        prop_assert!(report.is_complete());
        prop_assert!(diagonal::witnesses_hold(&table, &report));
        for j in 0..n {
            prop_assert!(table.row(j) != report.g.as_slice());
        }
    }

    #[test]
    fn k_witnesses_reproduce_their_target(target in prop::collection::vec(0u8..2, 0..3)) {
        let target = BitString::from_bits(target);
        let rec = complexity::k_complexity(&target, 18, 1000).unwrap();
        if let (KBound::Exact(k), Some(w)) = (rec.bound(), rec.witness()) {
            let p = hvm::parse_program(w).unwrap();
            prop_assert_eq!(p.length_bits(), k);
            let run = hvm::run(&p, &MachineConfig::with_cap(1000).unwrap());
            prop_assert!(run.halted());
            prop_assert_eq!(run.output, target.clone());
            prop_assert_eq!(common::naive_k(&target.to_string(), k, 1000), Some(w.to_string()));
        }
    }
}
