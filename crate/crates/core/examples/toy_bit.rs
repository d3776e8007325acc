//! The toy bit: complementarity of incompatible measurements and what
//! changes when the ontic state is visible.

use horizon_lab::toybit::{self, Disturbance, EpistemicState, MeasurementSequence, TargetPrediction, ToyMeasurement};

fn main() {
    let seq: MeasurementSequence = "mz,mx,mz".parse().unwrap();
    let law = toybit::run_sequence_exact(&seq, &EpistemicState::ignorance(), Disturbance::Resample);
    for (bits, p) in law.outcomes() {
        println!("P({bits}) = {}", toybit::format_ratio(&p));
    }
    println!("P(first mz = last mz) = {}", toybit::format_ratio(&law.agreement(0, 2)));

    let known = [(ToyMeasurement::MX, 0), (ToyMeasurement::MY, 1)];
    for disturbance in [Disturbance::None, Disturbance::Resample] {
        match toybit::classicality_experiment(&known, ToyMeasurement::MZ, disturbance) {
            Ok(p) => {
                let mz = match p.prediction {
                    TargetPrediction::Determined { bit } => format!("determined {bit}"),
                    TargetPrediction::Undetermined { p_one } => format!("P(1) = {}", toybit::format_ratio(&p_one)),
                };
                let ontic = p.ontic.map_or("unknown".to_string(), |t| t.to_string());
                println!("{disturbance:?}: epistemic {}, ontic {ontic}, mz {mz}", p.epistemic);
            }
            Err(e) => println!("{disturbance:?}: {e}"),
        }
    }
}
