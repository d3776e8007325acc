//! Negation on a qubit has no fixed basis state but fixes |+>.

use horizon_lab::diagonal::{self, Qubit2};

fn main() {
    let plus = Qubit2::plus();
    println!("|+>  = {plus:?}");
    println!("D|+> = {:?}", plus.negate());
    let report = diagonal::quantum_negation_check(1e-12, 3, 100).unwrap();
    println!("{report:#?}");
    println!("passed: {}", report.passed());
}
