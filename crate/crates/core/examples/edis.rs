//! A sequence computed with an oracle, and its decomposition back into
//! computable steps plus oracle bits.

use horizon_lab::complexity::edis::{self, ListedOracle};

fn main() {
    let listed = ListedOracle::listed();
    for n in 0..=20 {
        match edis::edis_eval(n, &listed) {
            Ok(u) => println!("u({n}) = {u}"),
            Err(e) => println!("u({n}): {e}"),
        }
    }

    let rho = ListedOracle::seeded(9, 100);
    let inputs: Vec<u64> = (1..=30).collect();
    let trace = edis::edis_trace(&inputs, &rho).unwrap();
    println!("oracle bits consumed: {:?}", trace.oracle_bits_consumed);
    let back = edis::edis_decompose(&trace.observations()).unwrap();
    println!("round trip exact: {}", back.outputs == trace.outputs && back.inputs == trace.inputs);
}
