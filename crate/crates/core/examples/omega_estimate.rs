//! Lower bounds on the halting probability of the bytecode machine.

use horizon_lab::omega;

fn main() {
    let bits = [3, 6, 9, 12, 15];
    let caps = [1, 10, 1000];
    let series = omega::convergence_series(&bits, &caps).unwrap();
    println!("max_bits  step_cap  halting  lower_bound");
    for est in &series {
        println!(
            "{:>8}  {:>8}  {:>7}  {} (~{:.6})",
            est.max_bits,
            est.step_cap,
            est.census_size(),
            est.lower_bound,
            est.lower_bound.to_f64()
        );
    }
}
