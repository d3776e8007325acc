//! Deciding halting from the halting mass: run everything of the same
//! length until the accumulated mass matches, then stop waiting.

use horizon_lab::hvm::Program;
use horizon_lab::omega;

fn main() {
    let oracle = omega::estimate_omega(12, 1000).unwrap();
    println!("oracle: Ω(12, 1000) >= {}", oracle.lower_bound);
    for text in ["111", "000111", "101110111", "000101110111"] {
        let p: Program = text.parse().unwrap();
        let v = omega::decide_by_prefix(&p, &oracle).unwrap();
        println!("{text:>14}: {:?} (decided at step {})", v.verdict, v.decided_at);
    }
}
