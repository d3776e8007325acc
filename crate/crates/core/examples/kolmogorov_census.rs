//! Shortest programs for every short string, and how many of them are
//! incompressible.

use horizon_lab::bits::BitString;
use horizon_lab::complexity::{self, ProducerTable};

fn main() {
    let n = 6;
    let table = ProducerTable::sweep(n, 30, 1000).unwrap();
    for target in ["", "0", "1", "000000", "010110"] {
        let bits: BitString = target.parse().unwrap();
        match table.record(&bits) {
            Some(rec) => println!("K({target:?}) = {} via {:?}", rec.bound(), rec.witness().map(|w| w.to_string())),
            None => println!("K({target:?}) not covered"),
        }
    }
    let census = table.census(n);
    println!("\n{n}-bit strings, K histogram:");
    for (k, count) in &census.counts {
        println!("  K = {k:>2}: {count}");
    }
    println!("median {}, counting bound holds: {}", census.median(), census.counting_bound_holds());

    let rec = complexity::k_complexity(&BitString::zeros(3), 24, 1000).unwrap();
    println!("\nK(000) = {}", rec.bound());
}
