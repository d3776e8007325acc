//! Diagonalization against a table of program outcomes.

use horizon_lab::diagonal::{self, AlphabetMap, OutcomeTable};
use horizon_lab::hvm;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let programs: Vec<_> = hvm::enumerate_valid(12).collect();
    let states: Vec<u8> = (0..6).collect();
    let built = diagonal::build_outcome_table(&programs, &states, 1000).unwrap();
    let table = built.table.truncate_square();
    println!("{} rows kept, {} excluded", table.n_rows(), built.excluded.len());
    print!("{}", table.to_csv());

    let report = diagonal::diagonalize(&table, &AlphabetMap::negation()).unwrap();
    println!("g = {:?}", report.g);
    for w in &report.witnesses {
        println!("  row {} differs at column {}: {} vs {}", w.row, w.column, w.expected, w.got);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let three = OutcomeTable::random(5, 3, &mut rng).unwrap();
    let succ = AlphabetMap::cyclic_successor(3).unwrap();
    let beta = diagonal::random_permutation(5, &mut rng);
    let r = diagonal::diagonalize_beta(&three, &beta, &succ).unwrap();
    println!("three outcomes, beta {beta:?}: complete {}", r.is_complete());
    println!("identity has fixed points: {:?}", diagonal::fixed_point_scan(&AlphabetMap::identity(2).unwrap()));
}
