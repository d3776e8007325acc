//! Bisecting [0, 1) with dichotomic questions, and how the description
//! length of the answer compares with the answer itself.

use horizon_lab::bits::BitString;
use horizon_lab::complexity::{self, sigma};
use horizon_lab::dyadic::Dyadic;

fn main() {
    let x: Dyadic = "5/16".parse().unwrap();
    for n in 0..=6 {
        let e = sigma::sigma_encode(&x, n).unwrap();
        println!("n = {n}: {:<6} {}", e.bits.to_string(), e.interval);
    }

    let mut hidden = sigma::HiddenPoint("11/32".parse().unwrap());
    println!("localized: {}", sigma::localize(&mut hidden, 5).unwrap().bits);

    let zeros = BitString::zeros(8);
    let k = complexity::k_complexity(&zeros, 30, 1000).unwrap();
    println!("8 zero answers: K = {}", k.bound());
}
