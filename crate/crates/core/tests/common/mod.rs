//! Independent reference implementations used as test oracles. Nothing
//! here calls into the library.

#![allow(dead_code)]

use std::collections::HashMap;

/// Validity by a direct reading of the format rules, on an ASCII string.
pub fn naive_valid(bits: &str) -> bool {
    if !bits.len().is_multiple_of(3) || bits.is_empty() {
        return false;
    }
    let ops: Vec<&str> = (0..bits.len() / 3).map(|i| &bits[3 * i..3 * i + 3]).collect();
    let Some(halt) = ops.iter().position(|&o| o == "111") else {
        return false;
    };
    if halt != ops.len() - 1 {
        return false;
    }
    let mut depth = 0i32;
    for &o in &ops {
        match o {
            "101" => depth += 1,
            "110" => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

/// Interprets a valid program string. Returns `(halted, output, steps)`.
pub fn naive_run(bits: &str, input: u8, cap: u64) -> (bool, String, u64) {
    let ops: Vec<&str> = (0..bits.len() / 3).map(|i| &bits[3 * i..3 * i + 3]).collect();
    let mut tape: HashMap<i64, u8> = HashMap::new();
    tape.insert(0, input);
    let mut head = 0i64;
    let mut pc = 0usize;
    let mut steps = 0u64;
    let mut out = String::new();
    while steps < cap {
        steps += 1;
        let cell = *tape.get(&head).unwrap_or(&0);
        match ops[pc] {
            "000" => {
                tape.insert(head, cell.wrapping_add(1));
            }
            "001" => {
                tape.insert(head, cell.wrapping_sub(1));
            }
            "010" => head -= 1,
            "011" => head += 1,
            "100" => out.push(if cell % 2 == 1 { '1' } else { '0' }),
            "101" => {
                if cell == 0 {
                    // Scan forward to the matching end.
                    let mut d = 1;
                    while d > 0 {
                        pc += 1;
                        match ops[pc] {
                            "101" => d += 1,
                            "110" => d -= 1,
                            _ => {}
                        }
                    }
                }
            }
            "110" => {
                if cell != 0 {
                    let mut d = 1;
                    while d > 0 {
                        pc -= 1;
                        match ops[pc] {
                            "110" => d += 1,
                            "101" => d -= 1,
                            _ => {}
                        }
                    }
                }
            }
            "111" => return (true, out, steps),
            _ => unreachable!(),
        }
        pc += 1;
    }
    (false, out, steps)
}

/// All bitstrings of exactly `len` bits in lexicographic order.
pub fn all_strings(len: usize) -> impl Iterator<Item = String> {
    (0u64..1 << len).map(move |v| {
        (0..len)
            .rev()
            .map(|i| if v >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    })
}

/// Halting mass of valid programs up to `max_bits`, as a numerator over
/// `2^max_bits`.
pub fn naive_omega(max_bits: usize, cap: u64) -> (u128, usize) {
    let mut num = 0u128;
    for len in 1..=max_bits {
        for s in all_strings(len) {
            if naive_valid(&s) && naive_run(&s, 0, cap).0 {
                num += 1u128 << (max_bits - len);
            }
        }
    }
    (num, max_bits)
}

/// Reduces `num / 2^log2_den` to lowest terms and renders `p/q`.
pub fn dyadic_text(mut num: u128, mut log2_den: usize) -> String {
    while log2_den > 0 && num.is_multiple_of(2) {
        num /= 2;
        log2_den -= 1;
    }
    if num == 0 {
        return "0/1".into();
    }
    format!("{num}/{}", 1u128 << log2_den)
}

/// First valid program, by length then lexicographically, producing
/// `target`.
pub fn naive_k(target: &str, max_bits: usize, cap: u64) -> Option<String> {
    (1..=max_bits)
        .flat_map(all_strings)
        .find(|s| naive_valid(s) && {
            let (h, out, _) = naive_run(s, 0, cap);
            h && out == target
        })
}

/// The measurement table as printed: rows mz, mx, my over t1..t4.
pub const TABLE: [(&str, [u8; 4]); 3] = [("mz", [1, 1, 0, 0]), ("mx", [1, 0, 1, 0]), ("my", [1, 0, 0, 1])];

pub fn table_value(name: &str, t: usize) -> u8 {
    let (base, perp) = match name.strip_suffix('\'') {
        Some(b) => (b, true),
        None => (name, false),
    };
    let row = TABLE.iter().find(|(n, _)| *n == base).expect("known measurement").1;
    row[t] ^ perp as u8
}

/// Binary digits of `num / 2^log2_den`, first `n` of them.
pub fn binary_expansion(num: u64, log2_den: u32, n: usize) -> String {
    (1..=n)
        .map(|i| {
            // floor(x * 2^i) mod 2
            let scaled = if i as u32 >= log2_den {
                num << (i as u32 - log2_den)
            } else {
                num >> (log2_den - i as u32)
            };
            if scaled & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}
