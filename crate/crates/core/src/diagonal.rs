//! Finite diagonal constructions over outcome tables.
//!
//! Row `j` of a table lists what program `j` outputs on each encoded
//! state. Post-composing the diagonal with a map `α` yields a column
//! function `g`; when `α` has no fixed point, `g` differs from every row.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::hvm::{self, MachineConfig, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagonalError {
    #[error("table is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("row {row} has {len} cells, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("cell ({row}, {col}) holds {symbol}, outside an alphabet of size {alphabet}")]
    SymbolOutOfRange { row: usize, col: usize, symbol: u8, alphabet: u8 },
    #[error("alphabet must have at least 2 symbols, got {0}")]
    AlphabetTooSmall(u8),
    #[error("map sends {symbol} to {image}, outside an alphabet of size {alphabet}")]
    MapNotTotal { symbol: u8, image: u8, alphabet: u8 },
    #[error("table alphabet has size {table}, map alphabet has size {map}")]
    AlphabetMismatch { table: u8, map: u8 },
    #[error("no program produced output on every state")]
    EmptyTable,
    #[error("step cap must be positive")]
    BudgetZero,
    #[error("row map is not a bijection on 0..{0}")]
    NotBijective(usize),
    #[error("map has fixed points {0:?}; the construction needs none")]
    HasFixedPoint(Vec<u8>),
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("unknown alphabet map {0:?}")]
    UnknownMap(String),
}

/// A total table of symbols from `0..alphabet`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeTable {
    rows: Vec<String>,
    cols: Vec<u8>,
    alphabet: u8,
    cells: Vec<Vec<u8>>,
}

impl OutcomeTable {
    pub fn from_cells(rows: Vec<String>, cols: Vec<u8>, alphabet: u8, cells: Vec<Vec<u8>>) -> Result<Self, DiagonalError> {
        if alphabet < 2 {
            return Err(DiagonalError::AlphabetTooSmall(alphabet));
        }
        if cells.len() != rows.len() {
            return Err(DiagonalError::Ragged {
                row: rows.len().min(cells.len()),
                len: 0,
                expected: cols.len(),
            });
        }
        for (row, line) in cells.iter().enumerate() {
            if line.len() != cols.len() {
                return Err(DiagonalError::Ragged {
                    row,
                    len: line.len(),
                    expected: cols.len(),
                });
            }
            if let Some(col) = line.iter().position(|&s| s >= alphabet) {
                return Err(DiagonalError::SymbolOutOfRange {
                    row,
                    col,
                    symbol: line[col],
                    alphabet,
                });
            }
        }
        Ok(Self { rows, cols, alphabet, cells })
    }

    /// A binary table with rows named `r0, r1, ...` and columns `0, 1, ...`.
    pub fn binary(cells: Vec<Vec<u8>>) -> Result<Self, DiagonalError> {
        let width = cells.first().map_or(0, Vec::len);
        let rows = (0..cells.len()).map(|i| format!("r{i}")).collect();
        let cols = (0..width).map(|c| c as u8).collect();
        Self::from_cells(rows, cols, 2, cells)
    }

    /// Uniform random `n x n` table over `0..alphabet`. Columns are `0..n`,
    /// so `n` must not exceed 256.
    pub fn random<R: Rng + ?Sized>(n: usize, alphabet: u8, rng: &mut R) -> Result<Self, DiagonalError> {
        let cells = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0..alphabet.max(1))).collect())
            .collect();
        Self::from_cells(
            (0..n).map(|i| format!("r{i}")).collect(),
            (0..n).map(|c| c as u8).collect(),
            alphabet,
            cells,
        )
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[u8] {
        &self.cols
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn cell(&self, row: usize, col: usize) -> u8 {
        self.cells[row][col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.cells[row]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows() == self.n_cols()
    }

    fn require_square(&self) -> Result<usize, DiagonalError> {
        if self.is_square() {
            Ok(self.n_rows())
        } else {
            Err(DiagonalError::NotSquare {
                rows: self.n_rows(),
                cols: self.n_cols(),
            })
        }
    }

    /// The leading `k x k` block with `k = min(rows, cols)`.
    pub fn truncate_square(&self) -> Self {
        let k = self.n_rows().min(self.n_cols());
        Self {
            rows: self.rows[..k].to_vec(),
            cols: self.cols[..k].to_vec(),
            alphabet: self.alphabet,
            cells: self.cells[..k].iter().map(|r| r[..k].to_vec()).collect(),
        }
    }

    /// Header `row,<state codes>`, then one line per row. LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for c in &self.cols {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
        for (name, line) in self.rows.iter().zip(&self.cells) {
            out.push_str(name);
            for s in line {
                out.push_str(&format!(",{s}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    StepLimit,
    NoOutput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExcludedRow {
    pub program: String,
    /// First state on which the program failed.
    pub state: u8,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuiltTable {
    pub table: OutcomeTable,
    pub excluded: Vec<ExcludedRow>,
}

/// Cell `(j, k)` is the first output bit of `programs[j]` started with
/// `states[k]` in cell 0. Programs that fail to halt or stay silent on
/// some state are dropped and reported.
pub fn build_outcome_table(programs: &[Program], states: &[u8], step_cap: u64) -> Result<BuiltTable, DiagonalError> {
    if step_cap == 0 {
        return Err(DiagonalError::BudgetZero);
    }
    let results: Vec<Result<Vec<u8>, ExcludedRow>> = programs
        .par_iter()
        .map(|p| {
            states
                .iter()
                .map(|&s| {
                    let cfg = MachineConfig::new(step_cap, s).expect("cap checked above");
                    let run = hvm::run(p, &cfg);
                    let fail = |reason| ExcludedRow {
                        program: p.bits().to_string(),
                        state: s,
                        reason,
                    };
                    if !run.halted() {
                        Err(fail(ExclusionReason::StepLimit))
                    } else {
                        run.output.get(0).ok_or_else(|| fail(ExclusionReason::NoOutput))
                    }
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut excluded = Vec::new();
    for (p, r) in programs.iter().zip(results) {
        match r {
            Ok(line) => {
                rows.push(p.bits().to_string());
                cells.push(line);
            }
            Err(e) => excluded.push(e),
        }
    }
    if rows.is_empty() {
        return Err(DiagonalError::EmptyTable);
    }
    let table = OutcomeTable::from_cells(rows, states.to_vec(), 2, cells)?;
    Ok(BuiltTable { table, excluded })
}

/// A total self-map of `0..size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphabetMap {
    name: String,
    mapping: Vec<u8>,
}

impl AlphabetMap {
    pub fn new(name: impl Into<String>, mapping: Vec<u8>) -> Result<Self, DiagonalError> {
        let size = u8::try_from(mapping.len()).map_err(|_| DiagonalError::AlphabetTooSmall(0))?;
        if size < 2 {
            return Err(DiagonalError::AlphabetTooSmall(size));
        }
        if let Some((symbol, &image)) = mapping.iter().enumerate().find(|(_, &m)| m >= size) {
            return Err(DiagonalError::MapNotTotal {
                symbol: symbol as u8,
                image,
                alphabet: size,
            });
        }
        Ok(Self {
            name: name.into(),
            mapping,
        })
    }

    pub fn negation() -> Self {
        Self {
            name: "not".into(),
            mapping: vec![1, 0],
        }
    }

    pub fn identity(size: u8) -> Result<Self, DiagonalError> {
        Self::new("id", (0..size).collect())
    }

    /// `a ↦ a + 1 mod size`. On two symbols this is negation.
    pub fn cyclic_successor(size: u8) -> Result<Self, DiagonalError> {
        Self::new("succ", (0..size).map(|a| (a + 1) % size.max(1)).collect())
    }

    /// `not`, `id` or `succ`, on an alphabet of `size` symbols.
    pub fn named(name: &str, size: u8) -> Result<Self, DiagonalError> {
        match name {
            "not" if size == 2 => Ok(Self::negation()),
            "not" => Err(DiagonalError::UnknownMap(format!("not on {size} symbols"))),
            "id" | "identity" => Self::identity(size),
            "succ" => Self::cyclic_successor(size),
            other => Err(DiagonalError::UnknownMap(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> u8 {
        self.mapping.len() as u8
    }

    pub fn apply(&self, a: u8) -> u8 {
        self.mapping[a as usize]
    }
}

impl fmt::Display for AlphabetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl FromStr for AlphabetMap {
    type Err = DiagonalError;

    /// Binary maps only; use [`AlphabetMap::named`] for larger alphabets.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::named(s.trim(), 2)
    }
}

pub fn fixed_point_scan(alpha: &AlphabetMap) -> Vec<u8> {
    (0..alpha.size()).filter(|&a| alpha.apply(a) == a).collect()
}

/// `g` differs from row `row` at `column`: the row has `expected` there,
/// `g` has `got`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub row: usize,
    pub column: usize,
    pub expected: u8,
    pub got: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagonalReport {
    pub alpha: String,
    pub g: Vec<u8>,
    /// One per row that `g` differs from, in row order.
    pub witnesses: Vec<Witness>,
    /// Rows equal to `g` everywhere.
    pub coinciding_rows: Vec<usize>,
}

impl DiagonalReport {
    /// Every row is refuted.
    pub fn is_complete(&self) -> bool {
        self.coinciding_rows.is_empty()
    }
}

fn check_alphabet(table: &OutcomeTable, alpha: &AlphabetMap) -> Result<(), DiagonalError> {
    if table.alphabet() != alpha.size() {
        return Err(DiagonalError::AlphabetMismatch {
            table: table.alphabet(),
            map: alpha.size(),
        });
    }
    Ok(())
}

/// Witnesses for `g` against each row, preferring column `preferred[j]`
/// for row `j` and otherwise the first differing column.
fn refute(table: &OutcomeTable, g: &[u8], preferred: impl Fn(usize) -> usize) -> (Vec<Witness>, Vec<usize>) {
    let mut witnesses = Vec::new();
    let mut coinciding = Vec::new();
    for j in 0..table.n_rows() {
        let row = table.row(j);
        let p = preferred(j);
        let column = if row[p] != g[p] {
            Some(p)
        } else {
            (0..g.len()).find(|&k| row[k] != g[k])
        };
        match column {
            Some(column) => witnesses.push(Witness {
                row: j,
                column,
                expected: row[column],
                got: g[column],
            }),
            None => coinciding.push(j),
        }
    }
    (witnesses, coinciding)
}

/// `g(k) = α(f(k, k))`.
pub fn diagonalize(table: &OutcomeTable, alpha: &AlphabetMap) -> Result<DiagonalReport, DiagonalError> {
    let n = table.require_square()?;
    check_alphabet(table, alpha)?;
    let g: Vec<u8> = (0..n).map(|k| alpha.apply(table.cell(k, k))).collect();
    let (witnesses, coinciding_rows) = refute(table, &g, |j| j);
    Ok(DiagonalReport {
        alpha: alpha.name().to_string(),
        g,
        witnesses,
        coinciding_rows,
    })
}

/// `g′(k) = α(f(β(k), k))` for a bijection `β` on row indices and a
/// fixed-point-free `α`; row `j` is refuted at column `β⁻¹(j)`.
pub fn diagonalize_beta(table: &OutcomeTable, beta: &[usize], alpha: &AlphabetMap) -> Result<DiagonalReport, DiagonalError> {
    let n = table.require_square()?;
    check_alphabet(table, alpha)?;
    let fixed = fixed_point_scan(alpha);
    if !fixed.is_empty() {
        return Err(DiagonalError::HasFixedPoint(fixed));
    }
    let mut inverse = vec![usize::MAX; n];
    if beta.len() != n {
        return Err(DiagonalError::NotBijective(n));
    }
    for (k, &j) in beta.iter().enumerate() {
        if j >= n || inverse[j] != usize::MAX {
            return Err(DiagonalError::NotBijective(n));
        }
        inverse[j] = k;
    }
    let g: Vec<u8> = (0..n).map(|k| alpha.apply(table.cell(beta[k], k))).collect();
    let (witnesses, coinciding_rows) = refute(table, &g, |j| inverse[j]);
    Ok(DiagonalReport {
        alpha: alpha.name().to_string(),
        g,
        witnesses,
        coinciding_rows,
    })
}

/// Checks every witness against the table and `g`.
pub fn witnesses_hold(table: &OutcomeTable, report: &DiagonalReport) -> bool {
    report
        .witnesses
        .iter()
        .all(|w| table.cell(w.row, w.column) == w.expected && report.g[w.column] == w.got && w.expected != w.got)
}

/// Seeded uniform permutation of `0..n`.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SequenceStep {
    /// Which measurement sequence the step reads.
    pub row: usize,
    /// Which measurement within it.
    pub column: usize,
    /// The orthogonal outcome performed instead.
    pub inverted: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SequenceDiagonal {
    pub steps: Vec<SequenceStep>,
    pub constructed: Vec<u8>,
    pub witnesses: Vec<Witness>,
}

/// Step `k` takes the `k`th measurement of the `k`th sequence and performs
/// the orthogonal one; the resulting sequence matches no row.
pub fn measurement_sequence_diagonal(table: &OutcomeTable) -> Result<SequenceDiagonal, DiagonalError> {
    let n = table.require_square()?;
    let alpha = AlphabetMap::cyclic_successor(table.alphabet())?;
    let report = diagonalize(table, &alpha)?;
    debug_assert!(report.is_complete());
    let steps = (0..n)
        .map(|k| SequenceStep {
            row: k,
            column: k,
            inverted: report.g[k],
        })
        .collect();
    Ok(SequenceDiagonal {
        steps,
        constructed: report.g,
        witnesses: report.witnesses,
    })
}

/// A normalized two-level state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qubit2 {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl Qubit2 {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    /// Normalizes `(a0, a1)`; `None` for the zero vector.
    pub fn normalized(a0: Complex64, a1: Complex64) -> Option<Self> {
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        (norm > 0.0).then(|| Self {
            a0: a0 / norm,
            a1: a1 / norm,
        })
    }

    pub fn ket0() -> Self {
        Self {
            a0: Complex64::new(1.0, 0.0),
            a1: Complex64::new(0.0, 0.0),
        }
    }

    pub fn ket1() -> Self {
        Self {
            a0: Complex64::new(0.0, 0.0),
            a1: Complex64::new(1.0, 0.0),
        }
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            a0: Complex64::new(h, 0.0),
            a1: Complex64::new(h, 0.0),
        }
    }

    /// Haar-random state from four standard normals.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            if let Some(q) = Self::normalized(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])) {
                return q;
            }
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        ((self.a0 - other.a0).norm_sqr() + (self.a1 - other.a1).norm_sqr()).sqrt()
    }

    /// `D = |0⟩⟨1| + |1⟩⟨0|`.
    pub fn negate(&self) -> Self {
        Self { a0: self.a1, a1: self.a0 }
    }
}


#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumReport {
    pub tolerance: f64,
    pub d0_is_1: bool,
    pub d1_is_0: bool,
    pub plus_is_fixed: bool,
    /// Basis states left unchanged by `D`.
    pub basis_fixed_points: Vec<u8>,
    /// `[re(a0), im(a0), re(a1), im(a1)]` of the fixed vector.
    pub fixed_vector: [f64; 4],
    pub involution_states: usize,
    pub involution_holds: bool,
    pub max_residual: f64,
}

impl QuantumReport {
    pub fn passed(&self) -> bool {
        self.d0_is_1 && self.d1_is_0 && self.plus_is_fixed && self.basis_fixed_points.is_empty() && self.involution_holds
    }
}

/// Negation on basis states has no fixed point, but `|+⟩` is fixed by its
/// linear extension.
pub fn quantum_negation_check(tolerance: f64, seed: u64, states: usize) -> Result<QuantumReport, DiagonalError> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(DiagonalError::BadTolerance);
    }
    let basis = [Qubit2::ket0(), Qubit2::ket1()];
    let r0 = basis[0].negate().distance(&basis[1]);
    let r1 = basis[1].negate().distance(&basis[0]);
    let plus = Qubit2::plus();
    let rp = plus.negate().distance(&plus);
    let basis_fixed_points = (0..2u8)
        .filter(|&b| basis[b as usize].negate().distance(&basis[b as usize]) <= tolerance)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_inv: f64 = 0.0;
    for _ in 0..states {
        let psi = Qubit2::random(&mut rng);
        debug_assert!((psi.norm_sqr() - 1.0).abs() <= Qubit2::NORM_TOLERANCE);
        worst_inv = worst_inv.max(psi.negate().negate().distance(&psi));
    }
    Ok(QuantumReport {
        tolerance,
        d0_is_1: r0 <= tolerance,
        d1_is_0: r1 <= tolerance,
        plus_is_fixed: rp <= tolerance,
        basis_fixed_points,
        fixed_vector: [plus.a0.re, plus.a0.im, plus.a1.re, plus.a1.im],
        involution_states: states,
        involution_holds: worst_inv <= tolerance,
        max_residual: r0.max(r1).max(rp).max(worst_inv),
    })
}
