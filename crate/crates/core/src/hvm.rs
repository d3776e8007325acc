//! The laboratory's reference machine: a bit-coded tape VM whose valid
//! programs form a prefix-free set.
//!
//! Programs are read as 3-bit opcodes, most significant bit first:
//!
//! | bits | opcode       |
//! |------|--------------|
//! | 000  | `INC`        |
//! | 001  | `DEC`        |
//! | 010  | `LEFT`       |
//! | 011  | `RIGHT`      |
//! | 100  | `OUT`        |
//! | 101  | `LOOP_BEGIN` |
//! | 110  | `LOOP_END`   |
//! | 111  | `HALT`       |
//!
//! Parsing stops at the first `HALT`. A bitstring is a valid program only if
//! nothing follows that `HALT` and its loops balance, so no valid program
//! can extend another one.
//!
//! The tape holds 8-bit wrapping cells and is unbounded in both directions.
//! `OUT` appends the parity of the current cell to the output. Every
//! executed instruction, `HALT` included, costs one step.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bits::BitString;

pub const OPCODE_BITS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Opcode {
    Inc = 0,
    Dec = 1,
    Left = 2,
    Right = 3,
    Out = 4,
    LoopBegin = 5,
    LoopEnd = 6,
    Halt = 7,
}

impl Opcode {
    pub const ALL: [Opcode; 8] = [
        Opcode::Inc,
        Opcode::Dec,
        Opcode::Left,
        Opcode::Right,
        Opcode::Out,
        Opcode::LoopBegin,
        Opcode::LoopEnd,
        Opcode::Halt,
    ];

    pub fn from_code(code: u8) -> Opcode {
        Self::ALL[(code & 0b111) as usize]
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Inc => "INC",
            Opcode::Dec => "DEC",
            Opcode::Left => "LEFT",
            Opcode::Right => "RIGHT",
            Opcode::Out => "OUT",
            Opcode::LoopBegin => "LOOP_BEGIN",
            Opcode::LoopEnd => "LOOP_END",
            Opcode::Halt => "HALT",
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum InvalidReason {
    #[error("bits follow the first HALT")]
    TrailingBits,
    #[error("loop brackets do not balance before HALT")]
    UnbalancedLoop,
    #[error("no HALT instruction")]
    NoHalt,
    #[error("bit length is not a multiple of 3")]
    NotMultipleOf3,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid program {bits}: {reason}")]
pub struct InvalidProgram {
    pub bits: BitString,
    pub reason: InvalidReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("step cap must be at least 1")]
    ZeroStepCap,
}

/// A parsed, validated program.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Program {
    bits: BitString,
    instructions: Vec<Opcode>,
    // Index of the matching bracket for loop instructions, unused otherwise.
    jumps: Vec<u32>,
}

impl Program {
    /// Builds a program from opcodes. The list must end in its only `HALT`
    /// and have balanced loops.
    pub fn from_instructions(instructions: &[Opcode]) -> Result<Program, InvalidProgram> {
        let bits = instructions
            .iter()
            .flat_map(|op| {
                let c = op.code();
                [(c >> 2) & 1, (c >> 1) & 1, c & 1]
            })
            .collect::<BitString>();
        parse_program(&bits)
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn instructions(&self) -> &[Opcode] {
        &self.instructions
    }

    pub fn length_bits(&self) -> usize {
        self.bits.len()
    }

    pub fn run(&self, cfg: &MachineConfig) -> VmRun {
        run(self, cfg)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.bits, f)
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Program({}", self.bits)?;
        for op in &self.instructions {
            write!(f, " {op}")?;
        }
        f.write_str(")")
    }
}

impl PartialOrd for Program {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Program {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.bits.cmp(&other.bits)
    }
}

impl std::str::FromStr for Program {
    type Err = ProgramTextError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits: BitString = s.parse()?;
        Ok(parse_program(&bits)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramTextError {
    #[error(transparent)]
    Bits(#[from] crate::bits::BitParseError),
    #[error(transparent)]
    Invalid(#[from] InvalidProgram),
}

/// Parses a bitstring under the first-`HALT` rule.
pub fn parse_program(bits: &BitString) -> Result<Program, InvalidProgram> {
    let invalid = |reason| InvalidProgram {
        bits: bits.clone(),
        reason,
    };
    let raw = bits.as_slice();
    let mut instructions = Vec::with_capacity(raw.len() / OPCODE_BITS);
    let mut halted_at = None;
    for (i, chunk) in raw.chunks_exact(OPCODE_BITS).enumerate() {
        let op = Opcode::from_code((chunk[0] << 2) | (chunk[1] << 1) | chunk[2]);
        instructions.push(op);
        if op == Opcode::Halt {
            halted_at = Some(i);
            break;
        }
    }
    let Some(halt) = halted_at else {
        return Err(invalid(if !raw.len().is_multiple_of(OPCODE_BITS) {
            InvalidReason::NotMultipleOf3
        } else {
            InvalidReason::NoHalt
        }));
    };
    if raw.len() != (halt + 1) * OPCODE_BITS {
        return Err(invalid(InvalidReason::TrailingBits));
    }
    let jumps = match_loops(&instructions).ok_or_else(|| invalid(InvalidReason::UnbalancedLoop))?;
    Ok(Program {
        bits: bits.clone(),
        instructions,
        jumps,
    })
}

fn match_loops(instructions: &[Opcode]) -> Option<Vec<u32>> {
    let mut jumps = vec![0u32; instructions.len()];
    let mut open = Vec::new();
    for (i, op) in instructions.iter().enumerate() {
        match op {
            Opcode::LoopBegin => open.push(i),
            Opcode::LoopEnd => {
                let j = open.pop()?;
                jumps[i] = j as u32;
                jumps[j] = i as u32;
            }
            _ => {}
        }
    }
    open.is_empty().then_some(jumps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MachineConfig {
    step_cap: u64,
    input_cell: u8,
}

impl MachineConfig {
    pub fn new(step_cap: u64, input_cell: u8) -> Result<Self, ConfigError> {
        if step_cap == 0 {
            return Err(ConfigError::ZeroStepCap);
        }
        Ok(Self {
            step_cap,
            input_cell,
        })
    }

    /// Config with input cell 0.
    pub fn with_cap(step_cap: u64) -> Result<Self, ConfigError> {
        Self::new(step_cap, 0)
    }

    pub fn step_cap(&self) -> u64 {
        self.step_cap
    }

    pub fn input_cell(&self) -> u8 {
        self.input_cell
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RunStatus {
    Halted,
    StepLimit,
}

/// Result of running a program under a step cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VmRun {
    pub status: RunStatus,
    pub output: BitString,
    pub steps: u64,
    /// Leftmost and rightmost head positions visited.
    pub tape_span: RangeInclusive<i64>,
}

impl VmRun {
    pub fn halted(&self) -> bool {
        self.status == RunStatus::Halted
    }
}

impl Serialize for VmRun {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Flat<'a> {
            status: RunStatus,
            output: &'a BitString,
            steps: u64,
        }
        Flat {
            status: self.status,
            output: &self.output,
            steps: self.steps,
        }
        .serialize(serializer)
    }
}

/// Where a resumable execution currently stands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MachineState {
    Running,
    Halted,
    /// The output observer asked to stop.
    Aborted,
}

/// Tape that grows on demand in both directions.
#[derive(Debug, Clone)]
struct Tape {
    cells: Vec<u8>,
    // Index in `cells` of head position 0.
    origin: usize,
}

impl Tape {
    fn new(input: u8) -> Self {
        let mut cells = vec![0u8; 16];
        cells[8] = input;
        Self { cells, origin: 8 }
    }

    #[inline]
    fn index(&mut self, head: i64) -> usize {
        let idx = self.origin as i64 + head;
        if idx < 0 {
            let grow = self.cells.len().max((-idx) as usize);
            let mut cells = vec![0u8; grow];
            cells.extend_from_slice(&self.cells);
            self.cells = cells;
            self.origin += grow;
            (self.origin as i64 + head) as usize
        } else {
            let idx = idx as usize;
            if idx >= self.cells.len() {
                let new_len = (self.cells.len() * 2).max(idx + 1);
                self.cells.resize(new_len, 0);
            }
            idx
        }
    }
}

/// A resumable execution of one program.
///
/// Used directly by dovetailing schedules; [`run`] wraps it for one-shot use.
#[derive(Debug, Clone)]
pub struct Machine<'p> {
    program: &'p Program,
    pc: usize,
    head: i64,
    tape: Tape,
    steps: u64,
    output: BitString,
    state: MachineState,
    span: (i64, i64),
}

impl<'p> Machine<'p> {
    pub fn new(program: &'p Program, input_cell: u8) -> Self {
        Self {
            program,
            pc: 0,
            head: 0,
            tape: Tape::new(input_cell),
            steps: 0,
            output: BitString::new(),
            state: MachineState::Running,
            span: (0, 0),
        }
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn output(&self) -> &BitString {
        &self.output
    }

    pub fn state(&self) -> MachineState {
        self.state
    }

    /// Runs until halting or until `total_budget` steps have been spent in
    /// total. Returns the state afterwards.
    pub fn run_until(&mut self, total_budget: u64) -> MachineState {
        self.run_observed(total_budget, |_, _| true)
    }

    /// Like [`Machine::run_until`], calling `observe(bit, index)` for every
    /// output bit. Returning `false` from the observer aborts the run.
    pub fn run_observed<F>(&mut self, total_budget: u64, mut observe: F) -> MachineState
    where
        F: FnMut(u8, usize) -> bool,
    {
        if self.state != MachineState::Running {
            return self.state;
        }
        let ops = &self.program.instructions;
        let jumps = &self.program.jumps;
        let mut pc = self.pc;
        let mut head = self.head;
        let mut idx = self.tape.index(head);
        let mut steps = self.steps;
        let (mut lo, mut hi) = self.span;
        let state = loop {
            if steps >= total_budget {
                break MachineState::Running;
            }
            steps += 1;
            match ops[pc] {
                Opcode::Inc => self.tape.cells[idx] = self.tape.cells[idx].wrapping_add(1),
                Opcode::Dec => self.tape.cells[idx] = self.tape.cells[idx].wrapping_sub(1),
                Opcode::Left => {
                    head -= 1;
                    lo = lo.min(head);
                    idx = self.tape.index(head);
                }
                Opcode::Right => {
                    head += 1;
                    hi = hi.max(head);
                    idx = self.tape.index(head);
                }
                Opcode::Out => {
                    let bit = self.tape.cells[idx] & 1;
                    self.output.push(bit);
                    if !observe(bit, self.output.len() - 1) {
                        pc += 1;
                        break MachineState::Aborted;
                    }
                }
                Opcode::LoopBegin => {
                    if self.tape.cells[idx] == 0 {
                        pc = jumps[pc] as usize;
                    }
                }
                Opcode::LoopEnd => {
                    if self.tape.cells[idx] != 0 {
                        pc = jumps[pc] as usize;
                    }
                }
                Opcode::Halt => break MachineState::Halted,
            }
            pc += 1;
        };
        self.pc = pc;
        self.head = head;
        self.steps = steps;
        self.span = (lo, hi);
        self.state = state;
        state
    }

    pub fn into_run(self) -> VmRun {
        VmRun {
            status: if self.state == MachineState::Halted {
                RunStatus::Halted
            } else {
                RunStatus::StepLimit
            },
            output: self.output,
            steps: self.steps,
            tape_span: self.span.0..=self.span.1,
        }
    }
}

/// Runs `program` from a fresh tape until it halts or the step cap is hit.
pub fn run(program: &Program, cfg: &MachineConfig) -> VmRun {
    let mut m = Machine::new(program, cfg.input_cell);
    m.run_until(cfg.step_cap);
    m.into_run()
}

/// Every valid program of at most `max_bits` bits, in canonical
/// (length, lexicographic) order.
pub fn enumerate_valid(max_bits: usize) -> ValidPrograms {
    ValidPrograms {
        max_instructions: max_bits / OPCODE_BITS,
        body: Vec::new(),
        started: false,
    }
}

/// Iterator behind [`enumerate_valid`].
///
/// Walks instruction bodies (everything before the `HALT`) in lexicographic
/// order, length by length, skipping bodies whose loops cannot balance.
#[derive(Debug, Clone)]
pub struct ValidPrograms {
    max_instructions: usize,
    body: Vec<u8>,
    started: bool,
}

impl ValidPrograms {
    fn balanced(body: &[u8]) -> bool {
        let mut depth = 0i32;
        for &c in body {
            match c {
                5 => depth += 1,
                6 => {
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

    // Odometer step over digits 0..=6; false when this length is exhausted.
    fn advance(&mut self) -> bool {
        for i in (0..self.body.len()).rev() {
            if self.body[i] < 6 {
                self.body[i] += 1;
                for d in &mut self.body[i + 1..] {
                    *d = 0;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for ValidPrograms {
    type Item = Program;

    fn next(&mut self) -> Option<Program> {
        if self.max_instructions == 0 {
            return None;
        }
        loop {
            if !self.started {
                self.started = true;
            } else if !self.advance() {
                if self.body.len() + 1 >= self.max_instructions {
                    self.max_instructions = 0;
                    return None;
                }
                self.body = vec![0; self.body.len() + 1];
            }
            if Self::balanced(&self.body) {
                let mut ops: Vec<Opcode> = self.body.iter().map(|&c| Opcode::from_code(c)).collect();
                ops.push(Opcode::Halt);
                return Some(Program::from_instructions(&ops).expect("balanced body is valid"));
            }
        }
    }
}
