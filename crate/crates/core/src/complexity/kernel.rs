//! Allocation-free interpreter and pruned candidate generator for the
//! complexity search.
//!
//! Semantics are identical to [`crate::hvm::run`] with input cell 0; the
//! tests below check that on every program up to 18 bits.

use crate::hvm::Opcode;

const INC: u8 = Opcode::Inc as u8;
const DEC: u8 = Opcode::Dec as u8;
const LEFT: u8 = Opcode::Left as u8;
const RIGHT: u8 = Opcode::Right as u8;
const OUT: u8 = Opcode::Out as u8;
const BEGIN: u8 = Opcode::LoopBegin as u8;
const END: u8 = Opcode::LoopEnd as u8;

/// Outcome of a kernel run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Exit {
    Halted,
    StepLimit,
    Aborted,
}

/// Reusable tape buffer. The head can never get further than `step_cap`
/// cells from the origin, so a fixed buffer of `2 * step_cap + 1` cells
/// suffices; only the touched window is cleared between runs.
pub(crate) struct Scratch {
    tape: Vec<u8>,
    jumps: Vec<u32>,
    stack: Vec<u32>,
    origin: usize,
    step_cap: u64,
}

impl Scratch {
    pub(crate) fn new(step_cap: u64) -> Self {
        let origin = step_cap as usize + 1;
        Self {
            tape: vec![0; 2 * origin + 1],
            jumps: Vec::new(),
            stack: Vec::new(),
            origin,
            step_cap,
        }
    }

    /// Runs `body` followed by an implicit `HALT`. `observe(bit, index)`
    /// returning false aborts the run. Returns the exit and the number of
    /// bits emitted.
    pub(crate) fn run<F>(&mut self, body: &[u8], mut observe: F) -> (Exit, usize)
    where
        F: FnMut(u8, usize) -> bool,
    {
        self.jumps.clear();
        self.jumps.resize(body.len(), 0);
        self.stack.clear();
        for (i, &op) in body.iter().enumerate() {
            if op == BEGIN {
                self.stack.push(i as u32);
            } else if op == END {
                let j = self.stack.pop().expect("candidate bodies are balanced");
                self.jumps[i] = j;
                self.jumps[j as usize] = i as u32;
            }
        }

        let tape = &mut self.tape;
        let jumps = &self.jumps;
        let mut head = self.origin;
        let (mut lo, mut hi) = (head, head);
        let mut pc = 0usize;
        let mut steps = 0u64;
        let mut emitted = 0usize;
        let exit = loop {
            if steps >= self.step_cap {
                break Exit::StepLimit;
            }
            steps += 1;
            let Some(&op) = body.get(pc) else {
                break Exit::Halted;
            };
            match op {
                INC => tape[head] = tape[head].wrapping_add(1),
                DEC => tape[head] = tape[head].wrapping_sub(1),
                LEFT => {
                    head -= 1;
                    lo = lo.min(head);
                }
                RIGHT => {
                    head += 1;
                    hi = hi.max(head);
                }
                OUT => {
                    let ok = observe(tape[head] & 1, emitted);
                    emitted += 1;
                    if !ok {
                        break Exit::Aborted;
                    }
                }
                BEGIN => {
                    if tape[head] == 0 {
                        pc = jumps[pc] as usize;
                    }
                }
                END => {
                    if tape[head] != 0 {
                        pc = jumps[pc] as usize;
                    }
                }
                _ => unreachable!("HALT never appears inside a body"),
            }
            pc += 1;
        };
        tape[lo..=hi].fill(0);
        (exit, emitted)
    }
}

/// Incremental pruning state while building a body left to right.
///
/// A body is rejected when some strictly shorter program has the same
/// output within the same step budget, or when a symmetric image of it is
/// lexicographically smaller. Neither can be the canonical-order first
/// producer of any output, so skipping them never changes a search result.
/// The rules assume input cell 0.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Shape {
    last: Option<u8>,
    depth: u32,
    seen_write: bool,
    seen_move: bool,
}

impl Shape {
    /// Whether `op` may follow, given `remaining` instructions after it.
    #[inline]
    pub(crate) fn allows(&self, op: u8, remaining: usize) -> bool {
        // Before the first INC/DEC the tape is blank: moves are translations
        // and loops are dead. INC/DEC symmetry: the first write is INC.
        if !self.seen_write && op != OUT && op != INC {
            return false;
        }
        // Mirror symmetry: the first move is LEFT.
        if !self.seen_move && op == RIGHT {
            return false;
        }
        if let Some(last) = self.last {
            let cancels = matches!(
                (last, op),
                (INC, DEC) | (DEC, INC) | (LEFT, RIGHT) | (RIGHT, LEFT) | (BEGIN, END) | (END, BEGIN)
            );
            if cancels {
                return false;
            }
        }
        let depth = match op {
            BEGIN => self.depth + 1,
            END if self.depth == 0 => return false,
            END => self.depth - 1,
            _ => self.depth,
        };
        if depth as usize > remaining {
            return false;
        }
        // Trailing instructions that cannot emit are dead.
        if remaining == 0 && op != OUT && op != END {
            return false;
        }
        true
    }

    #[inline]
    pub(crate) fn push(&self, op: u8) -> Shape {
        Shape {
            last: Some(op),
            depth: match op {
                BEGIN => self.depth + 1,
                END => self.depth - 1,
                _ => self.depth,
            },
            seen_write: self.seen_write || op == INC || op == DEC,
            seen_move: self.seen_move || op == LEFT || op == RIGHT,
        }
    }
}

/// Bodies of exactly `prefix_len` instructions that can start a pruned
/// body of `body_len` instructions, in lexicographic order.
pub(crate) fn prefixes(body_len: usize, prefix_len: usize) -> Vec<(Vec<u8>, Shape)> {
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(prefix_len);
    fn rec(buf: &mut Vec<u8>, shape: Shape, body_len: usize, prefix_len: usize, out: &mut Vec<(Vec<u8>, Shape)>) {
        if buf.len() == prefix_len {
            out.push((buf.clone(), shape));
            return;
        }
        let remaining = body_len - buf.len() - 1;
        for op in 0..=END {
            if shape.allows(op, remaining) {
                buf.push(op);
                rec(buf, shape.push(op), body_len, prefix_len, out);
                buf.pop();
            }
        }
    }
    rec(&mut buf, Shape::default(), body_len, prefix_len, &mut out);
    out
}

/// Calls `visit` on every pruned completion of `prefix` to `body_len`
/// instructions, in lexicographic order. `visit` returning false stops the
/// walk.
pub(crate) fn complete<F>(prefix: &[u8], shape: Shape, body_len: usize, mut visit: F)
where
    F: FnMut(&[u8]) -> bool,
{
    let mut buf = Vec::with_capacity(body_len);
    buf.extend_from_slice(prefix);
    fn rec<F: FnMut(&[u8]) -> bool>(buf: &mut Vec<u8>, shape: Shape, body_len: usize, visit: &mut F) -> bool {
        if buf.len() == body_len {
            return visit(buf);
        }
        let remaining = body_len - buf.len() - 1;
        for op in 0..=END {
            if shape.allows(op, remaining) {
                buf.push(op);
                let go_on = rec(buf, shape.push(op), body_len, visit);
                buf.pop();
                if !go_on {
                    return false;
                }
            }
        }
        true
    }
    rec(&mut buf, shape, body_len, &mut visit);
}

/// Appends `HALT` and packs the body into program bits.
pub(crate) fn body_to_opcodes(body: &[u8]) -> Vec<Opcode> {
    body.iter()
        .map(|&c| Opcode::from_code(c))
        .chain(std::iter::once(Opcode::Halt))
        .collect()
}
