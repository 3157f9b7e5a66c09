//! The non-backtracking walk on the Cayley graph of SL4(F_p).

use std::sync::OnceLock;

use super::encoding::{byte_to_trits, SymbolSeq};
use super::generators::{generators, Generator};
use crate::error::{Error, Result};
use crate::field::Mat4;

fn check_symbol(x: u8) -> Result<usize> {
    match x {
        1..=3 => Ok(x as usize - 1),
        _ => Err(Error::InvalidSymbol(x)),
    }
}

/// First step: 1 -> A, 2 -> B, 3 -> A^-1.
pub fn select_first(x: u8) -> Result<Generator> {
    const FIRST: [Generator; 3] = [Generator::A, Generator::B, Generator::AInv];
    Ok(FIRST[check_symbol(x)?])
}

/// Later steps: the `x`-th entry of `[A, B, A^-1, B^-1]` with the inverse
/// of `prev` removed.
pub fn select_next(prev: Generator, x: u8) -> Result<Generator> {
    let idx = check_symbol(x)?;
    let banned = prev.inverse();
    Ok(Generator::ALL
        .into_iter()
        .filter(|&g| g != banned)
        .nth(idx)
        .expect("three generators remain"))
}

/// Realized generator sequence for a symbol sequence.
pub fn walk_path(s: &SymbolSeq) -> Vec<Generator> {
    let mut path: Vec<Generator> = Vec::with_capacity(s.len());
    for &x in s.as_slice() {
        let g = match path.last() {
            None => select_first(x),
            Some(&prev) => select_next(prev, x),
        }
        .expect("SymbolSeq holds valid symbols");
        path.push(g);
    }
    path
}

/// Product of the walk's generators, left to right; identity when empty.
pub fn walk(s: &SymbolSeq) -> Mat4 {
    let gens = generators();
    walk_path(s)
        .into_iter()
        .fold(Mat4::IDENTITY, |acc, g| acc.mul(gens.matrix(g)))
}

/// Walk state before consuming a byte: either nothing consumed yet or the
/// last generator applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum WalkState {
    Start,
    After(Generator),
}

impl WalkState {
    #[inline]
    fn slot(self) -> usize {
        match self {
            WalkState::After(g) => g.index(),
            WalkState::Start => 4,
        }
    }
}

/// For each (state, byte): the product of the byte's generators and the
/// final generator. Turns the walk into one matrix product per input byte.
pub(crate) struct ByteTable {
    mats: Vec<Mat4>,
    last: Vec<Generator>,
}

impl ByteTable {
    fn build() -> ByteTable {
        let gens = generators();
        let mut mats = Vec::with_capacity(5 * 256);
        let mut last = Vec::with_capacity(5 * 256);
        let states = Generator::ALL
            .iter()
            .map(|&g| WalkState::After(g))
            .chain([WalkState::Start]);
        for state in states {
            for b in 0..=255u8 {
                let mut m = Mat4::IDENTITY;
                let mut cur = state;
                for &t in byte_to_trits(b) {
                    let g = match cur {
                        WalkState::Start => select_first(t + 1),
                        WalkState::After(prev) => select_next(prev, t + 1),
                    }
                    .expect("trits map to valid symbols");
                    m = m.mul(gens.matrix(g));
                    cur = WalkState::After(g);
                }
                let WalkState::After(g) = cur else {
                    unreachable!("every byte emits at least one symbol")
                };
                mats.push(m);
                last.push(g);
            }
        }
        ByteTable { mats, last }
    }

    #[inline]
    pub(crate) fn step(&self, acc: &Mat4, state: WalkState, byte: u8) -> (Mat4, WalkState) {
        let i = state.slot() * 256 + byte as usize;
        (acc.mul(&self.mats[i]), WalkState::After(self.last[i]))
    }
}

pub(crate) fn byte_table() -> &'static ByteTable {
    static TABLE: OnceLock<ByteTable> = OnceLock::new();
    TABLE.get_or_init(ByteTable::build)
}
