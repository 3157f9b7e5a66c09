//! Byte to ternary-symbol encoding.
//!
//! Each byte is written in base 3, most significant trit first, with
//! leading zero trits dropped. Byte 0 keeps a single `0` trit so that it is
//! still visible to the walk. Trits `t` become walk symbols `t + 1`.

use crate::error::{Error, Result};

const fn build_trit_table() -> ([[u8; 6]; 256], [u8; 256]) {
    let mut trits = [[0u8; 6]; 256];
    let mut lens = [0u8; 256];
    let mut b = 0;
    while b < 256 {
        let mut digits = [0u8; 6];
        let mut n = 0;
        let mut v = b;
        while v > 0 {
            digits[n] = (v % 3) as u8;
            v /= 3;
            n += 1;
        }
        if n == 0 {
            n = 1;
        }
        // digits[] is little-endian; store most significant first.
        let mut j = 0;
        while j < n {
            trits[b][j] = digits[n - 1 - j];
            j += 1;
        }
        lens[b] = n as u8;
        b += 1;
    }
    (trits, lens)
}

const TRIT_TABLE: ([[u8; 6]; 256], [u8; 256]) = build_trit_table();

/// Base-3 digits of `b`, most significant first, leading zeros removed.
#[inline]
pub fn byte_to_trits(b: u8) -> &'static [u8] {
    let (table, lens) = &TRIT_TABLE;
    &table[b as usize][..lens[b as usize] as usize]
}

/// A validated sequence of walk symbols, each in `{1, 2, 3}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolSeq(Vec<u8>);

impl SymbolSeq {
    pub fn new(symbols: Vec<u8>) -> Result<SymbolSeq> {
        if let Some(&bad) = symbols.iter().find(|s| !(1..=3).contains(*s)) {
            return Err(Error::InvalidSymbol(bad));
        }
        Ok(SymbolSeq(symbols))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Encodes a byte string into walk symbols.
pub fn encode_message(data: &[u8]) -> SymbolSeq {
    let symbols = data
        .iter()
        .flat_map(|&b| byte_to_trits(b).iter().map(|t| t + 1))
        .collect();
    SymbolSeq(symbols)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent base-3 conversion: repeated division, then reverse.
    fn base3_oracle(mut b: u32) -> Vec<u8> {
        if b == 0 {
            return vec![0];
        }
        let mut out = Vec::new();
        while b > 0 {
            out.insert(0, (b % 3) as u8);
            b /= 3;
        }
        out
    }

    #[test]
    fn trit_examples() {
        assert_eq!(byte_to_trits(0), &[0]);
        assert_eq!(byte_to_trits(5), &[1, 2]);
        assert_eq!(byte_to_trits(255), &[1, 0, 0, 1, 1, 0]);
    }

    #[test]
    fn trits_match_oracle_and_reconstruct() {
        for b in 0..=255u8 {
            let t = byte_to_trits(b);
            assert_eq!(t, base3_oracle(b as u32).as_slice());
            let value = t.iter().fold(0u32, |acc, &d| acc * 3 + d as u32);
            assert_eq!(value, b as u32);
            assert!(t.len() <= 6);
            assert!(b == 0 || t[0] != 0, "leading zero kept for {b}");
        }
    }

    #[test]
    fn encode_examples() {
        assert!(encode_message(b"").is_empty());
        assert_eq!(encode_message(&[5]).as_slice(), &[2, 3]);
        assert_eq!(encode_message(&[0, 0]).as_slice(), &[1, 1]);
    }

    #[test]
    fn symbol_seq_validation() {
        assert!(SymbolSeq::new(vec![1, 2, 3]).is_ok());
        assert!(matches!(
            SymbolSeq::new(vec![1, 4]),
            Err(Error::InvalidSymbol(4))
        ));
        assert!(matches!(
            SymbolSeq::new(vec![0]),
            Err(Error::InvalidSymbol(0))
        ));
    }
}
