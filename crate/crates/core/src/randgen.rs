//! Bit streams from the hash for external randomness testing, plus the
//! frequency (monobit) and runs tests as built-in smoke checks.
//!
//! Stream `s` hashes the 16-byte messages `be64(s) || be64(ctr)` for
//! `ctr = 0, 1, ...` and concatenates the outputs, truncating the last.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::hash::{hash, DIGEST_BYTES, PACKED_BYTES};
use crate::par;

/// How each digest contributes bits to a stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Packing {
    /// 496 bits per call: the low 31 bits of each word. Default.
    #[default]
    Packed,
    /// All 512 serialized bits. The top bit of every 32-bit word is
    /// always zero, so these streams are visibly biased.
    Raw,
}

impl Packing {
    pub fn bits_per_call(self) -> u64 {
        match self {
            Packing::Packed => PACKED_BYTES as u64 * 8,
            Packing::Raw => DIGEST_BYTES as u64 * 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamSpec {
    pub count: u64,
    pub bits_per_stream: u64,
    /// Stream ids run from `id_offset` to `id_offset + count - 1`.
    pub id_offset: u64,
    pub packing: Packing,
}

impl StreamSpec {
    pub fn new(count: u64, bits_per_stream: u64) -> StreamSpec {
        StreamSpec {
            count,
            bits_per_stream,
            id_offset: 0,
            packing: Packing::Packed,
        }
    }

    pub fn total_bytes(&self) -> u64 {
        (self.count * self.bits_per_stream).div_ceil(8)
    }

    pub fn calls_per_stream(&self) -> u64 {
        self.bits_per_stream.div_ceil(self.packing.bits_per_call())
    }
}

/// A bit string, most significant bit first within each byte.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bits {
    bytes: Vec<u8>,
    len: usize,
}

impl Bits {
    pub fn new() -> Bits {
        Bits::default()
    }

    /// The first `len` bits of `bytes`.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Bits {
        assert!(len <= bytes.len() * 8);
        let mut b = Bits {
            bytes: bytes[..len.div_ceil(8)].to_vec(),
            len,
        };
        b.clear_tail();
        b
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Bits {
        let mut b = Bits::new();
        for bit in bits {
            b.push(bit);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Appends the first `n` bits of `bytes`.
    pub fn extend_bytes(&mut self, bytes: &[u8], n: usize) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&bytes[..n.div_ceil(8)]);
            self.len += n;
            self.clear_tail();
        } else {
            for i in 0..n {
                self.push((bytes[i / 8] >> (7 - i % 8)) & 1 == 1);
            }
        }
    }

    pub fn append(&mut self, other: &Bits) {
        self.extend_bytes(&other.bytes, other.len);
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    fn clear_tail(&mut self) {
        self.bytes.truncate(self.len.div_ceil(8));
        if !self.len.is_multiple_of(8) {
            *self.bytes.last_mut().unwrap() &= 0xFFu8 << (8 - self.len % 8);
        }
    }
}

/// The `bits` leading bits of stream `id`.
pub fn stream(id: u64, bits: u64, packing: Packing) -> Bits {
    let per = packing.bits_per_call();
    let mut out = Bits::new();
    let mut ctr = 0u64;
    while (out.len() as u64) < bits {
        let mut msg = [0u8; 16];
        msg[..8].copy_from_slice(&id.to_be_bytes());
        msg[8..].copy_from_slice(&ctr.to_be_bytes());
        let d = hash(&msg);
        let take = per.min(bits - out.len() as u64) as usize;
        match packing {
            Packing::Packed => out.extend_bytes(&d.packed(), take),
            Packing::Raw => out.extend_bytes(d.as_bytes(), take),
        }
        ctr += 1;
    }
    out
}

/// All streams of `spec`, concatenated bit by bit in id order.
pub fn generate_streams(spec: &StreamSpec) -> Bits {
    let ids: Vec<u64> = (0..spec.count).map(|i| spec.id_offset + i).collect();
    let parts = par::map_slice(&ids, |&id| stream(id, spec.bits_per_stream, spec.packing));
    let mut out = Bits::new();
    for p in &parts {
        out.append(p);
    }
    out
}

/// Writes [`generate_streams`] to `path` and returns the byte count.
pub fn write_streams(spec: &StreamSpec, path: &Path) -> Result<u64> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let bits = generate_streams(spec);
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    w.write_all(bits.as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)?;
    Ok(bits.as_bytes().len() as u64)
}

/// Smallest input the tests accept.
pub const MIN_TEST_BITS: usize = 100;

fn check_len(bits: &Bits) -> Result<usize> {
    if bits.len() < MIN_TEST_BITS {
        return Err(Error::TooFewBits {
            needed: MIN_TEST_BITS,
            got: bits.len(),
        });
    }
    Ok(bits.len())
}

/// Frequency test: `erfc(|S_n| / sqrt(2n))` with `S_n` the +/-1 sum.
pub fn monobit_test(bits: &Bits) -> Result<f64> {
    let n = check_len(bits)?;
    let s = 2.0 * bits.count_ones() as f64 - n as f64;
    Ok(erfc(s.abs() / (2.0 * n as f64).sqrt()))
}

/// Runs test. Fails its precondition when the ones proportion is more
/// than `2 / sqrt(n)` away from one half.
pub fn runs_test(bits: &Bits) -> Result<f64> {
    let n = check_len(bits)?;
    let nf = n as f64;
    let pi = bits.count_ones() as f64 / nf;
    let tau = 2.0 / nf.sqrt();
    if (pi - 0.5).abs() >= tau {
        return Err(Error::Precondition(format!(
            "ones proportion {pi:.6} is not within {tau:.6} of 1/2"
        )));
    }
    let mut runs = 1u64;
    let mut prev = bits.get(0);
    for i in 1..n {
        let cur = bits.get(i);
        runs += (cur != prev) as u64;
        prev = cur;
    }
    let q = pi * (1.0 - pi);
    Ok(erfc(
        (runs as f64 - 2.0 * nf * q).abs() / (2.0 * (2.0 * nf).sqrt() * q),
    ))
}
