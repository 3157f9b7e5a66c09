//! Parameter sets and their derived quantities.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hash::{DIGEST_BYTES, PACKED_BYTES};

/// Hash output length in bits.
pub const N_BITS: u32 = 512;

/// Bits available to message hashing (packed digest).
pub const MSG_HASH_BITS: u32 = PACKED_BYTES as u32 * 8;

/// WOTS+ lengths for a Winternitz parameter at n = 512.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WotsParams {
    pub w: u32,
    pub log_w: u32,
    pub len1: u32,
    pub len2: u32,
    pub len: u32,
}

impl WotsParams {
    pub fn new(w: u32) -> Result<WotsParams> {
        if !matches!(w, 16 | 256) {
            return Err(Error::Params(format!("w must be 16 or 256, got {w}")));
        }
        let log_w = w.trailing_zeros();
        let len1 = N_BITS.div_ceil(log_w);
        // len2 = floor(log_w(len1 * (w - 1))) + 1, computed exactly.
        let max_sum = len1 as u64 * (w as u64 - 1);
        let mut len2 = 1;
        let mut pow = w as u64;
        while pow <= max_sum {
            pow *= w as u64;
            len2 += 1;
        }
        Ok(WotsParams {
            w,
            log_w,
            len1,
            len2,
            len: len1 + len2,
        })
    }

    /// Digest bytes signed by one WOTS+ instance.
    pub fn msg_bytes(&self) -> usize {
        (self.len1 * self.log_w / 8) as usize
    }
}

/// A full parameter set `(h, d, b, k, w)` at n = 64 bytes.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SpinelParams {
    /// Total hypertree height.
    pub h: u32,
    /// Hypertree layers.
    pub d: u32,
    /// FORS tree height.
    pub b: u32,
    /// FORS tree count.
    pub k: u32,
    pub wots: WotsParams,
}

pub const NAMED_SETS: [(&str, [u32; 5]); 20] = [
    ("F1", [64, 8, 14, 22, 256]),
    ("F2", [72, 9, 16, 16, 256]),
    ("F3", [72, 9, 17, 15, 256]),
    ("F4", [63, 7, 10, 38, 256]),
    ("F5", [63, 7, 14, 23, 256]),
    ("F6", [72, 8, 7, 45, 256]),
    ("F7", [72, 8, 8, 37, 256]),
    ("F8", [72, 8, 16, 16, 256]),
    ("F9", [72, 8, 17, 15, 256]),
    ("F10", [72, 9, 21, 12, 256]),
    ("P1", [72, 4, 17, 15, 256]),
    ("P2", [72, 4, 16, 16, 256]),
    ("P3", [72, 4, 21, 12, 256]),
    ("P4", [80, 4, 9, 28, 256]),
    ("P5", [76, 4, 10, 26, 256]),
    ("P6", [80, 4, 7, 38, 256]),
    ("P7", [64, 4, 14, 22, 256]),
    ("P8", [75, 5, 19, 13, 256]),
    ("P9", [80, 5, 9, 28, 256]),
    ("P10", [75, 5, 14, 18, 256]),
];

/// Small parameters that sign in well under a second.
pub const DESK: [u32; 5] = [8, 2, 4, 8, 16];

impl SpinelParams {
    pub fn new(h: u32, d: u32, b: u32, k: u32, w: u32) -> Result<SpinelParams> {
        let wots = WotsParams::new(w)?;
        if d == 0 || h == 0 || !h.is_multiple_of(d) {
            return Err(Error::Params(format!("d = {d} must divide h = {h}")));
        }
        let hp = h / d;
        if hp > 31 {
            return Err(Error::Params(format!("layer height h/d = {hp} exceeds 31")));
        }
        if h - hp > 96 {
            return Err(Error::Params(format!(
                "tree index needs {} bits, at most 96",
                h - hp
            )));
        }
        if b == 0 || k == 0 {
            return Err(Error::Params("b and k must be positive".into()));
        }
        if b > 26 || (k as u64) << b > u32::MAX as u64 {
            return Err(Error::Params(format!(
                "k * 2^b = {k} * 2^{b} exceeds 32-bit leaf indices"
            )));
        }
        let used = (k * b).div_ceil(8) + (h - hp).div_ceil(8) + hp.div_ceil(8);
        if used * 8 > MSG_HASH_BITS {
            return Err(Error::Params(format!(
                "message hash needs {} bytes, only {} available",
                used, PACKED_BYTES
            )));
        }
        Ok(SpinelParams { h, d, b, k, wots })
    }

    pub fn from_array([h, d, b, k, w]: [u32; 5]) -> Result<SpinelParams> {
        SpinelParams::new(h, d, b, k, w)
    }

    /// Looks up `F1`..`F10`, `P1`..`P10` or `desk` (case-insensitive).
    pub fn named(name: &str) -> Result<SpinelParams> {
        if name.eq_ignore_ascii_case("desk") {
            return Ok(SpinelParams::desk());
        }
        NAMED_SETS
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, row)| SpinelParams::from_array(*row).expect("named sets are valid"))
            .ok_or_else(|| Error::UnknownParamSet(name.to_string()))
    }

    pub fn desk() -> SpinelParams {
        SpinelParams::from_array(DESK).expect("desk set is valid")
    }

    pub fn w(&self) -> u32 {
        self.wots.w
    }

    /// Height of each hypertree layer, `h / d`.
    pub fn tree_height(&self) -> u32 {
        self.h / self.d
    }

    /// Leaves per FORS tree, `2^b`.
    pub fn fors_leaves(&self) -> u32 {
        1 << self.b
    }

    pub fn md_bits(&self) -> u32 {
        self.k * self.b
    }

    pub fn as_array(&self) -> [u32; 5] {
        [self.h, self.d, self.b, self.k, self.wots.w]
    }

    pub fn fors_sig_bytes(&self) -> usize {
        (self.k * (self.b + 1)) as usize * DIGEST_BYTES
    }

    pub fn ht_sig_bytes(&self) -> usize {
        (self.d * (self.wots.len + self.tree_height())) as usize * DIGEST_BYTES
    }

    pub fn sig_bytes(&self) -> usize {
        DIGEST_BYTES + self.fors_sig_bytes() + self.ht_sig_bytes()
    }

    pub const PK_BYTES: usize = 2 * DIGEST_BYTES;
    pub const SK_BYTES: usize = 4 * DIGEST_BYTES;
}

impl fmt::Debug for SpinelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SpinelParams(h={}, d={}, b={}, k={}, w={})",
            self.h, self.d, self.b, self.k, self.wots.w
        )
    }
}

impl fmt::Display for SpinelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.h, self.d, self.b, self.k, self.wots.w
        )
    }
}

impl FromStr for SpinelParams {
    type Err = Error;

    /// Accepts a set name or five integers `h d b k w` separated by spaces
    /// or commas.
    fn from_str(s: &str) -> Result<SpinelParams> {
        let nums: Vec<&str> = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if nums.len() == 5 {
            let mut row = [0u32; 5];
            for (slot, tok) in row.iter_mut().zip(&nums) {
                *slot = tok
                    .parse()
                    .map_err(|_| Error::Params(format!("not an integer: {tok:?}")))?;
            }
            return SpinelParams::from_array(row);
        }
        SpinelParams::named(s.trim())
    }
}

/// Parses a registry: one `h d b k w` row per line; `#` starts a comment.
pub fn parse_registry(text: &str) -> Result<Vec<SpinelParams>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty())
        .map(|(i, line)| {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 5 {
                return Err(Error::Params(format!(
                    "registry line {}: expected 5 fields, got {}",
                    i + 1,
                    toks.len()
                )));
            }
            line.parse()
                .map_err(|e| Error::Params(format!("registry line {}: {e}", i + 1)))
        })
        .collect()
}

/// The 56 admissible 256-bit parameter sets, shipped with the crate.
pub const PARAMETER_SPACE: &str = include_str!("../data/parameter_space.txt");

pub fn parameter_space() -> Vec<SpinelParams> {
    parse_registry(PARAMETER_SPACE).expect("shipped registry is valid")
}
