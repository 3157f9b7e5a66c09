//! The Cayley-walk hash: bytes are encoded as ternary symbols that drive a
//! non-backtracking walk over {A, B, A^-1, B^-1} in SL4(F_p); the final
//! matrix is the 512-bit digest.

mod digest;
mod encoding;
pub mod generators;
mod walk;

pub use digest::{Digest, DIGEST_BYTES, PACKED_BYTES};
pub use encoding::{byte_to_trits, encode_message, SymbolSeq};
pub use generators::{generators, Generator, Generators};
pub use walk::{select_first, select_next, walk, walk_path};

use crate::field::Mat4;
use walk::{byte_table, WalkState};

/// Hashes a byte string.
pub fn hash(data: &[u8]) -> Digest {
    hash_parts(&[data])
}

/// Hashes the concatenation of `parts` without materializing it.
pub fn hash_parts(parts: &[&[u8]]) -> Digest {
    Digest::from_matrix(&walk_parts(parts))
}

/// The walk matrix for the concatenation of `parts`.
pub fn walk_parts(parts: &[&[u8]]) -> Mat4 {
    let table = byte_table();
    let mut acc = Mat4::IDENTITY;
    let mut state = WalkState::Start;
    for part in parts {
        for &b in *part {
            (acc, state) = table.step(&acc, state, b);
        }
    }
    acc
}
