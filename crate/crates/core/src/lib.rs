//! Stateless hash-based signatures whose only hash is a non-backtracking
//! Cayley-walk hash over SL4(F_p), p = 2^31 - 1.
//!
//! The scheme follows the SPHINCS+ layout: a FORS few-time signature on the
//! message digest, certified by a hypertree of WOTS+ one-time keys.

pub mod analysis;
pub mod bench;
pub mod error;
pub mod field;
pub mod fors;
pub mod hash;
pub mod hypertree;
mod merkle;
pub mod par;
pub mod params;
pub mod randgen;
pub mod sign;
pub mod tweak;
pub mod wots;

pub use error::{Error, Result};
pub use hash::{hash, Digest};
pub use params::SpinelParams;
pub use sign::{keygen, sign, verify, PublicKey, SecretKey, Signature};
