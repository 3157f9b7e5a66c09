//! Tweakable hashing `Th(P, ADRS, M) = H(P || ADRS || M)`, the keyed PRF
//! built on it, and message hashing into FORS/hypertree indices.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::hash::{hash_parts, Digest, PACKED_BYTES};
use crate::params::SpinelParams;

pub const SEED_BYTES: usize = 64;
pub const ADRS_BYTES: usize = 32;

/// A 64-byte secret or public seed. Unlike a [`Digest`] its words are
/// unconstrained.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub [u8; SEED_BYTES]);

impl Seed {
    pub fn from_bytes(bytes: &[u8]) -> Result<Seed> {
        let arr = bytes.try_into().map_err(|_| Error::Length {
            what: "seed",
            expected: SEED_BYTES,
            got: bytes.len(),
        })?;
        Ok(Seed(arr))
    }

    pub fn as_bytes(&self) -> &[u8; SEED_BYTES] {
        &self.0
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Seed(..)")
    }
}

/// Address type word. Codes follow the usual SPHINCS+ enumeration order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[repr(u32)]
pub enum AdrsType {
    #[default]
    WotsHash = 1,
    WotsPk = 2,
    Tree = 3,
    ForsTree = 4,
    ForsRoots = 5,
}

/// 32-byte hash address: `layer | tree (96 bits) | type | ctx[0..3]`, all
/// words big-endian.
///
/// Context words by type:
/// - `WotsHash`: key pair, chain, hash step
/// - `WotsPk`, `ForsRoots`: key pair
/// - `Tree`: 0, node height, node index
/// - `ForsTree`: key pair, node height, node index
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Adrs {
    layer: u32,
    tree: u128,
    kind: AdrsType,
    ctx: [u32; 3],
}

const TREE_MASK: u128 = (1u128 << 96) - 1;

impl Adrs {
    pub fn new(kind: AdrsType) -> Adrs {
        Adrs {
            kind,
            ..Adrs::default()
        }
    }

    pub fn layer(&self) -> u32 {
        self.layer
    }
    pub fn tree(&self) -> u128 {
        self.tree
    }
    pub fn kind(&self) -> AdrsType {
        self.kind
    }
    pub fn keypair(&self) -> u32 {
        self.ctx[0]
    }
    pub fn chain(&self) -> u32 {
        self.ctx[1]
    }
    pub fn hash_step(&self) -> u32 {
        self.ctx[2]
    }
    pub fn height(&self) -> u32 {
        self.ctx[1]
    }
    pub fn index(&self) -> u32 {
        self.ctx[2]
    }

    pub fn set_layer(&mut self, layer: u32) -> &mut Self {
        self.layer = layer;
        self
    }

    /// Sets the tree index; only the low 96 bits are kept.
    pub fn set_tree(&mut self, tree: u128) -> &mut Self {
        self.tree = tree & TREE_MASK;
        self
    }

    /// Changes the type and clears the context words.
    pub fn set_type(&mut self, kind: AdrsType) -> &mut Self {
        self.kind = kind;
        self.ctx = [0; 3];
        self
    }

    pub fn set_keypair(&mut self, kp: u32) -> &mut Self {
        self.ctx[0] = kp;
        self
    }
    pub fn set_chain(&mut self, chain: u32) -> &mut Self {
        self.ctx[1] = chain;
        self
    }
    pub fn set_hash_step(&mut self, step: u32) -> &mut Self {
        self.ctx[2] = step;
        self
    }
    pub fn set_height(&mut self, h: u32) -> &mut Self {
        self.ctx[1] = h;
        self
    }
    pub fn set_index(&mut self, i: u32) -> &mut Self {
        self.ctx[2] = i;
        self
    }

    pub fn to_bytes(&self) -> [u8; ADRS_BYTES] {
        let mut out = [0u8; ADRS_BYTES];
        out[0..4].copy_from_slice(&self.layer.to_be_bytes());
        out[4..16].copy_from_slice(&self.tree.to_be_bytes()[4..16]);
        out[16..20].copy_from_slice(&(self.kind as u32).to_be_bytes());
        for (i, w) in self.ctx.iter().enumerate() {
            out[20 + 4 * i..24 + 4 * i].copy_from_slice(&w.to_be_bytes());
        }
        out
    }
}

/// Counts tweakable-hash invocations (PRF calls included). Shared across
/// worker threads.
#[derive(Debug, Default)]
pub struct HashCounter(AtomicU64);

impl HashCounter {
    pub fn new() -> HashCounter {
        HashCounter::default()
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed)
    }

    #[inline]
    fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
}

/// The public seed plus an optional call counter; every scheme component
/// hashes through this.
#[derive(Clone, Copy, Debug)]
pub struct HashCtx<'a> {
    pub pub_seed: &'a Seed,
    counter: Option<&'a HashCounter>,
}

impl<'a> HashCtx<'a> {
    pub fn new(pub_seed: &'a Seed) -> HashCtx<'a> {
        HashCtx {
            pub_seed,
            counter: None,
        }
    }

    pub fn with_counter(pub_seed: &'a Seed, counter: &'a HashCounter) -> HashCtx<'a> {
        HashCtx {
            pub_seed,
            counter: Some(counter),
        }
    }

    #[inline]
    fn keyed(&self, key: &Seed, adrs: &Adrs, msg: &[&[u8]]) -> Digest {
        if let Some(c) = self.counter {
            c.bump();
        }
        let a = adrs.to_bytes();
        let mut parts: Vec<&[u8]> = Vec::with_capacity(2 + msg.len());
        parts.push(key.as_bytes());
        parts.push(&a);
        parts.extend_from_slice(msg);
        hash_parts(&parts)
    }

    /// `Th(pub_seed, adrs, msg[0] || msg[1] || ...)`.
    #[inline]
    pub fn thash(&self, adrs: &Adrs, msg: &[&[u8]]) -> Digest {
        self.keyed(self.pub_seed, adrs, msg)
    }

    /// `Th(seed, adrs, "")`, counted like any other tweakable hash.
    #[inline]
    pub fn prf(&self, seed: &Seed, adrs: &Adrs) -> Digest {
        self.keyed(seed, adrs, &[])
    }
}

/// `H(pub_seed || adrs || msg)`.
pub fn thash(pub_seed: &Seed, adrs: &Adrs, msg: &[u8]) -> Digest {
    HashCtx::new(pub_seed).thash(adrs, &[msg])
}

/// Secret-element derivation: `thash(seed, adrs, "")`.
pub fn prf(seed: &Seed, adrs: &Adrs) -> Digest {
    HashCtx::new(seed).prf(seed, adrs)
}

/// FORS message digest and hypertree position for one signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageIndices {
    /// `k * b` bits, left-aligned, unused trailing bits zero.
    pub md: Vec<u8>,
    pub idx_tree: u128,
    pub idx_leaf: u32,
}

fn take_field(bytes: &[u8], bits: u32) -> u128 {
    let v = bytes.iter().fold(0u128, |acc, &b| (acc << 8) | b as u128);
    if bits == 0 {
        0
    } else {
        v & (u128::MAX >> (128 - bits))
    }
}

/// Derives `(md, idx_tree, idx_leaf)` from one hash of
/// `R || pk_seed || pk_root || msg`.
///
/// Fields are read in order from the digest's 31-bit packed form (62
/// bytes) so that no field contains the always-zero top bit of a word:
/// `md` takes `ceil(kb/8)` bytes masked to `kb` bits, then the tree index
/// `ceil((h - h/d)/8)` bytes, then the leaf index `ceil((h/d)/8)` bytes,
/// each big-endian and masked to its width.
pub fn h_msg(
    r: &Digest,
    pk_seed: &Seed,
    pk_root: &Digest,
    msg: &[u8],
    params: &SpinelParams,
) -> MessageIndices {
    let d = hash_parts(&[r.as_bytes(), pk_seed.as_bytes(), pk_root.as_bytes(), msg]);
    let stream = d.packed();
    let md_bits = params.md_bits();
    let tree_bits = params.h - params.tree_height();
    let leaf_bits = params.tree_height();
    let md_len = md_bits.div_ceil(8) as usize;
    let tree_len = tree_bits.div_ceil(8) as usize;
    let leaf_len = leaf_bits.div_ceil(8) as usize;
    debug_assert!(md_len + tree_len + leaf_len <= PACKED_BYTES);

    let mut md = stream[..md_len].to_vec();
    let spare = md_len as u32 * 8 - md_bits;
    if spare > 0 {
        *md.last_mut().unwrap() &= 0xFFu8 << spare;
    }
    let idx_tree = take_field(&stream[md_len..md_len + tree_len], tree_bits);
    let off = md_len + tree_len;
    let idx_leaf = take_field(&stream[off..off + leaf_len], leaf_bits) as u32;
    MessageIndices {
        md,
        idx_tree,
        idx_leaf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::hash;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn random_seed(rng: &mut impl Rng) -> Seed {
        let mut s = [0u8; 64];
        rng.fill(&mut s[..]);
        Seed(s)
    }

    fn random_adrs(rng: &mut impl Rng) -> Adrs {
        let mut a = Adrs::new(AdrsType::WotsHash);
        a.set_layer(rng.gen_range(0..16))
            .set_tree(rng.gen::<u128>())
            .set_keypair(rng.gen())
            .set_chain(rng.gen())
            .set_hash_step(rng.gen());
        a
    }

    #[test]
    fn adrs_layout() {
        let mut a = Adrs::new(AdrsType::ForsTree);
        a.set_layer(0x01020304)
            .set_tree(0xAABB_CCDD_0000_0001_0000_0002_0000_0003)
            .set_keypair(7)
            .set_height(2)
            .set_index(9);
        let b = a.to_bytes();
        assert_eq!(&b[0..4], &[1, 2, 3, 4]);
        assert_eq!(&b[4..16], &[0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 3]);
        assert_eq!(&b[16..20], &[0, 0, 0, 4]);
        assert_eq!(&b[20..32], &[0, 0, 0, 7, 0, 0, 0, 2, 0, 0, 0, 9]);
    }

    #[test]
    fn set_type_clears_context() {
        let mut a = Adrs::new(AdrsType::WotsHash);
        a.set_keypair(3).set_chain(4).set_hash_step(5);
        a.set_type(AdrsType::Tree);
        assert_eq!(a.to_bytes()[20..], [0u8; 12]);
    }

    #[test]
    fn thash_is_hash_of_concatenation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let seed = random_seed(&mut rng);
        let adrs = random_adrs(&mut rng);
        let msg = b"message body";
        let mut cat = seed.0.to_vec();
        cat.extend_from_slice(&adrs.to_bytes());
        cat.extend_from_slice(msg);
        assert_eq!(thash(&seed, &adrs, msg), hash(&cat));
        assert_eq!(prf(&seed, &adrs), thash(&seed, &adrs, b""));
        assert_eq!(prf(&seed, &adrs), prf(&seed, &adrs));
    }

    #[test]
    fn every_adrs_field_separates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let seed = random_seed(&mut rng);
            let base = random_adrs(&mut rng);
            let msg: Vec<u8> = (0..64).map(|_| rng.gen()).collect();
            let reference = thash(&seed, &base, &msg);
            let mut variants = Vec::new();
            variants.push(*base.clone().set_layer(base.layer() ^ 1));
            variants.push(*base.clone().set_tree(base.tree() ^ (1 << 95)));
            variants.push(
                *base
                    .clone()
                    .set_type(AdrsType::WotsPk)
                    .set_keypair(base.keypair()),
            );
            variants.push(*base.clone().set_keypair(base.keypair() ^ 1));
            variants.push(*base.clone().set_chain(base.chain() ^ 1));
            variants.push(*base.clone().set_hash_step(base.hash_step() ^ 1));
            for v in variants {
                assert_ne!(v, base);
                assert_ne!(thash(&seed, &v, &msg), reference);
            }
        }
    }

    #[test]
    fn prf_distinct_over_many_addresses() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let seed = random_seed(&mut rng);
        let mut adrs_seen = HashSet::new();
        let mut out = HashSet::new();
        while adrs_seen.len() < 10_000 {
            let a = random_adrs(&mut rng);
            if adrs_seen.insert(a) {
                assert!(out.insert(prf(&seed, &a)));
            }
        }
    }

    #[test]
    fn counter_counts_thash_and_prf() {
        let seed = Seed([1; 64]);
        let counter = HashCounter::new();
        let ctx = HashCtx::with_counter(&seed, &counter);
        let a = Adrs::new(AdrsType::Tree);
        ctx.thash(&a, &[b"x"]);
        ctx.prf(&seed, &a);
        assert_eq!(counter.get(), 2);
        counter.reset();
        assert_eq!(counter.get(), 0);
    }

    #[test]
    fn h_msg_split_for_f1() {
        let params = SpinelParams::named("F1").unwrap();
        assert_eq!(params.md_bits(), 308);
        assert_eq!(params.h - params.tree_height(), 56);
        assert_eq!(params.tree_height(), 8);
        assert!(params.md_bits() + params.h <= 496);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = hash(b"randomizer");
        let root = hash(b"root");
        let pk_seed = random_seed(&mut rng);
        let out = h_msg(&r, &pk_seed, &root, b"msg", &params);
        assert_eq!(out.md.len(), 39);
        assert_eq!(out.md[38] & 0x0F, 0);
        // Fields are read from the packed digest at fixed byte offsets.
        let packed =
            hash_parts(&[r.as_bytes(), pk_seed.as_bytes(), root.as_bytes(), b"msg"]).packed();
        assert_eq!(&out.md[..38], &packed[..38]);
        assert_eq!(out.idx_tree, take_field(&packed[39..46], 56));
        assert_eq!(out.idx_leaf, packed[46] as u32);
        assert_eq!(out, h_msg(&r, &pk_seed, &root, b"msg", &params));
    }

    #[test]
    fn h_msg_fields_in_range() {
        let params = SpinelParams::desk();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pk_seed = random_seed(&mut rng);
        let root = hash(b"root");
        for i in 0..10_000u32 {
            let r = hash(&i.to_be_bytes());
            let out = h_msg(&r, &pk_seed, &root, &i.to_le_bytes(), &params);
            assert!(out.idx_tree < 1 << (params.h - params.tree_height()));
            assert!(out.idx_leaf < 1 << params.tree_height());
            assert_eq!(out.md.len() * 8, params.md_bits() as usize);
        }
    }
}
