//! The hypertree: `d` layers of Merkle trees of height `h/d` whose leaves are
//! WOTS+ public keys. Layer 0 signs a FORS public key; each layer above signs
//! the root of the tree below. Trees are built on demand, so signing touches
//! exactly `d` trees.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::hash::{Digest, DIGEST_BYTES};
use crate::merkle;
use crate::params::SpinelParams;
use crate::tweak::{Adrs, AdrsType, HashCtx, Seed};
use crate::wots::{msg_to_basew, wots_leaf, wots_pk_from_sig, WotsSig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HtLayerSig {
    pub wots: WotsSig,
    /// Bottom-up siblings, `h/d` of them.
    pub auth: Vec<Digest>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HtSig(pub Vec<HtLayerSig>);

impl HtSig {
    pub fn write_to(&self, out: &mut Vec<u8>) {
        for layer in &self.0 {
            layer.wots.write_to(out);
            for a in &layer.auth {
                out.extend_from_slice(a.as_bytes());
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &SpinelParams) -> Result<HtSig> {
        let expected = params.ht_sig_bytes();
        if bytes.len() != expected {
            return Err(Error::Length {
                what: "hypertree signature",
                expected,
                got: bytes.len(),
            });
        }
        let mut digests = bytes
            .chunks_exact(DIGEST_BYTES)
            .map(|c| Digest::from_bytes_named(c, "hypertree signature"));
        let mut layers = Vec::with_capacity(params.d as usize);
        for _ in 0..params.d {
            let wots = digests
                .by_ref()
                .take(params.wots.len as usize)
                .collect::<Result<_>>()?;
            let auth = digests
                .by_ref()
                .take(params.tree_height() as usize)
                .collect::<Result<_>>()?;
            layers.push(HtLayerSig {
                wots: WotsSig(wots),
                auth,
            });
        }
        Ok(HtSig(layers))
    }
}

fn leaf_adrs(layer: u32, tree: u128, leaf: u32) -> Adrs {
    let mut a = Adrs::new(AdrsType::WotsHash);
    a.set_layer(layer).set_tree(tree).set_keypair(leaf);
    a
}

fn node(ctx: &HashCtx, layer: u32, tree: u128, z: u32, j: u32, l: &Digest, r: &Digest) -> Digest {
    let mut a = Adrs::new(AdrsType::Tree);
    a.set_layer(layer).set_tree(tree).set_height(z).set_index(j);
    ctx.thash(&a, &[l.as_bytes(), r.as_bytes()])
}

/// Builds tree `tree` of `layer`. With `sign = Some((leaf, digits))` the
/// WOTS+ signature of `digits` by that leaf and its authentication path are
/// captured during the build.
fn build(
    ctx: &HashCtx,
    sk_seed: &Seed,
    layer: u32,
    tree: u128,
    params: &SpinelParams,
    sign: Option<(u32, &[u32])>,
) -> (Digest, Option<HtLayerSig>) {
    let captured = OnceLock::new();
    let leaf = |i: u32| {
        let adrs = leaf_adrs(layer, tree, i);
        match sign {
            Some((target, digits)) if target == i => {
                let (pk, sig) = wots_leaf(ctx, sk_seed, &adrs, &params.wots, Some(digits));
                let _ = captured.set(sig.expect("digits supplied"));
                pk
            }
            _ => wots_leaf(ctx, sk_seed, &adrs, &params.wots, None).0,
        }
    };
    let node = |z: u32, j: u32, l: &Digest, r: &Digest| node(ctx, layer, tree, z, j, l, r);
    let (root, auth) = merkle::root_and_path(params.tree_height(), sign.map(|s| s.0), &leaf, &node);
    (
        root,
        captured.into_inner().map(|wots| HtLayerSig { wots, auth }),
    )
}

/// Root of tree `tree_idx` in `layer`. Layer `d - 1`, tree 0 is the public
/// root.
pub fn treehash(
    ctx: &HashCtx,
    layer: u32,
    tree_idx: u128,
    sk_seed: &Seed,
    params: &SpinelParams,
) -> Digest {
    build(ctx, sk_seed, layer, tree_idx, params, None).0
}

/// Root of the top layer: the scheme's public root.
pub fn ht_root(ctx: &HashCtx, sk_seed: &Seed, params: &SpinelParams) -> Digest {
    treehash(ctx, params.d - 1, 0, sk_seed, params)
}

fn check_indices(idx_tree: u128, idx_leaf: u32, params: &SpinelParams) -> Result<()> {
    let hp = params.tree_height();
    let tree_bits = params.h - hp;
    if tree_bits < 128 && idx_tree >> tree_bits != 0 {
        return Err(Error::IndexRange(format!(
            "tree index {idx_tree} needs more than {tree_bits} bits"
        )));
    }
    if idx_leaf >> hp != 0 {
        return Err(Error::IndexRange(format!(
            "leaf index {idx_leaf} needs more than {hp} bits"
        )));
    }
    Ok(())
}

/// Signs `msg_root` with the WOTS+ key at `(idx_tree, idx_leaf)` in layer 0
/// and certifies upward. Also returns the top root reached.
pub fn ht_sign_with_root(
    ctx: &HashCtx,
    msg_root: &Digest,
    idx_tree: u128,
    idx_leaf: u32,
    sk_seed: &Seed,
    params: &SpinelParams,
) -> Result<(HtSig, Digest)> {
    check_indices(idx_tree, idx_leaf, params)?;
    let hp = params.tree_height();
    let mut layers = Vec::with_capacity(params.d as usize);
    let mut root = *msg_root;
    let (mut tree, mut leaf) = (idx_tree, idx_leaf);
    for layer in 0..params.d {
        let digits = msg_to_basew(root.as_bytes(), &params.wots)?;
        let (next, sig) = build(ctx, sk_seed, layer, tree, params, Some((leaf, &digits)));
        layers.push(sig.expect("target leaf is visited"));
        root = next;
        leaf = (tree & ((1u128 << hp) - 1)) as u32;
        tree >>= hp;
    }
    Ok((HtSig(layers), root))
}

pub fn ht_sign(
    ctx: &HashCtx,
    msg_root: &Digest,
    idx_tree: u128,
    idx_leaf: u32,
    sk_seed: &Seed,
    params: &SpinelParams,
) -> Result<HtSig> {
    Ok(ht_sign_with_root(ctx, msg_root, idx_tree, idx_leaf, sk_seed, params)?.0)
}

/// Climbs the signature chain from `msg_root` and returns the top root; the
/// caller compares it with the public root.
pub fn ht_verify(
    ctx: &HashCtx,
    msg_root: &Digest,
    sig: &HtSig,
    idx_tree: u128,
    idx_leaf: u32,
    params: &SpinelParams,
) -> Result<Digest> {
    check_indices(idx_tree, idx_leaf, params)?;
    let hp = params.tree_height();
    let well_formed = sig.0.len() == params.d as usize
        && sig
            .0
            .iter()
            .all(|l| l.auth.len() == hp as usize && l.wots.0.len() == params.wots.len as usize);
    if !well_formed {
        return Err(Error::Length {
            what: "hypertree signature",
            expected: params.ht_sig_bytes(),
            got: sig
                .0
                .iter()
                .map(|l| l.auth.len() + l.wots.0.len())
                .sum::<usize>()
                * DIGEST_BYTES,
        });
    }
    let mut root = *msg_root;
    let (mut tree, mut leaf) = (idx_tree, idx_leaf);
    for (layer, ls) in sig.0.iter().enumerate() {
        let layer = layer as u32;
        let pk = wots_pk_from_sig(
            ctx,
            &ls.wots,
            root.as_bytes(),
            &leaf_adrs(layer, tree, leaf),
            &params.wots,
        )?;
        let node = |z: u32, j: u32, l: &Digest, r: &Digest| node(ctx, layer, tree, z, j, l, r);
        root = merkle::root_from_path(pk, leaf, &ls.auth, &node);
        leaf = (tree & ((1u128 << hp) - 1)) as u32;
        tree >>= hp;
    }
    Ok(root)
}
