//! FORS: `k` Merkle trees of `2^b` secret leaves. A signature reveals one
//! leaf per tree with its authentication path; the public key compresses
//! the `k` roots.
//!
//! Node addresses use type [`AdrsType::ForsTree`] with the height word set
//! and the index word holding the node's position across the whole forest,
//! so leaf `i` of tree `j` sits at index `j * 2^b + i`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::hash::{Digest, DIGEST_BYTES};
use crate::merkle;
use crate::par;
use crate::params::SpinelParams;
use crate::tweak::{Adrs, AdrsType, HashCtx, Seed};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForsTreeSig {
    pub secret: Digest,
    /// Bottom-up siblings, `b` of them.
    pub auth: Vec<Digest>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForsSig(pub Vec<ForsTreeSig>);

impl ForsSig {
    pub fn write_to(&self, out: &mut Vec<u8>) {
        for t in &self.0 {
            out.extend_from_slice(t.secret.as_bytes());
            for a in &t.auth {
                out.extend_from_slice(a.as_bytes());
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &SpinelParams) -> Result<ForsSig> {
        let expected = params.fors_sig_bytes();
        if bytes.len() != expected {
            return Err(Error::Length {
                what: "FORS signature",
                expected,
                got: bytes.len(),
            });
        }
        let mut digests = bytes
            .chunks_exact(DIGEST_BYTES)
            .map(|c| Digest::from_bytes_named(c, "FORS signature"));
        let mut trees = Vec::with_capacity(params.k as usize);
        for _ in 0..params.k {
            let secret = digests.next().unwrap()?;
            let auth = digests
                .by_ref()
                .take(params.b as usize)
                .collect::<Result<_>>()?;
            trees.push(ForsTreeSig { secret, auth });
        }
        Ok(ForsSig(trees))
    }
}

/// Splits `md` into `k` groups of `b` bits, most significant bit first.
pub fn message_to_indices(md: &[u8], k: u32, b: u32) -> Result<Vec<u32>> {
    let needed = (k * b) as usize;
    if md.len() * 8 < needed {
        return Err(Error::TooFewBits {
            needed,
            got: md.len() * 8,
        });
    }
    let bit = |i: usize| (md[i / 8] >> (7 - i % 8)) & 1;
    Ok((0..k as usize)
        .map(|j| (0..b as usize).fold(0u32, |acc, i| (acc << 1) | bit(j * b as usize + i) as u32))
        .collect())
}

fn node_adrs(base: &Adrs, height: u32, index: u32) -> Adrs {
    let mut a = *base;
    a.set_type(AdrsType::ForsTree)
        .set_keypair(base.keypair())
        .set_height(height)
        .set_index(index);
    a
}

fn secret(ctx: &HashCtx, sk_seed: &Seed, base: &Adrs, global: u32) -> Digest {
    ctx.prf(sk_seed, &node_adrs(base, 0, global))
}

fn leaf_from_secret(ctx: &HashCtx, base: &Adrs, global: u32, sk: &Digest) -> Digest {
    ctx.thash(&node_adrs(base, 0, global), &[sk.as_bytes()])
}

#[allow(clippy::too_many_arguments)]
fn tree_node(
    ctx: &HashCtx,
    base: &Adrs,
    tree: u32,
    b: u32,
    z: u32,
    j: u32,
    l: &Digest,
    r: &Digest,
) -> Digest {
    let global = (tree << (b - z)) + j;
    ctx.thash(&node_adrs(base, z, global), &[l.as_bytes(), r.as_bytes()])
}

/// Builds one tree; with a target leaf, also returns its secret and path.
fn tree(
    ctx: &HashCtx,
    sk_seed: &Seed,
    base: &Adrs,
    tree_index: u32,
    params: &SpinelParams,
    target: Option<u32>,
) -> (Digest, Option<ForsTreeSig>) {
    let b = params.b;
    let offset = tree_index << b;
    let revealed = OnceLock::new();
    let leaf = |i: u32| {
        let sk = secret(ctx, sk_seed, base, offset + i);
        if Some(i) == target {
            let _ = revealed.set(sk);
        }
        leaf_from_secret(ctx, base, offset + i, &sk)
    };
    let node =
        |z: u32, j: u32, l: &Digest, r: &Digest| tree_node(ctx, base, tree_index, b, z, j, l, r);
    let (root, auth) = merkle::root_and_path(b, target, &leaf, &node);
    let sig = revealed
        .into_inner()
        .map(|secret| ForsTreeSig { secret, auth });
    (root, sig)
}

/// Root of FORS tree `tree_index` of the instance at `adrs` (layer, tree
/// and key pair are taken from it).
pub fn fors_tree_root(
    ctx: &HashCtx,
    tree_index: u32,
    sk_seed: &Seed,
    adrs: &Adrs,
    params: &SpinelParams,
) -> Result<Digest> {
    if tree_index >= params.k {
        return Err(Error::IndexRange(format!(
            "FORS tree {tree_index} >= k = {}",
            params.k
        )));
    }
    Ok(tree(ctx, sk_seed, adrs, tree_index, params, None).0)
}

fn compress(ctx: &HashCtx, base: &Adrs, roots: &[Digest]) -> Digest {
    let mut a = *base;
    a.set_type(AdrsType::ForsRoots).set_keypair(base.keypair());
    let parts: Vec<&[u8]> = roots.iter().map(|d| d.as_bytes().as_slice()).collect();
    ctx.thash(&a, &parts)
}

pub fn fors_pk(ctx: &HashCtx, sk_seed: &Seed, adrs: &Adrs, params: &SpinelParams) -> Digest {
    let roots = par::map_range(params.k as usize, |j| {
        tree(ctx, sk_seed, adrs, j as u32, params, None).0
    });
    compress(ctx, adrs, &roots)
}

/// Signs `md` and returns the public key computed along the way.
pub fn fors_sign_with_pk(
    ctx: &HashCtx,
    md: &[u8],
    sk_seed: &Seed,
    adrs: &Adrs,
    params: &SpinelParams,
) -> Result<(ForsSig, Digest)> {
    let indices = message_to_indices(md, params.k, params.b)?;
    let built = par::map_range(params.k as usize, |j| {
        let (root, sig) = tree(ctx, sk_seed, adrs, j as u32, params, Some(indices[j]));
        (root, sig.expect("target leaf is visited"))
    });
    let (roots, trees): (Vec<Digest>, Vec<ForsTreeSig>) = built.into_iter().unzip();
    Ok((ForsSig(trees), compress(ctx, adrs, &roots)))
}

pub fn fors_sign(
    ctx: &HashCtx,
    md: &[u8],
    sk_seed: &Seed,
    adrs: &Adrs,
    params: &SpinelParams,
) -> Result<ForsSig> {
    Ok(fors_sign_with_pk(ctx, md, sk_seed, adrs, params)?.0)
}

/// Recomputes the FORS public key implied by `sig` on `md`.
pub fn fors_pk_from_sig(
    ctx: &HashCtx,
    sig: &ForsSig,
    md: &[u8],
    adrs: &Adrs,
    params: &SpinelParams,
) -> Result<Digest> {
    let indices = message_to_indices(md, params.k, params.b)?;
    if sig.0.len() != params.k as usize || sig.0.iter().any(|t| t.auth.len() != params.b as usize) {
        return Err(Error::Length {
            what: "FORS signature",
            expected: params.fors_sig_bytes(),
            got: sig.0.iter().map(|t| 1 + t.auth.len()).sum::<usize>() * DIGEST_BYTES,
        });
    }
    let roots: Vec<Digest> = sig
        .0
        .iter()
        .zip(&indices)
        .enumerate()
        .map(|(j, (t, &m))| {
            let j = j as u32;
            let global = (j << params.b) + m;
            let leaf = leaf_from_secret(ctx, adrs, global, &t.secret);
            let node = |z: u32, i: u32, l: &Digest, r: &Digest| {
                tree_node(ctx, adrs, j, params.b, z, i, l, r)
            };
            merkle::root_from_path(leaf, m, &t.auth, &node)
        })
        .collect();
    Ok(compress(ctx, adrs, &roots))
}
