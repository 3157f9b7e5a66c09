//! Binary Merkle tree evaluation shared by FORS and the hypertree.

use crate::hash::Digest;
use crate::par;

/// Subtrees at or below this height are built level by level in memory.
const FLAT_HEIGHT: u32 = 10;

/// Root of a tree with `2^height` leaves, plus the authentication path
/// (bottom-up siblings) of leaf `target` when one is requested.
///
/// `leaf(i)` produces leaf `i`; `node(z, j, left, right)` produces node `j`
/// at height `z` (leaves are height 0).
pub(crate) fn root_and_path<L, N>(
    height: u32,
    target: Option<u32>,
    leaf: &L,
    node: &N,
) -> (Digest, Vec<Digest>)
where
    L: Fn(u32) -> Digest + Sync,
    N: Fn(u32, u32, &Digest, &Digest) -> Digest + Sync,
{
    subtree(height, 0, target, leaf, node)
}

fn subtree<L, N>(z: u32, idx: u32, target: Option<u32>, leaf: &L, node: &N) -> (Digest, Vec<Digest>)
where
    L: Fn(u32) -> Digest + Sync,
    N: Fn(u32, u32, &Digest, &Digest) -> Digest + Sync,
{
    if z <= FLAT_HEIGHT {
        return flat(z, idx, target, leaf, node);
    }
    let mid = (2 * idx + 1) << (z - 1);
    let (lt, rt) = match target {
        Some(t) if t < mid => (Some(t), None),
        Some(t) => (None, Some(t)),
        None => (None, None),
    };
    let ((l, lpath), (r, rpath)) = par::join(
        || subtree(z - 1, 2 * idx, lt, leaf, node),
        || subtree(z - 1, 2 * idx + 1, rt, leaf, node),
    );
    let path = match target {
        Some(_) if lt.is_some() => {
            let mut p = lpath;
            p.push(r);
            p
        }
        Some(_) => {
            let mut p = rpath;
            p.push(l);
            p
        }
        None => Vec::new(),
    };
    (node(z, idx, &l, &r), path)
}

fn flat<L, N>(z: u32, idx: u32, target: Option<u32>, leaf: &L, node: &N) -> (Digest, Vec<Digest>)
where
    L: Fn(u32) -> Digest + Sync,
    N: Fn(u32, u32, &Digest, &Digest) -> Digest + Sync,
{
    let first = idx << z;
    let mut level = par::map_range(1usize << z, |i| leaf(first + i as u32));
    let mut path = Vec::with_capacity(if target.is_some() { z as usize } else { 0 });
    let mut pos = target.map(|t| (t - first) as usize);
    for height in 1..=z {
        if let Some(p) = pos {
            path.push(level[p ^ 1]);
            pos = Some(p >> 1);
        }
        let base = idx << (z - height);
        level = level
            .chunks_exact(2)
            .enumerate()
            .map(|(j, pair)| node(height, base + j as u32, &pair[0], &pair[1]))
            .collect();
    }
    (level[0], path)
}

/// Climbs from `leaf` at position `index` to the root using `path`.
pub(crate) fn root_from_path<N>(leaf: Digest, mut index: u32, path: &[Digest], node: &N) -> Digest
where
    N: Fn(u32, u32, &Digest, &Digest) -> Digest,
{
    let mut cur = leaf;
    for (z, sib) in path.iter().enumerate() {
        let parent = index >> 1;
        cur = if index & 1 == 0 {
            node(z as u32 + 1, parent, &cur, sib)
        } else {
            node(z as u32 + 1, parent, sib, &cur)
        };
        index = parent;
    }
    cur
}
