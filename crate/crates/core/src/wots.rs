//! WOTS+ one-time signatures over the tweakable hash.
//!
//! Chains are addressed rather than masked: step `i` of chain `c` hashes
//! under a `WotsHash` address with chain word `c` and hash word `i`.

use crate::error::{Error, Result};
use crate::hash::{Digest, DIGEST_BYTES};
use crate::params::WotsParams;
use crate::tweak::{Adrs, AdrsType, HashCtx, Seed};

/// `len` chain values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WotsSig(pub Vec<Digest>);

impl WotsSig {
    pub fn byte_len(wots: &WotsParams) -> usize {
        wots.len as usize * DIGEST_BYTES
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        for d in &self.0 {
            out.extend_from_slice(d.as_bytes());
        }
    }
}

/// Splits `md` into `len1` base-w digits (most significant first) and
/// appends the `len2`-digit big-endian checksum `sum(w - 1 - digit)`.
pub fn msg_to_basew(md: &[u8], wots: &WotsParams) -> Result<Vec<u32>> {
    if md.len() != wots.msg_bytes() {
        return Err(Error::Length {
            what: "WOTS+ message",
            expected: wots.msg_bytes(),
            got: md.len(),
        });
    }
    let mut digits = Vec::with_capacity(wots.len as usize);
    let per_byte = 8 / wots.log_w;
    let mask = wots.w - 1;
    for &byte in md {
        for j in (0..per_byte).rev() {
            digits.push((byte as u32 >> (j * wots.log_w)) & mask);
        }
    }
    debug_assert_eq!(digits.len(), wots.len1 as usize);
    let mut csum: u32 = digits.iter().map(|d| wots.w - 1 - d).sum();
    let mut tail = vec![0u32; wots.len2 as usize];
    for slot in tail.iter_mut().rev() {
        *slot = csum & mask;
        csum >>= wots.log_w;
    }
    digits.extend(tail);
    Ok(digits)
}

/// Applies `steps` chain iterations starting at position `start`.
pub fn chain(
    ctx: &HashCtx,
    x: &Digest,
    start: u32,
    steps: u32,
    adrs: &Adrs,
    wots: &WotsParams,
) -> Result<Digest> {
    if start + steps > wots.w - 1 {
        return Err(Error::ChainRange {
            start,
            steps,
            max: wots.w - 1,
        });
    }
    Ok(chain_unchecked(ctx, x, start, steps, adrs))
}

fn chain_unchecked(ctx: &HashCtx, x: &Digest, start: u32, steps: u32, adrs: &Adrs) -> Digest {
    let mut a = *adrs;
    let mut cur = *x;
    for i in start..start + steps {
        a.set_hash_step(i);
        cur = ctx.thash(&a, &[cur.as_bytes()]);
    }
    cur
}

fn chain_adrs(adrs: &Adrs, chain: u32) -> Adrs {
    let mut a = *adrs;
    a.set_type(AdrsType::WotsHash)
        .set_keypair(adrs.keypair())
        .set_chain(chain);
    a
}

fn secret(ctx: &HashCtx, sk_seed: &Seed, adrs: &Adrs, chain: u32) -> Digest {
    let mut a = chain_adrs(adrs, chain);
    a.set_hash_step(0);
    ctx.prf(sk_seed, &a)
}

fn compress(ctx: &HashCtx, adrs: &Adrs, ends: &[Digest]) -> Digest {
    let mut a = *adrs;
    a.set_type(AdrsType::WotsPk).set_keypair(adrs.keypair());
    let parts: Vec<&[u8]> = ends.iter().map(|d| d.as_bytes().as_slice()).collect();
    ctx.thash(&a, &parts)
}

/// Computes a WOTS+ public key and, when `digits` is given, the signature
/// for those base-w digits as a by-product of the same chain walks.
pub(crate) fn wots_leaf(
    ctx: &HashCtx,
    sk_seed: &Seed,
    adrs: &Adrs,
    wots: &WotsParams,
    digits: Option<&[u32]>,
) -> (Digest, Option<WotsSig>) {
    let mut ends = Vec::with_capacity(wots.len as usize);
    let mut sig = digits.map(|_| Vec::with_capacity(wots.len as usize));
    for c in 0..wots.len {
        let a = chain_adrs(adrs, c);
        let mut cur = secret(ctx, sk_seed, adrs, c);
        match (&mut sig, digits) {
            (Some(sig), Some(digits)) => {
                let stop = digits[c as usize];
                cur = chain_unchecked(ctx, &cur, 0, stop, &a);
                sig.push(cur);
                cur = chain_unchecked(ctx, &cur, stop, wots.w - 1 - stop, &a);
            }
            _ => cur = chain_unchecked(ctx, &cur, 0, wots.w - 1, &a),
        }
        ends.push(cur);
    }
    (compress(ctx, adrs, &ends), sig.map(WotsSig))
}

/// Public key for the WOTS+ instance at `adrs` (layer, tree and key pair
/// taken from it).
pub fn wots_pk_gen(ctx: &HashCtx, sk_seed: &Seed, adrs: &Adrs, wots: &WotsParams) -> Digest {
    wots_leaf(ctx, sk_seed, adrs, wots, None).0
}

pub fn wots_sign(
    ctx: &HashCtx,
    md: &[u8],
    sk_seed: &Seed,
    adrs: &Adrs,
    wots: &WotsParams,
) -> Result<WotsSig> {
    let digits = msg_to_basew(md, wots)?;
    let sig = (0..wots.len)
        .map(|c| {
            let s = secret(ctx, sk_seed, adrs, c);
            chain_unchecked(ctx, &s, 0, digits[c as usize], &chain_adrs(adrs, c))
        })
        .collect();
    Ok(WotsSig(sig))
}

/// Recomputes the public key implied by `sig` on `md`.
pub fn wots_pk_from_sig(
    ctx: &HashCtx,
    sig: &WotsSig,
    md: &[u8],
    adrs: &Adrs,
    wots: &WotsParams,
) -> Result<Digest> {
    let digits = msg_to_basew(md, wots)?;
    if sig.0.len() != wots.len as usize {
        return Err(Error::Length {
            what: "WOTS+ signature",
            expected: WotsSig::byte_len(wots),
            got: sig.0.len() * DIGEST_BYTES,
        });
    }
    let ends: Vec<Digest> = sig
        .0
        .iter()
        .zip(&digits)
        .enumerate()
        .map(|(c, (s, &b))| chain_unchecked(ctx, s, b, wots.w - 1 - b, &chain_adrs(adrs, c as u32)))
        .collect();
    Ok(compress(ctx, adrs, &ends))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::hash;
    use crate::tweak::{prf, HashCounter};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn seeds(rng: &mut impl Rng) -> (Seed, Seed) {
        let mut a = [0u8; 64];
        let mut b = [0u8; 64];
        rng.fill(&mut a[..]);
        rng.fill(&mut b[..]);
        (Seed(a), Seed(b))
    }

    fn leaf_adrs(kp: u32) -> Adrs {
        let mut a = Adrs::new(AdrsType::WotsHash);
        a.set_layer(1).set_tree(5).set_keypair(kp);
        a
    }

    fn random_md(rng: &mut impl Rng) -> Vec<u8> {
        (0..64).map(|_| rng.gen()).collect()
    }

    #[test]
    fn basew_examples() {
        let w = WotsParams::new(256).unwrap();
        let d = msg_to_basew(&[0u8; 64], &w).unwrap();
        assert!(d[..64].iter().all(|&x| x == 0));
        assert_eq!(&d[64..], &[63, 192]);
        let d = msg_to_basew(&[0xFF; 64], &w).unwrap();
        assert!(d[..64].iter().all(|&x| x == 255));
        assert_eq!(&d[64..], &[0, 0]);
        assert!(msg_to_basew(&[0; 63], &w).is_err());

        let w16 = WotsParams::new(16).unwrap();
        let d = msg_to_basew(&[0xA5; 64], &w16).unwrap();
        assert_eq!(&d[..4], &[0xA, 0x5, 0xA, 0x5]);
        // 64 * (15 - 10) + 64 * (15 - 5) = 960 = 0x3C0
        assert_eq!(&d[128..], &[3, 12, 0]);
    }

    #[test]
    fn checksum_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for w in [16, 256] {
            let p = WotsParams::new(w).unwrap();
            for _ in 0..200 {
                let d = msg_to_basew(&random_md(&mut rng), &p).unwrap();
                assert_eq!(d.len(), p.len as usize);
                assert!(d.iter().all(|&x| x < w));
                let sum: u32 = d[..p.len1 as usize].iter().sum();
                let c = d[p.len1 as usize..].iter().fold(0, |acc, &x| acc * w + x);
                assert_eq!(sum + c, p.len1 * (w - 1));
            }
        }
    }

    #[test]
    fn chain_laws() {
        let p = WotsParams::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (_, pub_seed) = seeds(&mut rng);
        let ctx = HashCtx::new(&pub_seed);
        let x = hash(b"chain start");
        let a = chain_adrs(&leaf_adrs(3), 2);
        assert_eq!(chain(&ctx, &x, 4, 0, &a, &p).unwrap(), x);
        for _ in 0..10 {
            let i = rng.gen_range(0..=15);
            let j = rng.gen_range(0..=15 - i);
            let lhs = chain(&ctx, &chain(&ctx, &x, 0, i, &a, &p).unwrap(), i, j, &a, &p).unwrap();
            assert_eq!(lhs, chain(&ctx, &x, 0, i + j, &a, &p).unwrap());
        }
        let mut manual = x;
        let mut step = a;
        for i in 0..15 {
            step.set_hash_step(i);
            manual = crate::tweak::thash(&pub_seed, &step, manual.as_bytes());
        }
        assert_eq!(chain(&ctx, &x, 0, 15, &a, &p).unwrap(), manual);
        assert!(matches!(
            chain(&ctx, &x, 10, 6, &a, &p),
            Err(Error::ChainRange { .. })
        ));
    }

    #[test]
    fn sign_extremes() {
        let p = WotsParams::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let (sk, pk_seed) = seeds(&mut rng);
        let ctx = HashCtx::new(&pk_seed);
        let adrs = leaf_adrs(0);
        let sig = wots_sign(&ctx, &[0u8; 64], &sk, &adrs, &p).unwrap();
        for c in 0..p.len1 {
            let mut a = chain_adrs(&adrs, c);
            a.set_hash_step(0);
            assert_eq!(sig.0[c as usize], prf(&sk, &a));
        }
        let sig = wots_sign(&ctx, &[0xFF; 64], &sk, &adrs, &p).unwrap();
        let (pk, _) = wots_leaf(&ctx, &sk, &adrs, &p, None);
        let full = wots_leaf(&ctx, &sk, &adrs, &p, Some(&vec![15; p.len as usize]))
            .1
            .unwrap();
        assert_eq!(&sig.0[..p.len1 as usize], &full.0[..p.len1 as usize]);
        assert_eq!(
            wots_pk_from_sig(&ctx, &sig, &[0xFF; 64], &adrs, &p).unwrap(),
            pk
        );
        assert!(wots_sign(&ctx, &[0; 10], &sk, &adrs, &p).is_err());
    }

    #[test]
    fn roundtrip_and_capture() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for w in [16, 256] {
            let p = WotsParams::new(w).unwrap();
            let (sk, pk_seed) = seeds(&mut rng);
            let ctx = HashCtx::new(&pk_seed);
            let adrs = leaf_adrs(rng.gen_range(0..256));
            let pk = wots_pk_gen(&ctx, &sk, &adrs, &p);
            let md = random_md(&mut rng);
            let sig = wots_sign(&ctx, &md, &sk, &adrs, &p).unwrap();
            assert_eq!(wots_pk_from_sig(&ctx, &sig, &md, &adrs, &p).unwrap(), pk);
            let digits = msg_to_basew(&md, &p).unwrap();
            let (pk2, captured) = wots_leaf(&ctx, &sk, &adrs, &p, Some(&digits));
            assert_eq!(pk2, pk);
            assert_eq!(captured.unwrap(), sig);
        }
    }

    #[test]
    fn step_counts() {
        let p = WotsParams::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let (sk, pk_seed) = seeds(&mut rng);
        let counter = HashCounter::new();
        let ctx = HashCtx::with_counter(&pk_seed, &counter);
        let adrs = leaf_adrs(1);
        wots_pk_gen(&ctx, &sk, &adrs, &p);
        // len PRF calls, len * (w - 1) chain steps, one compression
        assert_eq!(counter.get(), (p.len * p.w + 1) as u64);
        counter.reset();
        let md = random_md(&mut rng);
        let sig = wots_sign(&ctx, &md, &sk, &adrs, &p).unwrap();
        let signed = counter.get();
        counter.reset();
        wots_pk_from_sig(&ctx, &sig, &md, &adrs, &p).unwrap();
        let verified = counter.get();
        assert_eq!(signed + verified, (p.len * p.w + 1) as u64);
    }

    #[test]
    fn distinct_keypairs_and_tamper_detection() {
        let p = WotsParams::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let (sk, pk_seed) = seeds(&mut rng);
        let ctx = HashCtx::new(&pk_seed);
        let pks: HashSet<Digest> = (0..100)
            .map(|kp| wots_pk_gen(&ctx, &sk, &leaf_adrs(kp), &p))
            .collect();
        assert_eq!(pks.len(), 100);

        let adrs = leaf_adrs(7);
        let md = random_md(&mut rng);
        let sig = wots_sign(&ctx, &md, &sk, &adrs, &p).unwrap();
        let pk = wots_pk_from_sig(&ctx, &sig, &md, &adrs, &p).unwrap();
        assert_eq!(pk, wots_pk_from_sig(&ctx, &sig, &md, &adrs, &p).unwrap());
        for _ in 0..100 {
            let mut bytes = Vec::new();
            sig.write_to(&mut bytes);
            let pos = rng.gen_range(0..bytes.len());
            // keep the word canonical: only touch the low 3 bytes of a word
            let pos = pos - pos % 4 + rng.gen_range(0..3);
            bytes[pos] ^= 1 << rng.gen_range(0..8);
            let bad = WotsSig(
                bytes
                    .chunks(64)
                    .map(|c| Digest::from_bytes(c).unwrap())
                    .collect(),
            );
            assert_ne!(wots_pk_from_sig(&ctx, &bad, &md, &adrs, &p).unwrap(), pk);
        }
    }
}
