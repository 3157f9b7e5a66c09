//! Key generation, signing and verification, and the byte codecs for keys
//! and signatures.

use crate::error::{Error, Result};
use crate::fors::{fors_pk_from_sig, fors_sign_with_pk, ForsSig};
use crate::hash::{hash_parts, Digest, DIGEST_BYTES};
use crate::hypertree::{ht_root, ht_sign, ht_verify, HtSig};
use crate::params::SpinelParams;
use crate::tweak::{h_msg, Adrs, AdrsType, HashCounter, HashCtx, Seed, SEED_BYTES};

/// Entropy consumed by [`keygen`]: `sk_seed || sk_prf || pk_seed`.
pub const KEYGEN_ENTROPY_BYTES: usize = 3 * SEED_BYTES;

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub sk_seed: Seed,
    pub sk_prf: Seed,
    pub pk_seed: Seed,
    pub pk_root: Digest,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub pk_seed: Seed,
    pub pk_root: Digest,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub r: Digest,
    pub fors: ForsSig,
    pub ht: HtSig,
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecretKey")
            .field("pk_root", &self.pk_root)
            .finish_non_exhaustive()
    }
}

impl SecretKey {
    pub fn public_key(&self) -> PublicKey {
        PublicKey {
            pk_seed: self.pk_seed,
            pk_root: self.pk_root,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SpinelParams::SK_BYTES);
        out.extend_from_slice(self.sk_seed.as_bytes());
        out.extend_from_slice(self.sk_prf.as_bytes());
        out.extend_from_slice(self.pk_seed.as_bytes());
        out.extend_from_slice(self.pk_root.as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<SecretKey> {
        check_len("secret key", SpinelParams::SK_BYTES, bytes)?;
        Ok(SecretKey {
            sk_seed: Seed::from_bytes(&bytes[..64])?,
            sk_prf: Seed::from_bytes(&bytes[64..128])?,
            pk_seed: Seed::from_bytes(&bytes[128..192])?,
            pk_root: Digest::from_bytes_named(&bytes[192..], "secret key")?,
        })
    }
}

impl PublicKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SpinelParams::PK_BYTES);
        out.extend_from_slice(self.pk_seed.as_bytes());
        out.extend_from_slice(self.pk_root.as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<PublicKey> {
        check_len("public key", SpinelParams::PK_BYTES, bytes)?;
        Ok(PublicKey {
            pk_seed: Seed::from_bytes(&bytes[..64])?,
            pk_root: Digest::from_bytes_named(&bytes[64..], "public key")?,
        })
    }
}

impl Signature {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(self.r.as_bytes());
        self.fors.write_to(&mut out);
        self.ht.write_to(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &SpinelParams) -> Result<Signature> {
        check_len("signature", params.sig_bytes(), bytes)?;
        let (r, rest) = bytes.split_at(DIGEST_BYTES);
        let (fors, ht) = rest.split_at(params.fors_sig_bytes());
        Ok(Signature {
            r: Digest::from_bytes_named(r, "signature")?,
            fors: ForsSig::from_bytes(fors, params)?,
            ht: HtSig::from_bytes(ht, params)?,
        })
    }
}

fn check_len(what: &'static str, expected: usize, bytes: &[u8]) -> Result<()> {
    if bytes.len() != expected {
        return Err(Error::Length {
            what,
            expected,
            got: bytes.len(),
        });
    }
    Ok(())
}

fn keygen_inner(
    entropy: &[u8],
    params: &SpinelParams,
    counter: Option<&HashCounter>,
) -> Result<(SecretKey, PublicKey)> {
    check_len("key generation entropy", KEYGEN_ENTROPY_BYTES, entropy)?;
    let sk_seed = Seed::from_bytes(&entropy[..64])?;
    let sk_prf = Seed::from_bytes(&entropy[64..128])?;
    let pk_seed = Seed::from_bytes(&entropy[128..])?;
    let ctx = match counter {
        Some(c) => HashCtx::with_counter(&pk_seed, c),
        None => HashCtx::new(&pk_seed),
    };
    let pk_root = ht_root(&ctx, &sk_seed, params);
    let sk = SecretKey {
        sk_seed,
        sk_prf,
        pk_seed,
        pk_root,
    };
    let pk = sk.public_key();
    Ok((sk, pk))
}

/// Derives a key pair from 192 bytes of entropy.
pub fn keygen(entropy: &[u8], params: &SpinelParams) -> Result<(SecretKey, PublicKey)> {
    keygen_inner(entropy, params, None)
}

/// [`keygen`], counting every tweakable-hash call into `counter`.
pub fn keygen_counted(
    entropy: &[u8],
    params: &SpinelParams,
    counter: &HashCounter,
) -> Result<(SecretKey, PublicKey)> {
    keygen_inner(entropy, params, Some(counter))
}

fn fors_adrs(idx_tree: u128, idx_leaf: u32) -> Adrs {
    let mut a = Adrs::new(AdrsType::ForsTree);
    a.set_tree(idx_tree).set_keypair(idx_leaf);
    a
}

fn sign_inner(
    msg: &[u8],
    sk: &SecretKey,
    opt_rand: Option<&[u8; 64]>,
    params: &SpinelParams,
    counter: Option<&HashCounter>,
) -> Signature {
    let zeros = [0u8; 64];
    let r = hash_parts(&[sk.sk_prf.as_bytes(), opt_rand.unwrap_or(&zeros), msg]);
    let mi = h_msg(&r, &sk.pk_seed, &sk.pk_root, msg, params);
    let ctx = match counter {
        Some(c) => HashCtx::with_counter(&sk.pk_seed, c),
        None => HashCtx::new(&sk.pk_seed),
    };
    let adrs = fors_adrs(mi.idx_tree, mi.idx_leaf);
    let (fors, fors_pk) =
        fors_sign_with_pk(&ctx, &mi.md, &sk.sk_seed, &adrs, params).expect("h_msg yields k*b bits");
    let ht = ht_sign(
        &ctx,
        &fors_pk,
        mi.idx_tree,
        mi.idx_leaf,
        &sk.sk_seed,
        params,
    )
    .expect("h_msg yields in-range indices");
    Signature { r, fors, ht }
}

/// Signs `msg`. The randomizer is `hash(sk_prf || opt_rand || msg)` with
/// `opt_rand` defaulting to 64 zero bytes, so signing is deterministic
/// unless fresh randomness is supplied.
pub fn sign(
    msg: &[u8],
    sk: &SecretKey,
    opt_rand: Option<&[u8; 64]>,
    params: &SpinelParams,
) -> Signature {
    sign_inner(msg, sk, opt_rand, params, None)
}

/// [`sign`], counting every tweakable-hash call into `counter`. The
/// randomizer and message hash are plain hashes and are not counted.
pub fn sign_counted(
    msg: &[u8],
    sk: &SecretKey,
    opt_rand: Option<&[u8; 64]>,
    params: &SpinelParams,
    counter: &HashCounter,
) -> Signature {
    sign_inner(msg, sk, opt_rand, params, Some(counter))
}

/// Checks `sig` on `msg` under `pk`. Uses only public inputs.
pub fn verify(msg: &[u8], sig: &Signature, pk: &PublicKey, params: &SpinelParams) -> bool {
    verify_inner(msg, sig, pk, params, None)
}

/// [`verify`], counting every tweakable-hash call into `counter`.
pub fn verify_counted(
    msg: &[u8],
    sig: &Signature,
    pk: &PublicKey,
    params: &SpinelParams,
    counter: &HashCounter,
) -> bool {
    verify_inner(msg, sig, pk, params, Some(counter))
}

fn verify_inner(
    msg: &[u8],
    sig: &Signature,
    pk: &PublicKey,
    params: &SpinelParams,
    counter: Option<&HashCounter>,
) -> bool {
    let mi = h_msg(&sig.r, &pk.pk_seed, &pk.pk_root, msg, params);
    let ctx = match counter {
        Some(c) => HashCtx::with_counter(&pk.pk_seed, c),
        None => HashCtx::new(&pk.pk_seed),
    };
    let adrs = fors_adrs(mi.idx_tree, mi.idx_leaf);
    let Ok(fors_pk) = fors_pk_from_sig(&ctx, &sig.fors, &mi.md, &adrs, params) else {
        return false;
    };
    match ht_verify(&ctx, &fors_pk, &sig.ht, mi.idx_tree, mi.idx_leaf, params) {
        Ok(root) => root == pk.pk_root,
        Err(_) => false,
    }
}

/// [`verify`] on an encoded signature; malformed bytes are a rejection.
pub fn verify_bytes(msg: &[u8], sig: &[u8], pk: &PublicKey, params: &SpinelParams) -> bool {
    match Signature::from_bytes(sig, params) {
        Ok(sig) => verify(msg, &sig, pk, params),
        Err(_) => false,
    }
}
