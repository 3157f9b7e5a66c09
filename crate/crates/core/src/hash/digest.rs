use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Mat4, P};

/// Digest length in bytes: 16 little-endian 32-bit words.
pub const DIGEST_BYTES: usize = 64;

/// Bytes produced by [`Digest::packed`]: 16 words of 31 bits.
pub const PACKED_BYTES: usize = 62;

/// A 512-bit digest: a matrix of SL4(F_p) serialized row-major, each
/// entry as a 32-bit little-endian word below p.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest([u8; DIGEST_BYTES]);

impl Digest {
    pub fn from_matrix(m: &Mat4) -> Digest {
        let mut out = [0u8; DIGEST_BYTES];
        for (chunk, w) in out.chunks_exact_mut(4).zip(m.words()) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        Digest(out)
    }

    /// Parses 64 bytes, rejecting any word that is not below p.
    pub fn from_bytes(bytes: &[u8]) -> Result<Digest> {
        Self::from_bytes_named(bytes, "digest")
    }

    pub(crate) fn from_bytes_named(bytes: &[u8], what: &'static str) -> Result<Digest> {
        let arr: [u8; DIGEST_BYTES] = bytes.try_into().map_err(|_| Error::Length {
            what,
            expected: DIGEST_BYTES,
            got: bytes.len(),
        })?;
        for (i, chunk) in arr.chunks_exact(4).enumerate() {
            if u32::from_le_bytes(chunk.try_into().unwrap()) >= P {
                return Err(Error::FieldOverflow {
                    what,
                    offset: 4 * i,
                });
            }
        }
        Ok(Digest(arr))
    }

    pub fn words(&self) -> [u32; 16] {
        let mut w = [0u32; 16];
        for (slot, chunk) in w.iter_mut().zip(self.0.chunks_exact(4)) {
            *slot = u32::from_le_bytes(chunk.try_into().unwrap());
        }
        w
    }

    pub fn to_matrix(&self) -> Mat4 {
        Mat4::from_words(self.words()).expect("digest words are canonical")
    }

    #[inline]
    pub fn as_bytes(&self) -> &[u8; DIGEST_BYTES] {
        &self.0
    }

    /// The low 31 bits of each word, concatenated most significant bit
    /// first. The top bit of every serialized word is always zero, so this
    /// is the digest with its fixed bits removed.
    pub fn packed(&self) -> [u8; PACKED_BYTES] {
        let mut out = [0u8; PACKED_BYTES];
        let mut acc: u64 = 0;
        let mut nbits = 0;
        let mut pos = 0;
        for w in self.words() {
            acc = (acc << 31) | w as u64;
            nbits += 31;
            while nbits >= 8 {
                nbits -= 8;
                out[pos] = (acc >> nbits) as u8;
                pos += 1;
            }
            acc &= (1u64 << nbits) - 1;
        }
        debug_assert_eq!((pos, nbits), (PACKED_BYTES, 0));
        out
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl AsRef<[u8]> for Digest {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fp;

    #[test]
    fn identity_serialization() {
        let d = Digest::from_matrix(&Mat4::IDENTITY);
        let w = d.words();
        for (i, &v) in w.iter().enumerate() {
            assert_eq!(v, u32::from([0, 5, 10, 15].contains(&i)));
        }
    }

    #[test]
    fn little_endian_entry() {
        let mut m = Mat4::IDENTITY;
        m.set(0, 0, Fp::new(P as u64 - 1));
        let d = Digest::from_matrix(&m);
        assert_eq!(&d.as_bytes()[..4], &[0xFE, 0xFF, 0xFF, 0x7F]);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(
            Digest::from_bytes(&[0u8; 63]),
            Err(Error::Length { .. })
        ));
        let mut bytes = [0u8; 64];
        bytes[8..12].copy_from_slice(&P.to_le_bytes());
        assert!(matches!(
            Digest::from_bytes(&bytes),
            Err(Error::FieldOverflow { offset: 8, .. })
        ));
        bytes[8..12].copy_from_slice(&(P - 1).to_le_bytes());
        assert!(Digest::from_bytes(&bytes).is_ok());
    }

    #[test]
    fn packed_layout() {
        let mut words = [0u32; 16];
        words[0] = P - 1; // 31 bits: 1...10
        words[15] = 1;
        let d = Digest::from_matrix(&Mat4::from_words(words).unwrap());
        let p = d.packed();
        assert_eq!(&p[..3], &[0xFF, 0xFF, 0xFF]);
        // bits 24..31 of the stream: 1111110 then the first bit of word 1
        assert_eq!(p[3], 0b1111_1100);
        assert_eq!(p[61], 1);
    }

    proptest::proptest! {
        #[test]
        fn roundtrip(words in proptest::array::uniform16(0u32..P)) {
            let m = Mat4::from_words(words).unwrap();
            let d = Digest::from_matrix(&m);
            proptest::prop_assert_eq!(Digest::from_bytes(d.as_bytes()).unwrap(), d);
            proptest::prop_assert_eq!(d.to_matrix(), m);
        }
    }
}
