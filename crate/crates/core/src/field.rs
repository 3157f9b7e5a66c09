//! Arithmetic in the Mersenne prime field F_p, p = 2^31 - 1, and 4x4
//! matrices over it.
//!
//! Elements live in a `u32`; products go through a `u64` and are folded
//! with `x mod p = (x >> 31) + (x & p)`. Matrix rows are accumulated in
//! `u64` before a single reduction: four products of values below 2^31
//! sum to less than 2^64.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// The field modulus, 2^31 - 1.
pub const P: u32 = 0x7FFF_FFFF;

/// An element of F_p, always held in canonical form `0 <= v < p`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp(u32);

#[inline(always)]
const fn fold(x: u64) -> u64 {
    (x & P as u64) + (x >> 31)
}

/// Reduces any `u64` modulo p.
#[inline(always)]
pub const fn reduce_u64(x: u64) -> u32 {
    // Two folds bring any u64 below 2^32; a third brings it to at most p.
    let r = fold(fold(fold(x)));
    let r = r as u32;
    if r >= P {
        r - P
    } else {
        r
    }
}

impl Fp {
    pub const ZERO: Fp = Fp(0);
    pub const ONE: Fp = Fp(1);

    /// Reduces an arbitrary `u64` into the field.
    #[inline]
    pub const fn new(v: u64) -> Fp {
        Fp(reduce_u64(v))
    }

    /// Wraps a value already known to be canonical. Returns `None` when
    /// `v >= p`.
    #[inline]
    pub const fn from_canonical(v: u32) -> Option<Fp> {
        if v < P {
            Some(Fp(v))
        } else {
            None
        }
    }

    /// Maps a signed integer into the field.
    pub fn from_i64(v: i64) -> Fp {
        let r = v.rem_euclid(P as i64);
        Fp(r as u32)
    }

    #[inline]
    pub const fn value(self) -> u32 {
        self.0
    }

    /// Multiplicative inverse by the extended Euclidean algorithm; `None`
    /// for zero.
    pub fn inv(self) -> Option<Fp> {
        if self.0 == 0 {
            return None;
        }
        let (mut r0, mut r1) = (P as i64, self.0 as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(Fp::from_i64(t0))
    }

    /// `self^e` by square-and-multiply.
    pub fn pow(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = Fp::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Fp {
    type Output = Fp;
    #[inline]
    fn add(self, rhs: Fp) -> Fp {
        let s = self.0 + rhs.0;
        Fp(if s >= P { s - P } else { s })
    }
}

impl Sub for Fp {
    type Output = Fp;
    #[inline]
    fn sub(self, rhs: Fp) -> Fp {
        self + (-rhs)
    }
}

impl Neg for Fp {
    type Output = Fp;
    #[inline]
    fn neg(self) -> Fp {
        if self.0 == 0 {
            self
        } else {
            Fp(P - self.0)
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    #[inline]
    fn mul(self, rhs: Fp) -> Fp {
        Fp(reduce_u64(self.0 as u64 * rhs.0 as u64))
    }
}

/// A 4x4 matrix over F_p in row-major order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat4 {
    e: [u32; 16],
}

impl Mat4 {
    pub const IDENTITY: Mat4 = Mat4 {
        e: [1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1],
    };

    pub const ZERO: Mat4 = Mat4 { e: [0; 16] };

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Fp) -> Mat4 {
        let mut e = [0u32; 16];
        for (i, slot) in e.iter_mut().enumerate() {
            *slot = f(i / 4, i % 4).value();
        }
        Mat4 { e }
    }

    /// Builds a matrix from integer rows, reducing every entry mod p.
    pub fn from_i64_rows(rows: &[[i64; 4]; 4]) -> Mat4 {
        Mat4::from_fn(|r, c| Fp::from_i64(rows[r][c]))
    }

    /// Builds a matrix from canonical row-major words. `None` if any word
    /// is `>= p`.
    pub fn from_words(words: [u32; 16]) -> Option<Mat4> {
        if words.iter().all(|&w| w < P) {
            Some(Mat4 { e: words })
        } else {
            None
        }
    }

    pub fn diag(d: [Fp; 4]) -> Mat4 {
        Mat4::from_fn(|r, c| if r == c { d[r] } else { Fp::ZERO })
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Fp {
        Fp(self.e[row * 4 + col])
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: Fp) {
        self.e[row * 4 + col] = v.value();
    }

    /// Row-major canonical words.
    #[inline]
    pub fn words(&self) -> &[u32; 16] {
        &self.e
    }

    /// Matrix product reduced mod p.
    #[inline]
    pub fn mul(&self, rhs: &Mat4) -> Mat4 {
        let a = &self.e;
        let b = &rhs.e;
        let mut out = [0u32; 16];
        for r in 0..4 {
            let a0 = a[4 * r] as u64;
            let a1 = a[4 * r + 1] as u64;
            let a2 = a[4 * r + 2] as u64;
            let a3 = a[4 * r + 3] as u64;
            for c in 0..4 {
                let acc = a0 * b[c] as u64
                    + a1 * b[4 + c] as u64
                    + a2 * b[8 + c] as u64
                    + a3 * b[12 + c] as u64;
                out[4 * r + c] = reduce_u64(acc);
            }
        }
        Mat4 { e: out }
    }

    /// `self^e` by square-and-multiply; `pow(0)` is the identity.
    pub fn pow(&self, mut e: u64) -> Mat4 {
        let mut base = *self;
        let mut acc = Mat4::IDENTITY;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Determinant by Gaussian elimination over F_p.
    #[allow(clippy::needless_range_loop)]
    pub fn det(&self) -> Fp {
        let mut m = [[Fp::ZERO; 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.get(r, c);
            }
        }
        let mut det = Fp::ONE;
        for col in 0..4 {
            let Some(pivot) = (col..4).find(|&r| m[r][col] != Fp::ZERO) else {
                return Fp::ZERO;
            };
            if pivot != col {
                m.swap(pivot, col);
                det = -det;
            }
            let pv = m[col][col];
            det = det * pv;
            let pinv = pv.inv().expect("pivot is non-zero");
            for r in col + 1..4 {
                let factor = m[r][col] * pinv;
                if factor == Fp::ZERO {
                    continue;
                }
                for c in col..4 {
                    let sub = factor * m[col][c];
                    m[r][c] = m[r][c] - sub;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination; `None` for singular matrices.
    #[allow(clippy::needless_range_loop)]
    pub fn inverse(&self) -> Option<Mat4> {
        let mut m = [[Fp::ZERO; 8]; 4];
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] = self.get(r, c);
            }
            m[r][4 + r] = Fp::ONE;
        }
        for col in 0..4 {
            let pivot = (col..4).find(|&r| m[r][col] != Fp::ZERO)?;
            m.swap(pivot, col);
            let pinv = m[col][col].inv()?;
            for v in m[col].iter_mut() {
                *v = *v * pinv;
            }
            for r in 0..4 {
                if r == col {
                    continue;
                }
                let factor = m[r][col];
                if factor == Fp::ZERO {
                    continue;
                }
                for c in 0..8 {
                    let sub = factor * m[col][c];
                    m[r][c] = m[r][c] - sub;
                }
            }
        }
        Some(Mat4::from_fn(|r, c| m[r][4 + c]))
    }
}

impl Default for Mat4 {
    fn default() -> Self {
        Mat4::IDENTITY
    }
}

impl fmt::Debug for Mat4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.e.chunks(4).map(|row| row.to_vec()))
            .finish()
    }
}
