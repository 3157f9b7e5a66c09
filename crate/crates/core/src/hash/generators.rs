//! Walk generators {A, B, A^-1, B^-1} and their startup self-check.
//!
//! The base integer matrices come from `data/generators.txt` (or the file
//! named by `SPINEL_GENERATORS` at build time). The walk uses their 10th
//! powers reduced mod p.

use std::collections::HashSet;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::field::{Fp, Mat4};

include!(concat!(env!("OUT_DIR"), "/generators.rs"));

/// Exponent applied to the base matrices.
pub const GENERATOR_POWER: u64 = 10;

/// Longest word length covered by the distinctness (girth) check.
pub const GIRTH_CHECK_LEN: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    A,
    B,
    AInv,
    BInv,
}

impl Generator {
    /// Canonical order used by the non-backtracking selection rule.
    pub const ALL: [Generator; 4] = [Generator::A, Generator::B, Generator::AInv, Generator::BInv];

    pub const fn inverse(self) -> Generator {
        match self {
            Generator::A => Generator::AInv,
            Generator::B => Generator::BInv,
            Generator::AInv => Generator::A,
            Generator::BInv => Generator::B,
        }
    }

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }
}

/// The four generator matrices, indexed by [`Generator::index`].
#[derive(Clone, Debug)]
pub struct Generators {
    mats: [Mat4; 4],
}

impl Generators {
    /// Builds generators from integer base matrices and validates them.
    pub fn from_base(base_a: &[[i64; 4]; 4], base_b: &[[i64; 4]; 4]) -> Result<Generators> {
        let ta = Mat4::from_i64_rows(base_a);
        let tb = Mat4::from_i64_rows(base_b);
        for (name, m) in [("A", &ta), ("B", &tb)] {
            if m.det() != Fp::ONE {
                return Err(Error::Constants(format!(
                    "det of base {name} is {}",
                    m.det()
                )));
            }
        }
        let a = ta.pow(GENERATOR_POWER);
        let b = tb.pow(GENERATOR_POWER);
        let a_inv = a
            .inverse()
            .ok_or_else(|| Error::Constants("A is singular".into()))?;
        let b_inv = b
            .inverse()
            .ok_or_else(|| Error::Constants("B is singular".into()))?;
        let gens = Generators {
            mats: [a, b, a_inv, b_inv],
        };
        gens.self_check()?;
        Ok(gens)
    }

    #[inline]
    pub fn matrix(&self, g: Generator) -> &Mat4 {
        &self.mats[g.index()]
    }

    /// Checks group membership, inverse pairing and that all
    /// non-backtracking words up to [`GIRTH_CHECK_LEN`] are distinct.
    pub fn self_check(&self) -> Result<()> {
        for g in Generator::ALL {
            if self.matrix(g).det() != Fp::ONE {
                return Err(Error::Constants(format!("det({g:?}) != 1")));
            }
            if self.matrix(g).mul(self.matrix(g.inverse())) != Mat4::IDENTITY {
                return Err(Error::Constants(format!(
                    "{g:?} times its inverse is not I"
                )));
            }
        }
        let words = self.enumerate_words(GIRTH_CHECK_LEN);
        let distinct: HashSet<Mat4> = words.iter().map(|(m, _)| *m).collect();
        if distinct.len() != words.len() {
            return Err(Error::Constants(format!(
                "{} of {} short words collide",
                words.len() - distinct.len(),
                words.len()
            )));
        }
        Ok(())
    }

    /// All reduced (non-backtracking) words of length `0..=max_len` with
    /// their length, the empty word first.
    pub fn enumerate_words(&self, max_len: usize) -> Vec<(Mat4, usize)> {
        let mut out = vec![(Mat4::IDENTITY, 0)];
        let mut frontier: Vec<(Mat4, Generator)> = Generator::ALL
            .iter()
            .map(|&g| (*self.matrix(g), g))
            .collect();
        for len in 1..=max_len {
            out.extend(frontier.iter().map(|(m, _)| (*m, len)));
            if len == max_len {
                break;
            }
            let mut next = Vec::with_capacity(frontier.len() * 3);
            for (m, last) in &frontier {
                for g in Generator::ALL {
                    if g != last.inverse() {
                        next.push((m.mul(self.matrix(g)), g));
                    }
                }
            }
            frontier = next;
        }
        out
    }
}

static GENERATORS: OnceLock<Generators> = OnceLock::new();

/// The build-time configured generators, validated on first use.
///
/// Panics if the configured constants fail their self-check; that is a
/// build configuration error, not a runtime condition.
pub fn generators() -> &'static Generators {
    GENERATORS.get_or_init(|| {
        Generators::from_base(&BASE_A, &BASE_B)
            .unwrap_or_else(|e| panic!("invalid generator constants: {e}"))
    })
}
