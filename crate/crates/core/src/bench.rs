//! Timing harness: medians over repeated runs with wall time, the hardware
//! cycle counter where one exists, and instrumented tweakable-hash counts.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::hash::hash;
use crate::params::SpinelParams;
use crate::sign::{
    keygen, keygen_counted, sign, sign_counted, verify, verify_counted, KEYGEN_ENTROPY_BYTES,
};
use crate::tweak::{Adrs, AdrsType, HashCounter, HashCtx, Seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchOp {
    Hash,
    Thash,
    Keygen,
    Sign,
    Verify,
}

impl BenchOp {
    pub const ALL: [BenchOp; 5] = [
        BenchOp::Hash,
        BenchOp::Thash,
        BenchOp::Keygen,
        BenchOp::Sign,
        BenchOp::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchOp::Hash => "hash",
            BenchOp::Thash => "thash",
            BenchOp::Keygen => "keygen",
            BenchOp::Sign => "sign",
            BenchOp::Verify => "verify",
        }
    }

    /// Operations per timed run; cheap operations are batched.
    pub fn iters_per_run(self) -> u32 {
        match self {
            BenchOp::Hash | BenchOp::Thash => 1000,
            _ => 1,
        }
    }
}

impl fmt::Display for BenchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<BenchOp> {
        BenchOp::ALL
            .into_iter()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Params(format!("unknown benchmark operation {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    pub op: BenchOp,
    pub params: SpinelParams,
    pub runs: usize,
    pub iters_per_run: u32,
    /// Nanoseconds per operation, one entry per run.
    pub per_run_ns: Vec<f64>,
    pub median_ns: f64,
    /// Cycles per operation, when a cycle counter is available.
    pub per_run_cycles: Option<Vec<f64>>,
    pub median_cycles: Option<f64>,
    /// Tweakable-hash calls made by one operation.
    pub thash_calls: u64,
}

pub const MIN_RUNS: usize = 3;

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[cfg(target_arch = "x86_64")]
fn cycles() -> Option<u64> {
    // SAFETY: rdtsc has no preconditions on x86_64.
    Some(unsafe { core::arch::x86_64::_rdtsc() })
}

#[cfg(not(target_arch = "x86_64"))]
fn cycles() -> Option<u64> {
    None
}

pub fn cycle_counter_available() -> bool {
    cycles().is_some()
}

fn time<F: FnMut()>(iters: u32, mut f: F) -> (f64, Option<f64>) {
    let c0 = cycles();
    let t0 = Instant::now();
    for _ in 0..iters {
        f();
    }
    let ns = t0.elapsed().as_nanos() as f64;
    let c1 = cycles();
    let cyc = c0
        .zip(c1)
        .map(|(a, b)| b.wrapping_sub(a) as f64 / iters as f64);
    (ns / iters as f64, cyc)
}

fn fixed_entropy() -> Vec<u8> {
    (0..KEYGEN_ENTROPY_BYTES)
        .map(|i| (i * 37 + 11) as u8)
        .collect()
}

/// Times `runs` runs of `op` at `params`. Key material and messages are
/// fixed so results are comparable between invocations.
pub fn run_bench(op: BenchOp, params: &SpinelParams, runs: usize) -> Result<BenchResult> {
    if runs < MIN_RUNS {
        return Err(Error::Params(format!(
            "at least {MIN_RUNS} runs are needed for a median, got {runs}"
        )));
    }
    let iters = op.iters_per_run();
    let msg = b"benchmark message";
    let counter = HashCounter::new();
    let mut samples = Vec::with_capacity(runs);

    match op {
        BenchOp::Hash => {
            let input = [0x5Au8; 64];
            for _ in 0..runs {
                samples.push(time(iters, || {
                    std::hint::black_box(hash(std::hint::black_box(&input)));
                }));
            }
        }
        BenchOp::Thash => {
            let seed = Seed([7u8; 64]);
            let adrs = Adrs::new(AdrsType::Tree);
            let input = [0x5Au8; 64];
            let ctx = HashCtx::with_counter(&seed, &counter);
            ctx.thash(&adrs, &[&input]);
            for _ in 0..runs {
                let ctx = HashCtx::new(&seed);
                samples.push(time(iters, || {
                    std::hint::black_box(ctx.thash(&adrs, &[std::hint::black_box(&input)]));
                }));
            }
        }
        BenchOp::Keygen => {
            let e = fixed_entropy();
            keygen_counted(&e, params, &counter)?;
            for _ in 0..runs {
                samples.push(time(iters, || {
                    std::hint::black_box(keygen(&e, params).unwrap());
                }));
            }
        }
        BenchOp::Sign => {
            let (sk, _) = keygen(&fixed_entropy(), params)?;
            sign_counted(msg, &sk, None, params, &counter);
            for _ in 0..runs {
                samples.push(time(iters, || {
                    std::hint::black_box(sign(msg, &sk, None, params));
                }));
            }
        }
        BenchOp::Verify => {
            let (sk, pk) = keygen(&fixed_entropy(), params)?;
            let sig = sign(msg, &sk, None, params);
            assert!(verify_counted(msg, &sig, &pk, params, &counter));
            for _ in 0..runs {
                samples.push(time(iters, || {
                    std::hint::black_box(verify(msg, &sig, &pk, params));
                }));
            }
        }
    }

    let per_run_ns: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let per_run_cycles: Option<Vec<f64>> = samples.iter().map(|s| s.1).collect();
    Ok(BenchResult {
        op,
        params: *params,
        runs,
        iters_per_run: iters,
        median_ns: median(&per_run_ns),
        median_cycles: per_run_cycles.as_deref().map(median),
        per_run_ns,
        per_run_cycles,
        thash_calls: counter.get(),
    })
}
