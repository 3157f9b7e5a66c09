//! Quantitative models: FORS exposure degradation under a signature budget,
//! signature sizes, signing and key generation cost, and a candidate filter
//! over a parameter registry.
//!
//! After `2^m` signatures the number of signatures landing on one FORS
//! instance is modeled as Poisson with mean `lambda = 2^(m - h)`. A forger
//! holding `g` such signatures covers each tree's target leaf with
//! probability `1 - (1 - 1/t)^g`, so
//!
//! ```text
//! p(m) = sum_g Pois(g; lambda) * (1 - (1 - 1/t)^g)^k
//! ```
//!
//! Everything is evaluated in the natural-log domain; `p` itself underflows
//! an `f64` for most real parameter sets.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};
use std::io::{self, Write};

use statrs::function::gamma::ln_gamma;

use crate::params::SpinelParams;

/// Relative size of the Poisson tail at which summation stops.
pub const TAIL_TOLERANCE: f64 = 1e-18;

/// Below this mean the sum starts at `g = 0`; above it, 50 standard
/// deviations below the mean.
const DIRECT_START_MAX_LAMBDA: f64 = (1u64 << 20) as f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegradationQuery {
    pub h: u32,
    pub b: u32,
    pub k: u32,
    /// log2 of the number of signatures issued.
    pub m: f64,
    /// Baseline exponent that `Delta Sec` is measured against.
    pub m0: f64,
    /// Nominal security level in bits.
    pub target_bits: f64,
}

impl DegradationQuery {
    pub fn new(params: &SpinelParams, m: f64) -> DegradationQuery {
        DegradationQuery {
            h: params.h,
            b: params.b,
            k: params.k,
            m,
            m0: 0.0,
            target_bits: 256.0,
        }
    }

    pub fn with_m(&self, m: f64) -> DegradationQuery {
        DegradationQuery { m, ..*self }
    }

    pub fn lambda(&self) -> f64 {
        (self.m - self.h as f64).exp2()
    }
}

/// A forgery probability kept as its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probability {
    pub ln_p: f64,
}

impl Probability {
    /// May underflow to zero.
    pub fn value(&self) -> f64 {
        self.ln_p.exp()
    }

    pub fn neg_log2(&self) -> f64 {
        -self.ln_p / LN_2
    }

    /// Scientific notation that stays exact below `f64::MIN_POSITIVE`.
    pub fn to_sci(&self) -> String {
        if self.ln_p == f64::NEG_INFINITY {
            return "0".into();
        }
        let log10 = self.ln_p / std::f64::consts::LN_10;
        let mut exp = log10.floor();
        let mut mant = 10f64.powf(log10 - exp);
        if mant >= 9.9999999995 {
            mant /= 10.0;
            exp += 1.0;
        }
        format!("{mant:.9}e{exp}")
    }
}

/// Streaming log-sum-exp.
struct LogSum {
    max: f64,
    scaled: f64,
}

impl LogSum {
    fn new() -> LogSum {
        LogSum {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    fn add(&mut self, ln_x: f64) {
        if ln_x == f64::NEG_INFINITY {
            return;
        }
        if ln_x > self.max {
            self.scaled = self.scaled * (self.max - ln_x).exp() + 1.0;
            self.max = ln_x;
        } else {
            self.scaled += (ln_x - self.max).exp();
        }
    }

    fn ln(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `k * ln(1 - (1 - 1/t)^g)`.
fn ln_coverage_k(g: f64, ln_keep: f64, k: f64) -> f64 {
    if g == 0.0 {
        return f64::NEG_INFINITY;
    }
    let x = g * ln_keep;
    let miss = x.exp();
    let ln_cover = if miss < 0.5 {
        (-miss).ln_1p()
    } else {
        (-x.exp_m1()).ln()
    };
    k * ln_cover
}

/// The recurrence is re-anchored to the saddle-point form this often so
/// that rounding does not accumulate over long sums.
const REANCHOR_STEPS: u32 = 128;

/// `ln(n!) - ((n + 1/2) ln n - n + ln sqrt(2 pi))`.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - 0.5 * (2.0 * PI).ln();
    }
    let nn = n * n;
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

/// `x ln(x / np) + np - x`, accurate when `x` is close to `np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1.. {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}

/// `ln Pois(g; lambda)` in the saddle-point form, free of the large
/// cancelling terms in `g ln(lambda) - lambda - ln(g!)`.
fn ln_poisson(g: f64, lambda: f64) -> f64 {
    if g == 0.0 {
        return -lambda;
    }
    -stirlerr(g) - bd0(g, lambda) - 0.5 * (2.0 * PI * g).ln()
}

/// Forgery probability `p(m)` by truncated Poisson summation.
pub fn forgery_probability(q: &DegradationQuery) -> Probability {
    let lambda = q.lambda();
    let ln_lambda = (q.m - q.h as f64) * LN_2;
    let t = (q.b as f64).exp2();
    let ln_keep = (-1.0 / t).ln_1p();
    let k = q.k as f64;

    let g0 = if lambda <= DIRECT_START_MAX_LAMBDA {
        0.0
    } else {
        (lambda - 50.0 * lambda.sqrt()).floor()
    };
    let mut ln_pois = ln_poisson(g0, lambda);
    let mut sum = LogSum::new();
    let mut g = g0;
    let mut steps = 0u32;
    loop {
        if steps.is_multiple_of(REANCHOR_STEPS) && lambda > 1.0 {
            ln_pois = ln_poisson(g, lambda);
        }
        steps += 1;
        sum.add(ln_pois + ln_coverage_k(g, ln_keep, k));
        let next = g + 1.0;
        let ln_next = ln_pois + ln_lambda - next.ln();
        // Tail from `next` on is at most Pois(next) / (1 - lambda/(next+1)).
        if next + 1.0 > lambda {
            let ln_tail = ln_next - (-lambda / (next + 1.0)).ln_1p();
            if ln_tail < sum.ln() + TAIL_TOLERANCE.ln() {
                break;
            }
        }
        ln_pois = ln_next;
        g = next;
    }
    Probability { ln_p: sum.ln() }
}

/// First-order approximation `lambda * e^-lambda * t^-k` (the `g = 1` term).
pub fn first_order(q: &DegradationQuery) -> Probability {
    let lambda = q.lambda();
    Probability {
        ln_p: (q.m - q.h as f64) * LN_2 - lambda - (q.k * q.b) as f64 * LN_2,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Security {
    pub p: Probability,
    /// `-log2 p(m)`.
    pub sec: f64,
    /// `max(0, Sec(m0) - Sec(m))`.
    pub delta: f64,
    /// `target - delta`.
    pub effective: f64,
}

pub fn effective_security(q: &DegradationQuery) -> Security {
    let p = forgery_probability(q);
    let sec = p.neg_log2();
    let base = forgery_probability(&q.with_m(q.m0)).neg_log2();
    let delta = (base - sec).max(0.0);
    Security {
        p,
        sec,
        delta,
        effective: q.target_bits - delta,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub m: f64,
    pub security: Security,
}

/// `effective_security` at each `m` in `ms`, sharing one baseline.
pub fn degradation_curve(q: &DegradationQuery, ms: &[f64]) -> Vec<CurvePoint> {
    let base = forgery_probability(&q.with_m(q.m0)).neg_log2();
    crate::par::map_slice(ms, |&m| {
        let p = forgery_probability(&q.with_m(m));
        let sec = p.neg_log2();
        let delta = (base - sec).max(0.0);
        CurvePoint {
            m,
            security: Security {
                p,
                sec,
                delta,
                effective: q.target_bits - delta,
            },
        }
    })
}

pub const CURVE_CSV_HEADER: &str = "m,p,sec,delta_sec,sec_eff";

pub fn write_curve_csv<W: Write>(out: &mut W, points: &[CurvePoint]) -> io::Result<()> {
    writeln!(out, "{CURVE_CSV_HEADER}")?;
    for pt in points {
        let s = &pt.security;
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6}",
            pt.m,
            s.p.to_sci(),
            s.sec,
            s.delta,
            s.effective
        )?;
    }
    Ok(())
}

/// Encoded signature length: `64 * (1 + k(b+1) + h + d*len)`.
pub fn signature_size_bytes(params: &SpinelParams) -> u64 {
    64 * (1
        + params.k as u64 * (params.b as u64 + 1)
        + params.h as u64
        + params.d as u64 * params.wots.len as u64)
}

fn tree_cost(params: &SpinelParams) -> u64 {
    let leaves = 1u64 << params.tree_height();
    leaves * params.wots.len as u64 * params.w() as u64 + leaves - 1
}

/// Signing cost model: `d(2^h' * len * w + 2^h' - 1) + k(2^(b+1) - 1) + 1`.
pub fn signing_cost_hashes(params: &SpinelParams) -> u64 {
    params.d as u64 * tree_cost(params) + params.k as u64 * ((2u64 << params.b) - 1) + 1
}

/// Key generation cost model: one top-layer tree, `2^h' * len * w + 2^h' - 1`.
pub fn keygen_cost_hashes(params: &SpinelParams) -> u64 {
    tree_cost(params)
}

/// Exact tweakable-hash calls made by key generation: per leaf, `len`
/// secret derivations, `len(w-1)` chain steps and one compression, plus
/// `2^h' - 1` internal nodes.
pub fn keygen_thash_calls(params: &SpinelParams) -> u64 {
    let leaves = 1u64 << params.tree_height();
    leaves * (params.wots.len as u64 * params.w() as u64 + 1) + leaves - 1
}

/// Exact tweakable-hash calls made by signing: `d` hypertree builds plus,
/// per FORS tree, `2^b` secrets, `2^b` leaves and `2^b - 1` nodes, plus the
/// root compression.
pub fn signing_thash_calls(params: &SpinelParams) -> u64 {
    params.d as u64 * keygen_thash_calls(params)
        + params.k as u64 * (3 * (1u64 << params.b) - 1)
        + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankBy {
    /// Signing cost, then signature size.
    Cost,
    /// Signature size, then signing cost.
    Size,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateRow {
    pub params: SpinelParams,
    pub sig_bytes: u64,
    pub sign_cost_hashes: u64,
    pub keygen_cost_hashes: u64,
    /// Effective security at the budget.
    pub sec_eff: f64,
}

pub const CANDIDATE_CSV_HEADER: &str =
    "h,d,b,k,w,sig_bytes,sign_cost_hashes,keygen_cost_hashes,sec_eff";

impl CandidateRow {
    pub fn new(params: &SpinelParams, m_star: f64, m0: f64, target_bits: f64) -> CandidateRow {
        let q = DegradationQuery {
            m0,
            target_bits,
            ..DegradationQuery::new(params, m_star)
        };
        CandidateRow {
            params: *params,
            sig_bytes: signature_size_bytes(params),
            sign_cost_hashes: signing_cost_hashes(params),
            keygen_cost_hashes: keygen_cost_hashes(params),
            sec_eff: effective_security(&q).effective,
        }
    }

    pub fn csv_line(&self) -> String {
        let [h, d, b, k, w] = self.params.as_array();
        format!(
            "{h},{d},{b},{k},{w},{},{},{},{:.6}",
            self.sig_bytes, self.sign_cost_hashes, self.keygen_cost_hashes, self.sec_eff
        )
    }
}

/// Keeps rows whose effective security at `2^m_star` signatures is at
/// least `sigma_bits` and ranks them. An empty result is not an error.
pub fn enumerate_candidates(
    m_star: f64,
    sigma_bits: f64,
    registry: &[SpinelParams],
    rank: RankBy,
) -> Vec<CandidateRow> {
    let mut rows: Vec<CandidateRow> =
        crate::par::map_slice(registry, |p| CandidateRow::new(p, m_star, 0.0, 256.0))
            .into_iter()
            .filter(|r| r.sec_eff >= sigma_bits)
            .collect();
    let key = |r: &CandidateRow| match rank {
        RankBy::Cost => (r.sign_cost_hashes, r.sig_bytes),
        RankBy::Size => (r.sig_bytes, r.sign_cost_hashes),
    };
    rows.sort_by(|a, b| {
        key(a)
            .cmp(&key(b))
            .then_with(|| b.sec_eff.partial_cmp(&a.sec_eff).unwrap_or(Ordering::Equal))
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(h: u32, b: u32, k: u32, m: f64) -> DegradationQuery {
        DegradationQuery {
            h,
            b,
            k,
            m,
            m0: 0.0,
            target_bits: 256.0,
        }
    }

    #[test]
    fn logsum_matches_direct() {
        let mut s = LogSum::new();
        for x in [0.1f64, 3.0, 0.5, 2.0] {
            s.add(x.ln());
        }
        assert!((s.ln() - 5.6f64.ln()).abs() < 1e-15);
        assert_eq!(LogSum::new().ln(), f64::NEG_INFINITY);
    }

    #[test]
    fn saddle_point_pmf() {
        for (g, lambda) in [
            (1.0, 0.5),
            (3.0, 2.0),
            (20.0, 17.5),
            (1000.0, 1024.0),
            (5.0, 1e-6),
        ] {
            let direct = g * f64::ln(lambda) - lambda - ln_gamma(g + 1.0);
            assert!(
                (ln_poisson(g, lambda) - direct).abs() < 1e-12,
                "{g} {lambda}"
            );
        }
        // normalizes at large mean
        let lambda = (1u64 << 24) as f64;
        let mut s = LogSum::new();
        let mut g = (lambda - 60.0 * lambda.sqrt()).floor();
        while g < lambda + 60.0 * lambda.sqrt() {
            s.add(ln_poisson(g, lambda));
            g += 1.0;
        }
        assert!(s.ln().abs() < 1e-12, "{}", s.ln());
    }

    #[test]
    fn coverage_forms_agree() {
        let t: f64 = 16384.0;
        let ln_keep = (-1.0 / t).ln_1p();
        for g in [1.0, 10.0, 11356.0, 11357.0, 1e5] {
            let direct = (1.0 - (1.0 - 1.0 / t).powf(g)).ln() * 3.0;
            let got = ln_coverage_k(g, ln_keep, 3.0);
            assert!((got - direct).abs() < 1e-9 * direct.abs().max(1.0), "g={g}");
        }
    }

    #[test]
    fn small_lambda_bits() {
        // lambda = 2^-54: Sec is (h - m) + k b to within a hair
        let sec = forgery_probability(&q(64, 14, 22, 10.0)).neg_log2();
        assert!((sec - 362.0).abs() < 0.1, "{sec}");
        let fo = first_order(&q(64, 14, 22, 10.0)).neg_log2();
        assert!((sec - fo).abs() < 0.1);
    }

    #[test]
    fn baseline_has_no_loss() {
        let p = SpinelParams::named("F1").unwrap();
        let s = effective_security(&DegradationQuery {
            m0: 20.0,
            ..DegradationQuery::new(&p, 20.0)
        });
        assert_eq!(s.delta, 0.0);
        assert_eq!(s.effective, 256.0);
    }

    #[test]
    fn large_lambda_start_is_harmless() {
        // across the switch to a shifted start the curve stays smooth
        let lo = forgery_probability(&q(40, 14, 22, 60.0)).ln_p;
        let hi = forgery_probability(&q(40, 14, 22, 60.0 + 1e-9)).ln_p;
        assert!(hi >= lo && hi - lo < 1e-6);
        let sat = forgery_probability(&q(40, 8, 30, 70.0));
        assert!(sat.ln_p.abs() < 1e-12);
    }

    #[test]
    fn sci_formatting() {
        let p = Probability { ln_p: 0.25f64.ln() };
        assert_eq!(p.to_sci(), "2.500000000e-1");
        let tiny = Probability {
            ln_p: -400.0 * std::f64::consts::LN_10,
        };
        assert_eq!(tiny.to_sci(), "1.000000000e-400");
    }

    #[test]
    fn size_and_cost_examples() {
        let f1 = SpinelParams::named("F1").unwrap();
        assert_eq!(signature_size_bytes(&f1), 59072);
        assert_eq!(signing_cost_hashes(&f1), 35_325_923);
        assert_eq!(keygen_cost_hashes(&f1), 4_325_631);
        let f10 = SpinelParams::named("F10").unwrap();
        assert_eq!(signing_cost_hashes(&f10), 89_262_316);
        let r = SpinelParams::new(60, 4, 18, 19, 16).unwrap();
        assert_eq!(signing_cost_hashes(&r), 284_819_434);
        let desk = SpinelParams::desk();
        assert_eq!(keygen_cost_hashes(&desk), 33_551);
        assert_eq!(signing_cost_hashes(&desk), 67_351);
        assert_eq!(keygen_thash_calls(&desk), 33_551 + 16);
        assert_eq!(signing_thash_calls(&desk), 67_351 + 2 * 16 + 8 * 16);
    }

    #[test]
    fn size_formula_matches_params() {
        for p in crate::params::parameter_space() {
            assert_eq!(signature_size_bytes(&p), p.sig_bytes() as u64);
        }
    }

    #[test]
    fn candidate_filter_bounds() {
        let reg: Vec<SpinelParams> = crate::params::NAMED_SETS
            .iter()
            .map(|(_, r)| SpinelParams::from_array(*r).unwrap())
            .collect();
        assert_eq!(
            enumerate_candidates(40.0, 0.0, &reg, RankBy::Cost).len(),
            reg.len()
        );
        assert!(enumerate_candidates(40.0, 257.0, &reg, RankBy::Cost).is_empty());
        let by_cost = enumerate_candidates(40.0, 0.0, &reg, RankBy::Cost);
        assert!(by_cost
            .windows(2)
            .all(|w| w[0].sign_cost_hashes <= w[1].sign_cost_hashes));
        let by_size = enumerate_candidates(40.0, 0.0, &reg, RankBy::Size);
        assert!(by_size.windows(2).all(|w| w[0].sig_bytes <= w[1].sig_bytes));
    }
}
