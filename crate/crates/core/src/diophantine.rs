//! Distance to the nearest integer, best rational approximation with bounded
//! denominator, quadratic Weyl sums, and major-arc membership.
//!
//! Frequencies are doubles, so every statement here concerns the dyadic
//! rational actually stored.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fourier::{e, frac_mul, gcd, Frequency};
use crate::funcspace::Interval;
use crate::sum::ComplexSum;

/// Denominator bounds up to this value are certified by a full scan.
pub const SCAN_LIMIT: u64 = 1_000_000;

/// Tolerance added to arc radii so that exact hits survive rounding.
pub const ARC_SLACK: f64 = 1e-14;

/// `‖α‖`.
pub fn dist_to_int(alpha: Frequency) -> f64 {
    let a = alpha.value();
    a.min(1.0 - a)
}

/// `‖q α‖`, using the compensated product.
pub fn dist_mul(alpha: Frequency, q: u64) -> f64 {
    dist_to_int(Frequency::new(frac_mul(alpha.value(), q as i64)))
}

/// `a / q'` with `err = ‖q' α‖ = |q' α - a|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalApproximant {
    pub numerator: i64,
    pub denominator: u64,
    pub err: f64,
}

impl RationalApproximant {
    fn at(alpha: Frequency, q: u64) -> Self {
        let err = dist_mul(alpha, q);
        let numerator = (alpha.value() * q as f64).round() as i64;
        Self {
            numerator,
            denominator: q,
            err,
        }
    }
}

/// Exact `num / den` representation of a frequency in `[2^-k, 1)`.
fn dyadic(alpha: f64) -> Option<(u128, u128)> {
    let bits = alpha.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        return None;
    }
    let mant = (bits & ((1 << 52) - 1)) | (1 << 52);
    // alpha = mant * 2^(exp - 1075)
    let shift = 1075 - exp;
    if !(0..=120).contains(&shift) {
        return None;
    }
    let mut num = mant as u128;
    let mut den = 1u128 << shift;
    let tz = num.trailing_zeros().min(shift as u32);
    num >>= tz;
    den >>= tz;
    Some((num, den))
}

/// Denominators of the convergents of `num/den` up to `q_max`, together with
/// the largest intermediate fraction denominator below `q_max`.
fn candidate_denominators(num: u128, den: u128, q_max: u64) -> Vec<u64> {
    let q_max = q_max as u128;
    let mut out = vec![1u64];
    let (mut n, mut d) = (num, den);
    // q_{-1} = 0, q_0 = 1 for alpha in [0, 1)
    let (mut q_prev, mut q_cur) = (0u128, 1u128);
    // skip the integer part a_0 = 0
    (n, d) = (d, n);
    while d != 0 {
        let a = n / d;
        (n, d) = (d, n % d);
        let q_next = a.saturating_mul(q_cur).saturating_add(q_prev);
        if q_next > q_max {
            // intermediate fractions q_prev + j q_cur with j < a
            if q_cur > 0 && q_max >= q_prev {
                let j = (q_max - q_prev) / q_cur;
                if j >= 1 {
                    out.push((q_prev + j * q_cur) as u64);
                }
            }
            break;
        }
        out.push(q_next as u64);
        (q_prev, q_cur) = (q_cur, q_next);
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn pick_best(alpha: Frequency, qs: impl IntoIterator<Item = u64>) -> RationalApproximant {
    let mut best: Option<RationalApproximant> = None;
    for q in qs {
        let cand = RationalApproximant::at(alpha, q);
        match best {
            Some(b) if cand.err > b.err || (cand.err == b.err && q >= b.denominator) => {}
            _ => best = Some(cand),
        }
    }
    best.expect("candidate list is nonempty")
}

/// `q' ∈ [1, Q]` minimising `‖q' α‖`, the smallest such on ties.
///
/// Candidates are the continued-fraction convergents of the stored dyadic
/// value plus the last intermediate fraction. For `Q <= SCAN_LIMIT` a full
/// scan is cheap and replaces the candidate list, which also settles ties
/// created by rounding in `‖q' α‖`.
pub fn best_denominator(alpha: Frequency, q_max: u64) -> Result<RationalApproximant> {
    if q_max == 0 {
        return Err(invalid("denominator bound must be positive"));
    }
    if q_max <= SCAN_LIMIT {
        return Ok(pick_best(alpha, 1..=q_max));
    }
    convergent_best_denominator(alpha, q_max)
}

/// Continued-fraction candidates only, without the scan.
pub fn convergent_best_denominator(alpha: Frequency, q_max: u64) -> Result<RationalApproximant> {
    if q_max == 0 {
        return Err(invalid("denominator bound must be positive"));
    }
    let a = alpha.value();
    let candidates = match dyadic(a) {
        Some((num, den)) if a > 0.0 => candidate_denominators(num, den, q_max),
        _ => vec![1],
    };
    Ok(pick_best(alpha, candidates))
}

/// Continued-fraction convergent denominators of `α` not exceeding `Q`.
pub fn convergent_denominators(alpha: Frequency, q_max: u64) -> Vec<u64> {
    let a = alpha.value();
    let Some((num, den)) = dyadic(a).filter(|_| a > 0.0) else {
        return vec![1];
    };
    let q_max = q_max as u128;
    let mut out = vec![1u64];
    let (mut n, mut d) = (den, num);
    let (mut q_prev, mut q_cur) = (0u128, 1u128);
    while d != 0 {
        let k = n / d;
        (n, d) = (d, n % d);
        let q_next = k.saturating_mul(q_cur).saturating_add(q_prev);
        if q_next > q_max {
            break;
        }
        if q_next != q_cur {
            out.push(q_next as u64);
        }
        (q_prev, q_cur) = (q_cur, q_next);
    }
    out
}

/// `|E_{y ∈ I} e(α y² + β y)|`.
pub fn weyl_sum(alpha: Frequency, beta: Frequency, interval: Interval) -> f64 {
    let mut acc = ComplexSum::new();
    for y in interval.iter() {
        let phase = frac_mul(alpha.value(), y * y) + frac_mul(beta.value(), y);
        acc.add(e(phase));
    }
    acc.value().norm() / interval.len() as f64
}

/// Circular distance on `T`.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Smallest `a ∈ [0, d)` with `‖α - a/d‖ <= r`, if any.
pub fn arc_numerator(alpha: Frequency, d: u64, r: f64) -> Option<u64> {
    if d == 0 {
        return None;
    }
    if 2.0 * r >= 1.0 {
        return Some(0);
    }
    let x = alpha.value();
    let df = d as f64;
    let lo = ((x - r) * df).floor() as i64 - 1;
    let hi = ((x + r) * df).ceil() as i64 + 1;
    (lo..=hi)
        .filter(|&k| circle_dist(x, k as f64 / df) <= r)
        .map(|k| k.rem_euclid(d as i64) as u64)
        .min()
}

/// The arc `a/(q' q²) ± Q₂/N` containing `α`, with the smallest `q' <= Q₁` and
/// then the smallest `a ∈ [0, q' q²)`, if any.
pub fn major_arc_member(
    alpha: Frequency,
    q1: u64,
    q2: f64,
    n: u64,
    q: u64,
) -> Option<(u64, u64)> {
    if n == 0 || q == 0 || !(q2 >= 0.0) {
        return None;
    }
    let r = q2 / n as f64 + ARC_SLACK;
    (1..=q1).find_map(|qp| arc_numerator(alpha, qp * q * q, r).map(|a| (a, qp)))
}

/// Upper bound on `#{t ∈ [0, T) : t/T lies on a major arc}`: each of the
/// `q' q²` arcs of width `2Q₂/N` holds at most `⌊2(Q₂/N) T⌋ + 1` grid points.
pub fn major_arc_packing_bound(q1: u64, q2: f64, n: u64, q: u64, t: u64) -> u64 {
    let r = q2 / n as f64 + ARC_SLACK;
    let per_arc = (2.0 * r * t as f64).floor() as u64 + 1;
    let arcs: u64 = (1..=q1).map(|qp| qp * q * q).sum();
    arcs.saturating_mul(per_arc).min(t)
}

/// `#{t ∈ [0, T) : t/T lies on a major arc}`.
pub fn major_arc_grid_count(q1: u64, q2: f64, n: u64, q: u64, t: u64) -> u64 {
    (0..t)
        .filter(|&k| major_arc_member(Frequency::grid(k, t), q1, q2, n, q).is_some())
        .count() as u64
}

/// `true` when `gcd(a, q) = 1`.
pub fn coprime(a: i64, q: u64) -> bool {
    gcd(a.unsigned_abs(), q) == 1
}
