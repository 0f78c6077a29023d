//! The counting operator for `x, x + y, x + qy²`, its dual function, and a
//! lower-bound estimator for the associated cut norms.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fourier::e;
use crate::funcspace::{indicator, set_indicator, FiniteFunction, Interval};
use crate::random::rng_for;
use crate::sum::{sum_complex, ComplexSum};

/// Largest `m` with `q m² <= n`, i.e. `⌊√(n/q)⌋`.
pub fn isqrt_ratio(n: u64, q: u64) -> u64 {
    let mut m = (n / q).isqrt();
    while q * (m + 1) * (m + 1) <= n {
        m += 1;
    }
    while m > 0 && q * m * m > n {
        m -= 1;
    }
    m
}

/// The pair `(q, N)` together with `M = ⌊√(N/q)⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct CountingParams {
    q: u64,
    n: u64,
    m: u64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    q: u64,
    #[serde(rename = "N")]
    n: u64,
}

impl TryFrom<RawParams> for CountingParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        Self::new(raw.q, raw.n)
    }
}

impl From<CountingParams> for RawParams {
    fn from(p: CountingParams) -> Self {
        RawParams { q: p.q, n: p.n }
    }
}

impl CountingParams {
    pub fn new(q: u64, n: u64) -> Result<Self> {
        if q == 0 || n == 0 {
            return Err(invalid("q and N must be positive"));
        }
        if q > n {
            return Err(invalid(format!("q = {q} exceeds N = {n}")));
        }
        if n > i64::MAX as u64 / 4 {
            return Err(invalid(format!("N = {n} is too large")));
        }
        let m = isqrt_ratio(n, q);
        debug_assert!(q * m * m <= n && q * (m + 1) * (m + 1) > n);
        Ok(Self { q, n, m })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// `[N]`.
    pub fn domain(&self) -> Interval {
        Interval::first(self.n).expect("N >= 1")
    }

    /// `1 / (N M)`.
    pub fn normaliser(&self) -> f64 {
        1.0 / (self.n as f64 * self.m as f64)
    }

    fn qy2(&self, y: i64) -> i64 {
        self.q as i64 * y * y
    }
}

/// `Λ_{q,N}(f₀, f₁, f₂) = E_{x ∈ [N]} E_{y ∈ [M]} f₀(x) f₁(x + y) f₂(x + qy²)`.
pub fn lambda(
    p: &CountingParams,
    f0: &FiniteFunction,
    f1: &FiniteFunction,
    f2: &FiniteFunction,
) -> Complex64 {
    let lo = f0.offset().max(1);
    let hi = f0.end().min(p.n as i64 + 1);
    if lo >= hi || f1.is_empty() || f2.is_empty() {
        return Complex64::default();
    }
    let m = p.m as i64;
    let rows: Vec<Complex64> = (lo..hi)
        .into_par_iter()
        .map(|x| {
            let a = f0.at(x);
            if a == Complex64::default() {
                return a;
            }
            let mut acc = ComplexSum::new();
            for y in 1..=m {
                acc.add(f1.at(x + y) * f2.at(x + p.qy2(y)));
            }
            a * acc.value()
        })
        .collect();
    sum_complex(rows) * p.normaliser()
}

/// `F(x) = E_{y ∈ [M]} f₀(x - qy²) f₁(x + y - qy²)`.
///
/// When `supp f₀ ⊆ [N]`, `Λ(f₀, f₁, f₂) = N⁻¹ Σ_x f₂(x) F(x)`.
pub fn dual_function(p: &CountingParams, f0: &FiniteFunction, f1: &FiniteFunction) -> FiniteFunction {
    if f0.is_empty() || f1.is_empty() {
        return FiniteFunction::zero();
    }
    let m = p.m as i64;
    let lo = f0.offset() + p.q as i64;
    let hi = f0.end() + p.qy2(m);
    let values: Vec<Complex64> = (lo..hi)
        .into_par_iter()
        .map(|x| {
            let mut acc = ComplexSum::new();
            for y in 1..=m {
                let base = x - p.qy2(y);
                acc.add(f0.at(base) * f1.at(base + y));
            }
            acc.value() / m as f64
        })
        .collect();
    let bounded = f0.is_bounded() && f1.is_bounded();
    let f = FiniteFunction::new(lo, values);
    debug_assert!(!bounded || f.is_bounded());
    f
}

/// Which slot of `Λ` carries the fixed function in a cut-norm estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Slot(u8);

impl Slot {
    pub const ZERO: Slot = Slot(0);
    pub const ONE: Slot = Slot(1);
    pub const TWO: Slot = Slot(2);

    pub fn new(i: u8) -> Result<Self> {
        if i <= 2 {
            Ok(Self(i))
        } else {
            Err(invalid(format!("slot must be 0, 1 or 2, got {i}")))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The two slots that are optimised over.
    pub fn others(self) -> [usize; 2] {
        match self.0 {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }
}

impl TryFrom<u8> for Slot {
    type Error = Error;
    fn try_from(i: u8) -> Result<Self> {
        Self::new(i)
    }
}

impl From<Slot> for u8 {
    fn from(s: Slot) -> u8 {
        s.0
    }
}

/// A lower bound on `sup |Λ|` over 1-bounded functions supported on `[N]`
/// in the two slots not carrying `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutNormEstimate {
    pub lower: f64,
    /// The optimised functions, in slot order.
    pub witnesses: [FiniteFunction; 2],
    /// The slot holding `f`.
    pub slot: Slot,
    /// Restart that produced the bound.
    pub restart: usize,
    /// Alternation sweeps used by that restart.
    pub sweeps: usize,
}

const ASCENT_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 200;

/// The function `c` with `Λ(g₀, g₁, g₂) = Σ_z g_i(z) c(z)`, restricted to
/// `z ∈ [N]`.
fn slot_coefficients(p: &CountingParams, gs: &[&FiniteFunction; 3], i: usize) -> Vec<Complex64> {
    let n = p.n as i64;
    let m = p.m as i64;
    let scale = p.normaliser();
    let in_range = |x: i64| (1..=n).contains(&x);
    (1..=n)
        .into_par_iter()
        .map(|z| {
            let mut acc = ComplexSum::new();
            for y in 1..=m {
                let term = match i {
                    0 => gs[1].at(z + y) * gs[2].at(z + p.qy2(y)),
                    1 => {
                        let x = z - y;
                        if !in_range(x) {
                            continue;
                        }
                        gs[0].at(x) * gs[2].at(x + p.qy2(y))
                    }
                    _ => {
                        let x = z - p.qy2(y);
                        if !in_range(x) {
                            continue;
                        }
                        gs[0].at(x) * gs[1].at(x + y)
                    }
                };
                acc.add(term);
            }
            acc.value() * scale
        })
        .collect()
}

/// The unimodular function on `[N]` maximising `|Σ g c|`, and the maximum.
fn best_response(c: &[Complex64]) -> (FiniteFunction, f64) {
    let values: Vec<Complex64> = c
        .iter()
        .map(|v| {
            let r = v.norm();
            if r > 0.0 {
                v.conj() / r
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    let total = crate::sum::sum_f64(c.iter().map(|v| v.norm()));
    (FiniteFunction::new(1, values), total)
}

fn arrange<'a>(
    slot: Slot,
    f: &'a FiniteFunction,
    g: &'a [FiniteFunction; 2],
) -> [&'a FiniteFunction; 3] {
    match slot.index() {
        0 => [f, &g[0], &g[1]],
        1 => [&g[0], f, &g[1]],
        _ => [&g[0], &g[1], f],
    }
}

fn ascend(p: &CountingParams, f: &FiniteFunction, slot: Slot, start: [FiniteFunction; 2]) -> (f64, [FiniteFunction; 2], usize) {
    let others = slot.others();
    let mut g = start;
    let mut value = {
        let [a, b, c] = arrange(slot, f, &g);
        lambda(p, a, b, c).norm()
    };
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let before = value;
        for (k, &i) in others.iter().enumerate() {
            let c = slot_coefficients(p, &arrange(slot, f, &g), i);
            let (best, v) = best_response(&c);
            if v >= value {
                g[k] = best;
                value = v;
            }
        }
        if value - before < ASCENT_TOL {
            break;
        }
    }
    (value, g, sweeps)
}

/// Alternating exact single-slot maximisation started from the given pair.
pub fn cut_norm_ascend_from(
    p: &CountingParams,
    f: &FiniteFunction,
    slot: Slot,
    start: [FiniteFunction; 2],
) -> CutNormEstimate {
    let domain = p.domain();
    let start = start.map(|g| g.restrict(domain));
    let (_, g, sweeps) = ascend(p, f, slot, start);
    let [a, b, c] = arrange(slot, f, &g);
    CutNormEstimate {
        lower: lambda(p, a, b, c).norm(),
        witnesses: g,
        slot,
        restart: 0,
        sweeps,
    }
}

/// Lower bound on the cut norm of `f` in `slot`: restart 0 starts from the
/// all-ones pair on `[N]`, later restarts from seeded random phases. The
/// best restart wins, ties going to the lowest index.
pub fn cut_norm_ascend(
    p: &CountingParams,
    f: &FiniteFunction,
    slot: Slot,
    restarts: usize,
    seed: u64,
) -> CutNormEstimate {
    let domain = p.domain();
    let runs: Vec<CutNormEstimate> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                [indicator(domain), indicator(domain)]
            } else {
                let mut rng = rng_for(seed, &[r as u64]);
                let mut draw = || {
                    use rand::Rng;
                    FiniteFunction::from_fn(domain, |_| e(rng.gen::<f64>()))
                };
                [draw(), draw()]
            };
            let mut est = cut_norm_ascend_from(p, f, slot, start);
            est.restart = r;
            est
        })
        .collect();
    runs.into_iter()
        .reduce(|best, next| if next.lower > best.lower { next } else { best })
        .expect("at least one restart")
}

/// `#{(x, y) : y ∈ [M], x, x + y, x + qy² ∈ A}`, computed as `N M Λ(1_A, 1_A, 1_A)`.
pub fn count_configs(set: &[i64], p: &CountingParams) -> Result<u64> {
    if let Some(&x) = set.iter().find(|&&x| x < 1 || x > p.n as i64) {
        return Err(Error::OutOfRange(x));
    }
    let a = set_indicator(set);
    let raw = lambda(p, &a, &a, &a).re * p.n as f64 * p.m as f64;
    let rounded = raw.round();
    if (raw - rounded).abs() >= 1e-6 {
        return Err(Error::Numerical(format!(
            "configuration count {raw} is not within 1e-6 of an integer"
        )));
    }
    Ok(rounded as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: u64) -> FiniteFunction {
        indicator(Interval::first(n).unwrap())
    }

    #[test]
    fn params_derive_m() {
        let p = CountingParams::new(1, 4).unwrap();
        assert_eq!(p.m(), 2);
        assert_eq!(CountingParams::new(3, 26).unwrap().m(), 2);
        assert_eq!(CountingParams::new(3, 27).unwrap().m(), 3);
        assert!(CountingParams::new(5, 4).is_err());
        assert!(CountingParams::new(0, 4).is_err());
        assert_eq!(isqrt_ratio(u32::MAX as u64 * 4, 1), 131071);
    }

    #[test]
    fn lambda_small_cases() {
        let p = CountingParams::new(1, 4).unwrap();
        let f = ones(4);
        assert!((lambda(&p, &f, &f, &f) - Complex64::new(0.375, 0.0)).norm() < 1e-15);
        assert_eq!(lambda(&p, &FiniteFunction::zero(), &f, &f), Complex64::default());
        for q in 1..=3u64 {
            let p = CountingParams::new(q, 20).unwrap();
            let v = lambda(
                &p,
                &FiniteFunction::delta(1),
                &FiniteFunction::delta(2),
                &FiniteFunction::delta(1 + q as i64),
            );
            assert!((v.re - p.normaliser()).abs() < 1e-15);
        }
    }

    #[test]
    fn dual_of_constant_is_constant_inside() {
        let p = CountingParams::new(2, 50).unwrap();
        let wide = indicator(Interval::new(-200, 400).unwrap());
        let f = dual_function(&p, &wide, &wide);
        for x in 0..100 {
            assert!((f.at(x) - 1.0).norm() < 1e-14);
        }
        assert!(dual_function(&p, &FiniteFunction::delta(3), &FiniteFunction::zero()).is_empty());
    }

    #[test]
    fn count_configs_small() {
        let p = CountingParams::new(1, 4).unwrap();
        assert_eq!(count_configs(&[1, 2], &p).unwrap(), 1);
        assert_eq!(count_configs(&[], &p).unwrap(), 0);
        assert!(matches!(count_configs(&[0, 2], &p), Err(Error::OutOfRange(0))));
    }

    #[test]
    fn cut_norm_of_zero() {
        let p = CountingParams::new(1, 16).unwrap();
        let est = cut_norm_ascend(&p, &FiniteFunction::zero(), Slot::TWO, 3, 1);
        assert_eq!(est.lower, 0.0);
    }

    #[test]
    fn slot_validation() {
        assert!(Slot::new(3).is_err());
        assert_eq!(Slot::new(1).unwrap().others(), [0, 2]);
    }
}
