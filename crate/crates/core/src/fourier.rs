//! Fourier transforms of finitely supported functions at arbitrary points of
//! the circle, certified sup-norm estimates, and exact L¹ masses of products
//! of dilated Fejér transforms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::funcspace::FiniteFunction;
use crate::sum::{sum_f64, ComplexSum};

/// A point of `T = R/Z`, stored as its representative in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(alpha: f64) -> Self {
        let r = alpha.rem_euclid(1.0);
        // rem_euclid can round up to exactly 1.0 for tiny negative inputs
        Self(if r >= 1.0 { 0.0 } else { r })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `t / T` as a frequency.
    pub fn grid(t: u64, modulus: u64) -> Self {
        Self::new((t % modulus) as f64 / modulus as f64)
    }
}

impl From<f64> for Frequency {
    fn from(alpha: f64) -> Self {
        Self::new(alpha)
    }
}

/// Fractional part of `alpha * x`, keeping the rounding error of the product.
#[inline]
pub fn frac_mul(alpha: f64, x: i64) -> f64 {
    let xf = x as f64;
    let p = alpha * xf;
    let err = alpha.mul_add(xf, -p);
    (p - p.floor() + err).rem_euclid(1.0)
}

/// `e(t) = exp(2πi t)`.
#[inline]
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * t).sin_cos();
    Complex64::new(c, s)
}

/// `f̂(α) = Σ_x f(x) e(α x)`.
pub fn ft_at(f: &FiniteFunction, alpha: Frequency) -> Complex64 {
    let mut acc = ComplexSum::new();
    for (x, v) in f.iter() {
        acc.add(v * e(frac_mul(alpha.value(), x)));
    }
    acc.value()
}

/// `f̂(t / T)` for `t = 0, ..., T - 1`, via FFT.
pub fn ft_grid(f: &FiniteFunction, modulus: usize) -> Result<Vec<Complex64>> {
    if modulus == 0 {
        return Err(invalid("Fourier grid size must be positive"));
    }
    let mut buf = vec![Complex64::default(); modulus];
    for (j, v) in f.values().iter().enumerate() {
        buf[j % modulus] += v;
    }
    // rustfft's inverse transform uses the e(+jt/T) kernel, unnormalised
    FftPlanner::<f64>::new()
        .plan_fft_inverse(modulus)
        .process(&mut buf);
    let m = modulus as i128;
    let offset = (f.offset() as i128).rem_euclid(m);
    Ok(buf
        .into_iter()
        .enumerate()
        .map(|(t, v)| {
            let r = (t as i128 * offset).rem_euclid(m);
            v * e(r as f64 / modulus as f64)
        })
        .collect())
}

/// Certified estimate of `sup_α |f̂(α)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub alpha: Frequency,
    pub lower: f64,
    pub upper: f64,
}

const MAX_SUP_ITERATIONS: usize = 400_000;

#[derive(Debug, Clone, Copy)]
struct ArcBound {
    center: f64,
    half_width: f64,
    upper: f64,
}

impl PartialEq for ArcBound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ArcBound {}
impl PartialOrd for ArcBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ArcBound {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .total_cmp(&other.upper)
            .then_with(|| other.center.total_cmp(&self.center))
    }
}

struct SupProblem<'a> {
    f: &'a FiniteFunction,
    center: f64,
    l1: f64,
    d1: f64,
    curvature: f64,
}

impl<'a> SupProblem<'a> {
    fn new(f: &'a FiniteFunction) -> Self {
        let center = f.offset() as f64 + (f.len() as f64 - 1.0) / 2.0;
        let l1 = sum_f64(f.values().iter().map(|v| v.norm()));
        let d1 = 2.0 * PI * sum_f64(f.iter().map(|(x, v)| (x as f64 - center).abs() * v.norm()));
        let d2 = 4.0 * PI * PI
            * sum_f64(f.iter().map(|(x, v)| (x as f64 - center).powi(2) * v.norm()));
        // |F|² = P has |P''| <= 2|F''||F| + 2|F'|² for F centred at `center`
        let curvature = 2.0 * d2 * l1 + 2.0 * d1 * d1;
        Self {
            f,
            center,
            l1,
            d1,
            curvature,
        }
    }

    /// `(|F(α)|², d/dα |F(α)|²)` with the phase centred on the window.
    fn value_and_slope(&self, alpha: f64) -> (f64, f64) {
        let mut val = ComplexSum::new();
        let mut der = ComplexSum::new();
        for (x, v) in self.f.iter() {
            let phase = e(frac_mul(alpha, x)) * v;
            val.add(phase);
            der.add(phase * Complex64::new(0.0, 2.0 * PI * (x as f64 - self.center)));
        }
        // centring multiplies F by e(-α c); the modulus is unchanged and the
        // derivative picks up -2πi c F
        let fv = val.value();
        let fd = der.value();
        (fv.norm_sqr(), 2.0 * (fd * fv.conj()).re)
    }

    fn bound(&self, center: f64, half_width: f64, p: f64, slope: f64) -> ArcBound {
        let upper2 = p + slope.abs() * half_width + 0.5 * self.curvature * half_width * half_width;
        let cap = self.l1;
        let slack = 1e-12 * self.l1.max(1.0);
        ArcBound {
            center,
            half_width,
            upper: (upper2.max(0.0).sqrt() + slack).min(cap + slack),
        }
    }
}

/// Certified sup of `|f̂|` over the circle.
///
/// A coarse FFT grid seeds a branch-and-bound over arcs. Each arc carries the
/// upper bound `|F|² <= P(c) + |P'(c)| w + ½ B w²` where `P = |F|²` and
/// `B >= sup |P''|` comes from the moments `Σ |x - c|^k |f(x)|`. Refinement
/// stops once the largest remaining arc bound is within `gap` of the best
/// value found.
pub fn sup_ft(f: &FiniteFunction, gap: f64) -> Result<SupEstimate> {
    if f.is_empty() {
        return Err(invalid("sup_ft needs a nonzero function"));
    }
    if !(gap > 0.0) {
        return Err(invalid("sup_ft needs a positive gap"));
    }
    let problem = SupProblem::new(f);
    if problem.d1 == 0.0 {
        // a single point mass: constant modulus
        let m = problem.l1;
        return Ok(SupEstimate {
            alpha: Frequency::new(0.0),
            lower: m,
            upper: m,
        });
    }

    let grid = (4 * f.len()).next_power_of_two().max(64);
    let half_width = 0.5 / grid as f64;
    let values = ft_grid(f, grid)?;
    let weighted = f.map(|x, v| v * Complex64::new(0.0, 2.0 * PI * (x as f64 - problem.center)));
    let slopes = ft_grid(&weighted, grid)?;

    let mut best_alpha = 0.0;
    let mut best = -1.0;
    let mut heap = BinaryHeap::with_capacity(grid);
    for (t, (v, d)) in values.iter().zip(&slopes).enumerate() {
        let alpha = t as f64 / grid as f64;
        let p = v.norm_sqr();
        let slope = 2.0 * (d * v.conj()).re;
        if v.norm() > best {
            best = v.norm();
            best_alpha = alpha;
        }
        heap.push(problem.bound(alpha, half_width, p, slope));
    }
    // report the direct sum rather than the FFT value at the grid maximum
    best = problem.value_and_slope(best_alpha).0.sqrt();
    heap.retain(|arc| arc.upper > best);
    if heap.is_empty() {
        return Ok(SupEstimate {
            alpha: Frequency::new(best_alpha),
            lower: best,
            upper: best,
        });
    }

    let mut iterations = 0;
    loop {
        let top = *heap.peek().expect("heap is never empty");
        if top.upper - best <= gap {
            return Ok(SupEstimate {
                alpha: Frequency::new(best_alpha),
                lower: best,
                upper: top.upper.max(best),
            });
        }
        iterations += 1;
        if iterations > MAX_SUP_ITERATIONS {
            return Err(Error::NonConvergence {
                iterations,
                gap: top.upper - best,
                target: gap,
            });
        }
        heap.pop();
        let w = top.half_width / 2.0;
        for c in [top.center - w, top.center + w] {
            let (p, slope) = problem.value_and_slope(c);
            let modulus = p.sqrt();
            if modulus > best {
                best = modulus;
                best_alpha = c;
            }
            let arc = problem.bound(c, w, p, slope);
            if arc.upper > best {
                heap.push(arc);
            }
        }
        if heap.is_empty() {
            return Ok(SupEstimate {
                alpha: Frequency::new(best_alpha),
                lower: best,
                upper: best,
            });
        }
    }
}

/// Exact value of `∫_T |μ̂_K(aβ)| |μ̂_L(bβ)| dβ`, as a solution count over
/// `⌊K⌋²⌊L⌋²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossL1 {
    /// `#{(x, y) in [K]² x [L]² : a(x₁ - x₂) = b(y₁ - y₂)}`.
    pub count: u128,
    /// `⌊K⌋² ⌊L⌋²`.
    pub denominator: u128,
}

impl CrossL1 {
    pub fn value(&self) -> f64 {
        self.count as f64 / self.denominator as f64
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Solution count behind [`CrossL1`]. The differences `d = x₁ - x₂` and
/// `e = y₁ - y₂` satisfy `a d = b e`, so `d = (b/g) t`, `e = (a/g) t`, and
/// each pair of differences is realised `(⌊K⌋ - |d|)(⌊L⌋ - |e|)` times.
pub fn fejer_cross_l1(k: f64, l: f64, a: u64, b: u64) -> Result<CrossL1> {
    if !(k >= 1.0) || !(l >= 1.0) {
        return Err(invalid("fejer_cross_l1 needs K, L >= 1"));
    }
    if a == 0 || b == 0 {
        return Err(invalid("fejer_cross_l1 needs positive dilations"));
    }
    let kf = k.floor() as u128;
    let lf = l.floor() as u128;
    let g = gcd(a, b) as u128;
    let step_d = b as u128 / g;
    let step_e = a as u128 / g;
    let mut count = kf * lf;
    let mut t = 1u128;
    while step_d * t < kf && step_e * t < lf {
        count += 2 * (kf - step_d * t) * (lf - step_e * t);
        t += 1;
    }
    Ok(CrossL1 {
        count,
        denominator: kf * kf * lf * lf,
    })
}

/// Upper bound `⌊K⌋⌊L⌋(⌊K⌋d/b + 1)(⌊L⌋d/a + 1)` on the solution count, with
/// `d = gcd(a, b)`.
pub fn cross_count_bound(k: f64, l: f64, a: u64, b: u64) -> f64 {
    let kf = k.floor();
    let lf = l.floor();
    let d = gcd(a, b) as f64;
    kf * lf * (kf * d / b as f64 + 1.0) * (lf * d / a as f64 + 1.0)
}
