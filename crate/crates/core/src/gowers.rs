//! Gowers uniformity norms, Gowers inner products, box norms on `Z²`, and
//! the arithmetic box norms built from Fejér-weighted differences.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::funcspace::{difference, fejer, FiniteFunction, Interval};
use crate::sum::{sum_complex, sum_f64, ComplexSum, NeumaierSum};

pub const MAX_DEGREE: u32 = 6;

/// Windows at most this long use the direct autocorrelation for the `U²`
/// level; longer ones go through an FFT.
const DIRECT_U2_LIMIT: usize = 160;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct GowersDegree(u32);

impl GowersDegree {
    pub fn new(s: u32) -> Result<Self> {
        if (1..=MAX_DEGREE).contains(&s) {
            Ok(Self(s))
        } else {
            Err(invalid(format!("Gowers degree must lie in 1..={MAX_DEGREE}, got {s}")))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `2^s`.
    pub fn power(self) -> u32 {
        1 << self.0
    }
}

impl TryFrom<u32> for GowersDegree {
    type Error = crate::error::Error;
    fn try_from(s: u32) -> Result<Self> {
        Self::new(s)
    }
}

impl From<GowersDegree> for u32 {
    fn from(s: GowersDegree) -> u32 {
        s.0
    }
}

/// `Σ_x f(x) conj(f(x + h))` for every `h` in `(-len, len)`, indexed by
/// `h + len - 1`.
fn autocorrelation(f: &FiniteFunction) -> Vec<Complex64> {
    let v = f.values();
    let n = v.len();
    let mut out = vec![Complex64::default(); 2 * n - 1];
    for h in 0..n {
        let mut acc = ComplexSum::new();
        for x in 0..n - h {
            acc.add(v[x] * v[x + h].conj());
        }
        let r = acc.value();
        out[n - 1 + h] = r;
        out[n - 1 - h] = r.conj();
    }
    out
}

/// `‖f‖_{U²}⁴ = Σ_h |Σ_x f(x) conj f(x+h)|²`.
fn u2_power(f: &FiniteFunction) -> f64 {
    let n = f.len();
    if n == 0 {
        return 0.0;
    }
    if n <= DIRECT_U2_LIMIT {
        return sum_f64(autocorrelation(f).iter().map(|r| r.norm_sqr()));
    }
    // Σ_h |r(h)|² = T⁻¹ Σ_t |f̂(t/T)|⁴ once T >= 2n - 1
    let t = (2 * n).next_power_of_two();
    let mut buf = vec![Complex64::default(); t];
    buf[..n].copy_from_slice(f.values());
    FftPlanner::<f64>::new().plan_fft_forward(t).process(&mut buf);
    sum_f64(buf.iter().map(|v| v.norm_sqr().powi(2))) / t as f64
}

fn power_rec(f: &FiniteFunction, s: u32) -> f64 {
    if f.is_empty() {
        return 0.0;
    }
    match s {
        1 => f.sum().norm_sqr(),
        2 => u2_power(f),
        _ => {
            let span = f.len() as i64;
            let mut acc = NeumaierSum::new();
            for h in (1 - span)..span {
                acc.add(power_rec(&difference(f, h), s - 1));
            }
            acc.value()
        }
    }
}

/// `‖f‖_{U^s}^{2^s}`, via `‖f‖_{U^s}^{2^s} = Σ_h ‖Δ_h f‖_{U^{s-1}}^{2^{s-1}}`.
///
/// The outer difference parameter is processed in parallel; partial results
/// are collected in order and reduced sequentially, so the value does not
/// depend on the number of worker threads.
pub fn gowers_norm_power(f: &FiniteFunction, s: GowersDegree) -> f64 {
    if f.is_empty() {
        return 0.0;
    }
    let s = s.get();
    if s <= 2 {
        return power_rec(f, s);
    }
    let span = f.len() as i64;
    let parts: Vec<f64> = ((1 - span)..span)
        .into_par_iter()
        .map(|h| power_rec(&difference(f, h), s - 1))
        .collect();
    sum_f64(parts).max(0.0)
}

/// `‖f‖_{U^s}`.
pub fn gowers_norm(f: &FiniteFunction, s: GowersDegree) -> f64 {
    gowers_norm_power(f, s).powf(1.0 / s.power() as f64)
}

/// `‖x ↦ f(u + qx)‖_{U^s}`, the norm on the residue class `u + qZ`.
pub fn gowers_norm_on_class(f: &FiniteFunction, u: i64, q: u64, s: GowersDegree) -> Result<f64> {
    if q == 0 {
        return Err(invalid("class modulus must be positive"));
    }
    Ok(gowers_norm(&f.compress(u, q), s))
}

/// `x ↦ a(x) conj(b(x + h))`.
fn cross_difference(a: &FiniteFunction, b: &FiniteFunction, h: i64) -> FiniteFunction {
    let lo = a.offset().max(b.offset() - h);
    let hi = a.end().min(b.end() - h);
    if a.is_empty() || b.is_empty() || lo >= hi {
        return FiniteFunction::zero();
    }
    FiniteFunction::new(lo, (lo..hi).map(|x| a.at(x) * b.at(x + h).conj()).collect())
}

fn inner_rec(fs: &[FiniteFunction]) -> Complex64 {
    if fs.len() == 1 {
        return fs[0].sum();
    }
    if fs.iter().any(FiniteFunction::is_empty) {
        return Complex64::default();
    }
    // peel the last coordinate: ω = (ω', 0) pairs with (ω', 1)
    let half = fs.len() / 2;
    let (lo, hi) = fs.split_at(half);
    let h_min = lo.iter().map(|f| f.offset()).min().unwrap()
        - hi.iter().map(|f| f.end()).max().unwrap();
    let h_max = lo.iter().map(|f| f.end()).max().unwrap()
        - hi.iter().map(|f| f.offset()).min().unwrap();
    sum_complex((h_min..=h_max).map(|h| {
        let next: Vec<FiniteFunction> = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| cross_difference(a, b, h))
            .collect();
        inner_rec(&next)
    }))
}

/// The Gowers inner product `[f_ω]_{U^s} = Σ_{x,h} Π_ω C^{|ω|} f_ω(x + ω·h)`.
///
/// `fs[i]` is `f_ω` for the `ω` whose binary digits are those of `i`, with
/// `ω_1` the least significant bit.
pub fn gowers_inner(fs: &[FiniteFunction]) -> Result<Complex64> {
    let n = fs.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(invalid(format!(
            "Gowers inner product needs 2^s functions with s >= 1, got {n}"
        )));
    }
    Ok(inner_rec(fs))
}

/// A function on a rectangle `X × Y` of `Z²`, stored row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    xs: Interval,
    ys: Interval,
    values: Vec<Complex64>,
}

impl Grid2 {
    pub fn new(xs: Interval, ys: Interval, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != xs.len() * ys.len() {
            return Err(invalid(format!(
                "grid of shape {}x{} needs {} values, got {}",
                xs.len(),
                ys.len(),
                xs.len() * ys.len(),
                values.len()
            )));
        }
        Ok(Self { xs, ys, values })
    }

    pub fn from_fn(xs: Interval, ys: Interval, mut f: impl FnMut(i64, i64) -> Complex64) -> Self {
        let values = xs
            .iter()
            .flat_map(|x| ys.iter().map(move |y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self { xs, ys, values }
    }

    pub fn xs(&self) -> Interval {
        self.xs
    }

    pub fn ys(&self) -> Interval {
        self.ys
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, x: i64, y: i64) -> Complex64 {
        if !self.xs.contains(x) || !self.ys.contains(y) {
            return Complex64::default();
        }
        let i = (x - self.xs.lo()) as usize * self.ys.len() + (y - self.ys.lo()) as usize;
        self.values[i]
    }

    fn row(&self, i: usize) -> &[Complex64] {
        let w = self.ys.len();
        &self.values[i * w..(i + 1) * w]
    }
}

/// `‖F‖_{□(X,Y)}⁴ = Σ_{x₁,x₂,y₁,y₂} F(x₁,y₁) conj F(x₁,y₂) conj F(x₂,y₁) F(x₂,y₂)`,
/// evaluated as `Σ_{x₁,x₂} |Σ_y F(x₁,y) conj F(x₂,y)|²`.
pub fn box_norm_power(f: &Grid2) -> f64 {
    let nx = f.xs.len();
    let mut acc = NeumaierSum::new();
    for i in 0..nx {
        for j in 0..nx {
            let c = sum_complex(f.row(i).iter().zip(f.row(j)).map(|(a, b)| a * b.conj()));
            acc.add(c.norm_sqr());
        }
    }
    acc.value()
}

/// `‖F‖_{□(X,Y)}`.
pub fn box_norm(f: &Grid2) -> f64 {
    box_norm_power(f).max(0.0).powf(0.25)
}

/// `Σ_x Δ_{h_1, h_2} f(x)`.
pub fn double_difference_sum(f: &FiniteFunction, h1: i64, h2: i64) -> Complex64 {
    difference(&difference(f, h1), h2).sum()
}

/// `Σ_{h₁,h₂} μ_H(h₁) μ_H(h₂) Σ_x Δ_{a h₁, b h₂} f(x)`, unrooted.
///
/// The value is real and nonnegative: the Fejér weights form a positive
/// definite sequence, so the sum is a nonnegative combination of
/// `|Σ_x Δ_{a h} f(x) e(βx)|²`-type terms.
pub fn arith_box_norm(f: &FiniteFunction, a: u64, b: u64, h: f64) -> Result<f64> {
    if a == 0 || b == 0 {
        return Err(invalid("arithmetic box norm needs positive directions"));
    }
    let mu = fejer(h)?;
    let (a, b) = (a as i64, b as i64);
    let mut acc = NeumaierSum::new();
    for (h1, w1) in mu.iter() {
        let d = difference(f, a * h1);
        if d.is_empty() {
            continue;
        }
        for (h2, w2) in mu.iter() {
            acc.add(w1 * w2 * difference(&d, b * h2).sum().re);
        }
    }
    Ok(acc.value())
}

/// `Σ_{b ∈ [R]} Σ_{h₂, h₃ ∈ [R]} Σ_x Δ_{b h₂, (a+b) h₃} f(x)` with `R = ⌊√N⌋`,
/// real part.
pub fn a_norm_power(f: &FiniteFunction, a: u64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("a-norm needs N >= 1"));
    }
    let r = n.isqrt() as i64;
    let a = a as i64;
    let mut acc = NeumaierSum::new();
    for b in 1..=r {
        for h2 in 1..=r {
            let d = difference(f, b * h2);
            if d.is_empty() {
                continue;
            }
            for h3 in 1..=r {
                acc.add(difference(&d, (a + b) * h3).sum().re);
            }
        }
    }
    Ok(acc.value())
}

/// `‖f‖_a`, the fourth root of [`a_norm_power`]. The underlying sum has no
/// sign guarantee since the difference parameters start at 1; a negative
/// sum yields the negative fourth root of its magnitude.
pub fn a_norm(f: &FiniteFunction, a: u64, n: u64) -> Result<f64> {
    let p = a_norm_power(f, a, n)?;
    Ok(p.signum() * p.abs().powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::indicator;

    fn deg(s: u32) -> GowersDegree {
        GowersDegree::new(s).unwrap()
    }

    #[test]
    fn degree_range() {
        assert!(GowersDegree::new(0).is_err());
        assert!(GowersDegree::new(7).is_err());
        assert_eq!(deg(3).power(), 8);
    }

    #[test]
    fn delta_has_unit_norm() {
        for s in 1..=5 {
            assert!((gowers_norm(&FiniteFunction::delta(4), deg(s)) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_point_indicator_u2() {
        let f = indicator(Interval::new(1, 3).unwrap());
        assert!((gowers_norm_power(&f, deg(2)) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn fft_and_direct_u2_agree() {
        let n = DIRECT_U2_LIMIT + 37;
        let f = FiniteFunction::from_fn(Interval::first(n as u64).unwrap(), |x| {
            crate::fourier::e((x * x) as f64 * 0.013)
        });
        let direct = sum_f64(autocorrelation(&f).iter().map(|r| r.norm_sqr()));
        let fast = u2_power(&f);
        assert!((direct - fast).abs() <= 1e-11 * direct);
    }

    #[test]
    fn class_norm_of_empty_class() {
        let f = FiniteFunction::from_points((0..10).map(|k| (2 * k, Complex64::new(1.0, 0.0))));
        assert_eq!(gowers_norm_on_class(&f, 1, 2, deg(2)).unwrap(), 0.0);
        let g = FiniteFunction::from_real(3, &[1.0, -0.5, 0.25]);
        let shifted = g.shift(1);
        assert!((gowers_norm_on_class(&g, 1, 1, deg(3)).unwrap() - gowers_norm(&shifted, deg(3))).abs() < 1e-12);
    }

    #[test]
    fn inner_product_trivial_cases() {
        let d = FiniteFunction::delta(0);
        assert!((gowers_inner(&vec![d.clone(); 4]).unwrap() - 1.0).norm() < 1e-15);
        let mut fs = vec![d; 4];
        fs[2] = FiniteFunction::zero();
        assert_eq!(gowers_inner(&fs).unwrap(), Complex64::default());
        assert!(gowers_inner(&fs[..3]).is_err());
    }

    #[test]
    fn box_norm_trivial_cases() {
        let xs = Interval::new(0, 3).unwrap();
        let ys = Interval::new(5, 9).unwrap();
        let ones = Grid2::from_fn(xs, ys, |_, _| Complex64::new(1.0, 0.0));
        assert!((box_norm(&ones) - (9.0f64 * 16.0).powf(0.25)).abs() < 1e-12);
        let point = Grid2::from_fn(xs, ys, |x, y| {
            Complex64::new(if (x, y) == (1, 6) { 1.0 } else { 0.0 }, 0.0)
        });
        assert!((box_norm(&point) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn arith_box_trivial_cases() {
        let n = 12;
        let f = indicator(Interval::first(n).unwrap());
        assert!((arith_box_norm(&f, 2, 3, 1.0).unwrap() - n as f64).abs() < 1e-12);
        let w0 = fejer(3.0).unwrap().weight(0);
        let v = arith_box_norm(&FiniteFunction::delta(0), 2, 5, 3.0).unwrap();
        assert!((v - w0 * w0).abs() < 1e-15);
    }

    #[test]
    fn a_norm_of_delta_vanishes() {
        assert_eq!(a_norm(&FiniteFunction::delta(0), 3, 16).unwrap(), 0.0);
        let f = indicator(Interval::first(16).unwrap());
        let v = a_norm(&f, 2, 16).unwrap();
        assert!(v > 0.0 && v <= (4.0f64 * 16.0 * 16.0).powf(0.25));
    }
}
