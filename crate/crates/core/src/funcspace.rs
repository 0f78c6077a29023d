//! Finitely supported complex functions on the integers and the elementary
//! operators built on them: differences, convolution, inner products and
//! probability kernels.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::sum::{sum_complex, sum_f64, NeumaierSum};

/// Slack allowed when checking that a function is 1-bounded.
pub const BOUNDED_SLACK: f64 = 1e-12;

/// Slack allowed when checking that kernel weights sum to one.
pub const MASS_SLACK: f64 = 1e-12;

/// Half-open integer interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: i64,
    hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// `[X] = {1, ..., n}`.
    pub fn first(n: u64) -> Result<Self> {
        Self::new(1, n as i64 + 1)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn iter(&self) -> std::ops::Range<i64> {
        self.lo..self.hi
    }
}

/// A finitely supported function `Z -> C`, stored densely on the window
/// `[offset, offset + values.len())`. Evaluation outside the window is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFunction {
    offset: i64,
    values: Vec<Complex64>,
    bounded: bool,
}

impl FiniteFunction {
    /// Builds a function from a dense window. Leading and trailing zeros are
    /// trimmed. The 1-bounded flag is set when every value satisfies it.
    pub fn new(offset: i64, values: Vec<Complex64>) -> Self {
        let bounded = values.iter().all(|v| v.norm() <= 1.0 + BOUNDED_SLACK);
        Self::trimmed(offset, values, bounded)
    }

    /// Like [`FiniteFunction::new`] but rejects values of modulus above one.
    pub fn new_bounded(offset: i64, values: Vec<Complex64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| v.norm() > 1.0 + BOUNDED_SLACK)
        {
            return Err(Error::NotBounded {
                x: offset + i as i64,
                modulus: v.norm(),
            });
        }
        Ok(Self::trimmed(offset, values, true))
    }

    pub fn from_real(offset: i64, values: &[f64]) -> Self {
        Self::new(offset, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(interval: Interval, mut f: impl FnMut(i64) -> Complex64) -> Self {
        Self::new(interval.lo(), interval.iter().map(&mut f).collect())
    }

    pub fn zero() -> Self {
        Self {
            offset: 0,
            values: Vec::new(),
            bounded: true,
        }
    }

    pub fn delta(at: i64) -> Self {
        Self {
            offset: at,
            values: vec![Complex64::new(1.0, 0.0)],
            bounded: true,
        }
    }

    /// Builds from sparse `(x, value)` pairs; repeated points are summed.
    pub fn from_points(points: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut map: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (x, v) in points {
            *map.entry(x).or_default() += v;
        }
        let (Some(&lo), Some(&hi)) = (map.keys().next(), map.keys().next_back()) else {
            return Self::zero();
        };
        let mut values = vec![Complex64::default(); (hi - lo + 1) as usize];
        for (x, v) in map {
            values[(x - lo) as usize] = v;
        }
        Self::new(lo, values)
    }

    fn trimmed(offset: i64, mut values: Vec<Complex64>, bounded: bool) -> Self {
        let zero = Complex64::default();
        let Some(first) = values.iter().position(|v| *v != zero) else {
            return Self {
                offset: 0,
                values: Vec::new(),
                bounded,
            };
        };
        let last = values.iter().rposition(|v| *v != zero).unwrap_or(first);
        values.truncate(last + 1);
        values.drain(..first);
        Self {
            offset: offset + first as i64,
            values,
            bounded,
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// One past the last window point.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn window(&self) -> Option<Interval> {
        Interval::new(self.offset, self.end()).ok()
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    #[inline]
    pub fn at(&self, x: i64) -> Complex64 {
        let i = x - self.offset;
        if i < 0 || i >= self.values.len() as i64 {
            Complex64::default()
        } else {
            self.values[i as usize]
        }
    }

    /// `(x, f(x))` over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.offset + i as i64, *v))
    }

    pub fn sum(&self) -> Complex64 {
        sum_complex(self.values.iter().copied())
    }

    pub fn map(&self, mut op: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        Self::new(
            self.offset,
            self.iter().map(|(x, v)| op(x, v)).collect(),
        )
    }

    pub fn conj(&self) -> Self {
        Self {
            offset: self.offset,
            values: self.values.iter().map(|v| v.conj()).collect(),
            bounded: self.bounded,
        }
    }

    /// `x -> f(x + t)`.
    pub fn shift(&self, t: i64) -> Self {
        Self {
            offset: self.offset - t,
            values: self.values.clone(),
            bounded: self.bounded,
        }
    }

    /// `x -> f(u + q x)`, the restriction of `f` to the class `u + qZ`.
    pub fn compress(&self, u: i64, q: u64) -> Self {
        assert!(q >= 1, "compression modulus must be positive");
        if self.is_empty() {
            return Self::zero();
        }
        let q = q as i64;
        let lo = (self.offset - u).div_euclid(q);
        let hi = (self.end() - 1 - u).div_euclid(q);
        let values = (lo..=hi).map(|x| self.at(u + q * x)).collect();
        Self::trimmed(lo, values, self.bounded)
    }

    /// `x -> f(x) g(x)`.
    pub fn mul(&self, other: &Self) -> Self {
        let lo = self.offset.max(other.offset);
        let hi = self.end().min(other.end());
        if lo >= hi {
            return Self::zero();
        }
        let values = (lo..hi).map(|x| self.at(x) * other.at(x)).collect();
        Self::trimmed(lo, values, self.bounded && other.bounded)
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        Self::new(lo, (lo..hi).map(|x| self.at(x) + other.at(x)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.offset, self.values.iter().map(|v| v * c).collect())
    }

    /// Restriction to an interval.
    pub fn restrict(&self, interval: Interval) -> Self {
        let lo = self.offset.max(interval.lo());
        let hi = self.end().min(interval.hi());
        if lo >= hi {
            return Self::zero();
        }
        Self::trimmed(
            lo,
            (lo..hi).map(|x| self.at(x)).collect(),
            self.bounded,
        )
    }

    /// Support points (nonzero values), ascending.
    pub fn support(&self) -> Vec<i64> {
        self.iter()
            .filter(|(_, v)| *v != Complex64::default())
            .map(|(x, _)| x)
            .collect()
    }

    /// Smallest and largest absolute coordinate in the window, for support
    /// bounds.
    pub fn max_abs_coordinate(&self) -> i64 {
        if self.is_empty() {
            0
        } else {
            self.offset.abs().max((self.end() - 1).abs())
        }
    }
}

/// `1_I`.
pub fn indicator(interval: Interval) -> FiniteFunction {
    FiniteFunction {
        offset: interval.lo(),
        values: vec![Complex64::new(1.0, 0.0); interval.len()],
        bounded: true,
    }
}

/// Indicator of a finite set of integers.
pub fn set_indicator(set: &[i64]) -> FiniteFunction {
    FiniteFunction::from_points(set.iter().map(|&x| (x, Complex64::new(1.0, 0.0))))
}

/// `Δ_h f(x) = f(x) conj(f(x + h))`.
pub fn difference(f: &FiniteFunction, h: i64) -> FiniteFunction {
    let lo = f.offset.max(f.offset - h);
    let hi = f.end().min(f.end() - h);
    if lo >= hi {
        return FiniteFunction::zero();
    }
    let values = (lo..hi).map(|x| f.at(x) * f.at(x + h).conj()).collect();
    FiniteFunction::trimmed(lo, values, f.bounded)
}

/// `Δ_{h_1, ..., h_s} f`, folding [`difference`] from the left.
pub fn iterated_difference(f: &FiniteFunction, hs: &[i64]) -> FiniteFunction {
    hs.iter().fold(f.clone(), |acc, &h| difference(&acc, h))
}

/// `(f * g)(x) = Σ_y f(x - y) g(y)` under counting measure.
pub fn convolve(f: &FiniteFunction, g: &FiniteFunction) -> FiniteFunction {
    if f.is_empty() || g.is_empty() {
        return FiniteFunction::zero();
    }
    let n = f.len() + g.len() - 1;
    let mut acc = vec![crate::sum::ComplexSum::new(); n];
    for (i, a) in f.values.iter().enumerate() {
        for (j, b) in g.values.iter().enumerate() {
            acc[i + j].add(a * b);
        }
    }
    FiniteFunction::new(
        f.offset + g.offset,
        acc.iter().map(|s| s.value()).collect(),
    )
}

/// `<f, g> = Σ_x f(x) conj(g(x))`.
pub fn inner(f: &FiniteFunction, g: &FiniteFunction) -> Complex64 {
    let lo = f.offset.max(g.offset);
    let hi = f.end().min(g.end());
    sum_complex((lo..hi).map(|x| f.at(x) * g.at(x).conj()))
}

/// `(Σ_x |f(x)|^p)^{1/p}` for `p >= 1`; `p = ∞` gives the sup norm.
pub fn lp_norm(f: &FiniteFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    if p == 2.0 {
        return Ok(sum_f64(f.values.iter().map(|v| v.norm_sqr())).sqrt());
    }
    Ok(sum_f64(f.values.iter().map(|v| v.norm().powf(p))).powf(1.0 / p))
}

/// Nonnegative weights on an integer window summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbKernel {
    offset: i64,
    weights: Vec<f64>,
    width: f64,
}

impl ProbKernel {
    pub fn new(offset: i64, weights: Vec<f64>, width: f64) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidKernel(format!("negative or non-finite weight {w}")));
        }
        let mass = sum_f64(weights.iter().copied());
        if (mass - 1.0).abs() > MASS_SLACK {
            return Err(Error::InvalidKernel(format!("total mass {mass} is not 1")));
        }
        if !(width > 0.0) {
            return Err(Error::InvalidKernel(format!("width {width} must be positive")));
        }
        let first = weights.iter().position(|w| *w > 0.0).unwrap_or(0);
        let last = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
        Ok(Self {
            offset: offset + first as i64,
            weights: weights[first..=last].to_vec(),
            width,
        })
    }

    /// Point mass at `h`.
    pub fn point(h: i64) -> Self {
        Self {
            offset: h,
            weights: vec![1.0],
            width: 1.0,
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn end(&self) -> i64 {
        self.offset + self.weights.len() as i64
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn mass(&self) -> f64 {
        sum_f64(self.weights.iter().copied())
    }

    pub fn weight(&self, h: i64) -> f64 {
        let i = h - self.offset;
        if i < 0 || i >= self.weights.len() as i64 {
            0.0
        } else {
            self.weights[i as usize]
        }
    }

    /// `(h, weight)` over positive weights.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(move |(i, w)| (self.offset + i as i64, *w))
    }

    pub fn to_function(&self) -> FiniteFunction {
        FiniteFunction::from_real(self.offset, &self.weights)
    }

    /// Image of the kernel under `h -> scale * h + shift`.
    pub fn pushforward(&self, scale: i64, shift: i64) -> Result<Self> {
        if scale == 0 {
            return Ok(Self::point(shift));
        }
        let image = self.iter().map(|(h, w)| (scale * h + shift, w));
        Self::from_masses(image, self.width * scale.unsigned_abs() as f64)
    }

    /// Law of `c1 X + c2 Y` for independent `X ~ k1`, `Y ~ k2`. This is the
    /// image of the product kernel under `(k, l) -> c1 k + c2 l`.
    pub fn combine(k1: &Self, c1: i64, k2: &Self, c2: i64) -> Result<Self> {
        let image = k1
            .iter()
            .flat_map(|(h1, w1)| k2.iter().map(move |(h2, w2)| (c1 * h1 + c2 * h2, w1 * w2)));
        Self::from_masses(
            image,
            k1.width * c1.unsigned_abs() as f64 + k2.width * c2.unsigned_abs() as f64,
        )
    }

    fn from_masses(points: impl Iterator<Item = (i64, f64)>, width: f64) -> Result<Self> {
        let mut bins: BTreeMap<i64, NeumaierSum> = BTreeMap::new();
        for (h, w) in points {
            bins.entry(h).or_default().add(w);
        }
        let lo = *bins.keys().next().ok_or_else(|| {
            Error::InvalidKernel("pushforward of an empty kernel".into())
        })?;
        let hi = *bins.keys().next_back().unwrap_or(&lo);
        let mut weights = vec![0.0; (hi - lo + 1) as usize];
        for (h, s) in bins {
            weights[(h - lo) as usize] = s.value();
        }
        Self::new(lo, weights, width.max(1.0))
    }
}

/// Normalised Fejér kernel `μ_H(h) = (⌊H⌋ - |h|)_+ / ⌊H⌋²`, a probability
/// measure supported on `(-H, H)`.
pub fn fejer(h: f64) -> Result<ProbKernel> {
    if !(h >= 1.0) || !h.is_finite() {
        return Err(invalid(format!("Fejér kernel needs H >= 1, got {h}")));
    }
    let n = h.floor() as i64;
    let denom = (n * n) as f64;
    let weights = (-(n - 1)..n).map(|k| (n - k.abs()) as f64 / denom).collect();
    Ok(ProbKernel {
        offset: -(n - 1),
        weights,
        width: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn indicator_values() {
        let f = indicator(Interval::new(1, 5).unwrap());
        assert_eq!(f.at(3), c(1.0));
        assert_eq!(f.at(5), c(0.0));
        assert_eq!(f.at(0), c(0.0));
        assert_eq!(f.sum(), c(4.0));
        assert!(f.is_bounded());
    }

    #[test]
    fn interval_rejects_empty() {
        assert!(Interval::new(3, 3).is_err());
        assert!(Interval::new(4, 3).is_err());
    }

    #[test]
    fn difference_at_zero_is_modulus_squared() {
        let f = FiniteFunction::new(-2, vec![Complex64::new(0.3, 0.4), c(-0.5), Complex64::new(0.0, 1.0)]);
        let d = difference(&f, 0);
        for x in -3..3 {
            assert!(close(d.at(x).re, f.at(x).norm_sqr(), 1e-15));
            assert_eq!(d.at(x).im, 0.0);
        }
    }

    #[test]
    fn difference_of_delta_vanishes() {
        assert!(difference(&FiniteFunction::delta(0), 1).is_empty());
    }

    #[test]
    fn difference_of_indicator_is_overlap() {
        let d = difference(&indicator(Interval::new(1, 4).unwrap()), 1);
        assert_eq!(d, indicator(Interval::new(1, 3).unwrap()));
    }

    #[test]
    fn iterated_difference_cases() {
        let f = FiniteFunction::new(0, vec![c(0.5), Complex64::new(0.1, -0.7), c(1.0), c(-0.2)]);
        assert_eq!(iterated_difference(&f, &[]), f);
        let a = iterated_difference(&f, &[1, 2]);
        let b = iterated_difference(&f, &[2, 1]);
        for x in -4..6 {
            assert!((a.at(x) - b.at(x)).norm() < 1e-15);
        }
        let d = FiniteFunction::delta(0);
        assert_eq!(iterated_difference(&d, &[0, 0]), d);
    }

    #[test]
    fn fejer_small_cases() {
        let k = fejer(1.0).unwrap();
        assert_eq!(k.weight(0), 1.0);
        assert_eq!(k.weights().len(), 1);
        let k = fejer(2.0).unwrap();
        assert_eq!(k.weight(-1), 0.25);
        assert_eq!(k.weight(0), 0.5);
        assert_eq!(k.weight(1), 0.25);
        assert!(close(fejer(7.0).unwrap().mass(), 1.0, 1e-15));
        assert!(fejer(0.5).is_err());
    }

    #[test]
    fn fejer_support_inside_open_window() {
        let h = 5.7;
        let k = fejer(h).unwrap();
        assert!(k.iter().all(|(x, _)| (x as f64).abs() < h));
        assert_eq!(k.width(), h);
    }

    #[test]
    fn convolution_cases() {
        let f = FiniteFunction::new(3, vec![c(1.0), Complex64::new(0.0, 2.0)]);
        assert_eq!(convolve(&FiniteFunction::delta(0), &f), f);
        let one = indicator(Interval::new(0, 2).unwrap());
        let tri = convolve(&one, &one);
        assert_eq!(tri.offset(), 0);
        assert_eq!(tri.values(), &[c(1.0), c(2.0), c(1.0)]);
        let h2 = indicator(Interval::first(2).unwrap());
        let peak = convolve(&h2, &h2);
        assert_eq!(peak.at(3), c(2.0));
    }

    #[test]
    fn inner_and_norms() {
        let a = indicator(Interval::new(1, 4).unwrap());
        let b = indicator(Interval::new(2, 6).unwrap());
        assert_eq!(inner(&a, &b), c(2.0));
        let f = FiniteFunction::new(0, vec![Complex64::new(0.6, 0.8), c(-0.5)]);
        assert!(close(inner(&f, &f).re, lp_norm(&f, 2.0).unwrap().powi(2), 1e-15));
        assert!(lp_norm(&f, 0.5).is_err());
        assert!(close(lp_norm(&f, 1.0).unwrap(), 1.5, 1e-15));
    }

    #[test]
    fn pushforward_relabels() {
        let k = fejer(2.0).unwrap().pushforward(3, 0).unwrap();
        assert_eq!(k.weight(0), 0.5);
        assert_eq!(k.weight(3), 0.25);
        assert_eq!(k.weight(-3), 0.25);
        assert_eq!(k.weight(1), 0.0);
    }

    #[test]
    fn combine_matches_difference_kernel() {
        let mu = fejer(3.0).unwrap();
        let nu = ProbKernel::combine(&mu, 1, &mu, -1).unwrap();
        assert!(close(nu.mass(), 1.0, 1e-12));
        let direct: f64 = mu.iter().map(|(k, w)| w * mu.weight(k - 2)).sum();
        assert!(close(nu.weight(2), direct, 1e-15));
    }

    #[test]
    fn kernel_validation() {
        assert!(ProbKernel::new(0, vec![0.5, 0.6], 1.0).is_err());
        assert!(ProbKernel::new(0, vec![1.5, -0.5], 1.0).is_err());
        assert!(ProbKernel::new(0, vec![0.25, 0.75], 1.0).is_ok());
    }

    #[test]
    fn bounded_flag() {
        assert!(FiniteFunction::new_bounded(0, vec![c(1.5)]).is_err());
        assert!(!FiniteFunction::new(0, vec![c(1.5)]).is_bounded());
        assert!(FiniteFunction::new(0, vec![c(1.0)]).is_bounded());
    }

    #[test]
    fn compress_restricts_to_class() {
        let f = FiniteFunction::from_fn(Interval::new(1, 11).unwrap(), |x| c(x as f64));
        let g = f.compress(1, 3);
        // x -> f(1 + 3x): x = 0, 1, 2, 3 give 1, 4, 7, 10
        assert_eq!(g.offset(), 0);
        assert_eq!(g.values(), &[c(1.0), c(4.0), c(7.0), c(10.0)]);
    }
}
