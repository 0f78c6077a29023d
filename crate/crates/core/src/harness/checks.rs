//! One function per lemma, each taking explicit inputs and returning a single
//! report. Inputs outside the stated hypotheses are rejected before any
//! computation.

use num_complex::Complex64;

use super::report::{agrees, holds, InputsDigest, LemmaId, LemmaReport};
use crate::counting::{dual_function, lambda, CountingParams};
use crate::diophantine::best_denominator;
use crate::error::{invalid, Result};
use crate::fourier::{cross_count_bound, e, fejer_cross_l1, frac_mul, gcd, sup_ft, Frequency};
use crate::funcspace::{convolve, difference, fejer, indicator, iterated_difference, FiniteFunction, Interval, ProbKernel};
use crate::gowers::{arith_box_norm, gowers_inner, gowers_norm, gowers_norm_power, GowersDegree, Grid2};
use crate::sum::{sum_complex, ComplexSum, NeumaierSum};

/// Largest denominator bound handed to the Diophantine search.
const Q_CAP: f64 = 1e12;

fn require_within(f: &FiniteFunction, n: u64, what: &str) -> Result<()> {
    if !f.is_empty() && (f.offset() < 1 || f.end() > n as i64 + 1) {
        return Err(invalid(format!("{what} must be supported in [1, {n}]")));
    }
    Ok(())
}

fn require_bounded(f: &FiniteFunction, what: &str) -> Result<()> {
    if !f.is_bounded() {
        return Err(invalid(format!("{what} must be 1-bounded")));
    }
    Ok(())
}

fn deg(s: u32) -> GowersDegree {
    GowersDegree::new(s).expect("degree in range")
}

/// `Σ_x f(x) e(θ x)`.
fn twisted_sum(f: &FiniteFunction, theta: f64) -> Complex64 {
    sum_complex(f.iter().map(|(x, v)| v * e(frac_mul(theta, x))))
}

/// All `h ∈ (-r, r)^s` in lexicographic order.
fn cube(r: i64, s: usize) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * r - 1).max(0) as u64;
    let total = side.checked_pow(s as u32).unwrap_or(0);
    (0..total).map(move |mut idx| {
        let mut h = vec![0i64; s];
        for slot in h.iter_mut().rev() {
            *slot = (idx % side) as i64 - (r - 1);
            idx /= side;
        }
        h
    })
}

/// `Σ_{x ∈ class u mod q} ‖·‖^{2^s}` summed over all classes.
fn class_power(f: &FiniteFunction, q: u64, s: u32) -> f64 {
    let mut acc = NeumaierSum::new();
    for u in 0..q as i64 {
        acc.add(gowers_norm_power(&f.compress(u, q), deg(s)));
    }
    acc.value()
}

fn phase_of(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// van der Corput for `g = f 1_{[M]}`:
/// `|E_{y ∈ [M]} g(y)|² <= (M + H)/M Σ_h μ_H(h) E_{y ∈ [M]} Δ_h g(y)`.
pub fn vdc(f: &FiniteFunction, m: u64, h: f64) -> Result<LemmaReport> {
    if m == 0 {
        return Err(invalid("VDC needs M >= 1"));
    }
    let mu = fejer(h)?;
    let g = f.restrict(Interval::first(m)?);
    let mf = m as f64;
    let lhs = (g.sum() / mf).norm_sqr();
    let mut acc = NeumaierSum::new();
    for (k, w) in mu.iter() {
        acc.add(w * difference(&g, k).sum().re / mf);
    }
    let rhs = (mf + h) / mf * acc.value();
    let digest = InputsDigest::default().with("M", mf).with("H", h);
    Ok(LemmaReport::asserted(LemmaId::Vdc, "restricted_to_[M]", lhs, rhs, digest))
}

/// `#{a(x₁ - x₂) = b(y₁ - y₂)}` against `⌊K⌋⌊L⌋(⌊K⌋d/b + 1)(⌊L⌋d/a + 1)`.
/// For small boxes the count is also enumerated directly.
pub fn l1_fourier(k: f64, l: f64, a: u64, b: u64) -> Result<LemmaReport> {
    let c = fejer_cross_l1(k, l, a, b)?;
    let bound = cross_count_bound(k, l, a, b);
    let lhs = c.count as f64;
    let mut ok = holds(lhs, bound);
    let (kf, lf) = (k.floor() as i64, l.floor() as i64);
    let mut digest = InputsDigest::default()
        .with("K", k)
        .with("L", l)
        .with("a", a as f64)
        .with("b", b as f64);
    if kf * kf * lf * lf <= 1 << 20 {
        let (a, b) = (a as i64, b as i64);
        let mut brute = 0u128;
        for x1 in 1..=kf {
            for x2 in 1..=kf {
                for y1 in 1..=lf {
                    for y2 in 1..=lf {
                        brute += u128::from(a * (x1 - x2) == b * (y1 - y2));
                    }
                }
            }
        }
        ok &= brute == c.count;
        digest = digest.with("enumerated", brute as f64);
    }
    Ok(LemmaReport::asserted_with(LemmaId::L1Fourier, "count", lhs, bound, ok, digest))
}

/// `#{(b, c) ∈ [0, M]² : gcd(a₁ + b, a₂ + c) > 1/δ} <= Σ_{1/δ < d <= 2M} (2M/d + 1)²`.
pub fn gcd_count(a1: u64, a2: u64, m: u64, delta: f64) -> Result<LemmaReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("GCD_COUNT needs 0 < δ <= 1"));
    }
    if a1 > m || a2 > m {
        return Err(invalid("GCD_COUNT needs a₁, a₂ <= M"));
    }
    let threshold = 1.0 / delta;
    let mut count = 0u64;
    for b in 0..=m {
        for c in 0..=m {
            count += u64::from(gcd(a1 + b, a2 + c) as f64 > threshold);
        }
    }
    let d0 = threshold.floor() as u64 + 1;
    let mf = m as f64;
    let rhs = crate::sum::sum_f64((d0..=2 * m).map(|d| (2.0 * mf / d as f64 + 1.0).powi(2)));
    let digest = InputsDigest::default()
        .with("a1", a1 as f64)
        .with("a2", a2 as f64)
        .with("M", mf)
        .with("delta", delta);
    Ok(LemmaReport::asserted(LemmaId::GcdCount, "count", count as f64, rhs, digest))
}

/// `‖f‖⁴_{U²} <= N sup_α |f̂(α)|²` for 1-bounded `f` on `[N]`, with the
/// certified upper bound for the sup.
pub fn u2_inverse(f: &FiniteFunction, n: u64) -> Result<LemmaReport> {
    require_within(f, n, "f")?;
    require_bounded(f, "f")?;
    let lhs = gowers_norm_power(f, deg(2));
    let (upper, alpha) = if f.is_empty() {
        (0.0, 0.0)
    } else {
        let l1: f64 = f.values().iter().map(|v| v.norm()).sum();
        let est = sup_ft(f, 1e-6 * l1)?;
        (est.upper, est.alpha.value())
    };
    let rhs = n as f64 * upper * upper;
    let digest = InputsDigest::default().with("N", n as f64).with("alpha", alpha);
    Ok(LemmaReport::asserted(LemmaId::U2Inverse, "certified_sup", lhs, rhs, digest))
}

/// Gowers–Cauchy–Schwarz: `|[f_ω]_{U^s}| <= Π_ω ‖f_ω‖_{U^s}`.
pub fn gcs(fs: &[FiniteFunction]) -> Result<LemmaReport> {
    let lhs = gowers_inner(fs)?.norm();
    let s = fs.len().trailing_zeros();
    let s = GowersDegree::new(s)?;
    let rhs: f64 = fs.iter().map(|f| gowers_norm(f, s)).product();
    let digest = InputsDigest::default().with("s", s.get() as f64);
    Ok(LemmaReport::asserted(LemmaId::Gcs, format!("s={}", s.get()), lhs, rhs, digest))
}

/// `Σ_{x,h} Δ_h f(x) e(αx + Σ_i β_i (x + h_i))` by direct summation.
pub fn linear_phase_sum(f: &FiniteFunction, alpha: f64, betas: &[f64]) -> Complex64 {
    let span = f.len() as i64;
    let mut acc = ComplexSum::new();
    for h in cube(span, betas.len()) {
        let d = iterated_difference(f, &h);
        if d.is_empty() {
            continue;
        }
        for (x, v) in d.iter() {
            let mut t = frac_mul(alpha, x);
            for (b, hi) in betas.iter().zip(&h) {
                t += frac_mul(*b, x + hi);
            }
            acc.add(v * e(t));
        }
    }
    acc.value()
}

/// Linear phases: `‖f e(α·)‖_{U^s} = ‖f‖_{U^s}` for `s >= 2`, and the phase
/// twisted difference sum is bounded by `‖f‖^{2^s}_{U^s}`.
pub fn phase_inv(f: &FiniteFunction, alpha: f64, betas: &[f64]) -> Result<LemmaReport> {
    let s = betas.len() as u32;
    if s < 2 {
        return Err(invalid("PHASE_INV needs s >= 2"));
    }
    let s_deg = GowersDegree::new(s)?;
    let norm = gowers_norm(f, s_deg);
    let twisted = f.map(|x, v| v * e(frac_mul(alpha, x)));
    let norm_twisted = gowers_norm(&twisted, s_deg);
    let equal = agrees(norm_twisted, norm);
    let lhs = linear_phase_sum(f, alpha, betas).norm();
    let rhs = gowers_norm_power(f, s_deg);
    let digest = InputsDigest::default()
        .with("s", s as f64)
        .with("alpha", alpha)
        .with("norm", norm)
        .with("norm_twisted", norm_twisted);
    let ok = equal && holds(lhs, rhs);
    Ok(LemmaReport::asserted_with(LemmaId::PhaseInv, format!("s={s}"), lhs, rhs, ok, digest))
}

/// A function on a box `X₁ × X₂ × X₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3 {
    axes: [Interval; 3],
    values: Vec<Complex64>,
}

impl Grid3 {
    pub fn from_fn(axes: [Interval; 3], mut f: impl FnMut(i64, i64, i64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(axes.iter().map(Interval::len).product());
        for x1 in axes[0].iter() {
            for x2 in axes[1].iter() {
                for x3 in axes[2].iter() {
                    values.push(f(x1, x2, x3));
                }
            }
        }
        Self { axes, values }
    }

    pub fn axes(&self) -> [Interval; 3] {
        self.axes
    }

    pub fn at(&self, x1: i64, x2: i64, x3: i64) -> Complex64 {
        let [a, b, c] = self.axes;
        if !a.contains(x1) || !b.contains(x2) || !c.contains(x3) {
            return Complex64::default();
        }
        let i = ((x1 - a.lo()) as usize * b.len() + (x2 - b.lo()) as usize) * c.len() + (x3 - c.lo()) as usize;
        self.values[i]
    }
}

/// Box Cauchy–Schwarz with weights:
/// `|Σ_x F₁(x₂,x₃) F₂(x₁,x₃) F₃(x₁,x₂) F(x) μ(x)|⁸ <= Σ_{x⁰,x¹} Π_ω C^{|ω|} F(x^ω) μ(x^ω)`
/// for 1-bounded `F_i` and probability kernels `μ_i`.
///
/// The right side is evaluated as
/// `Σ_{x₁⁰,x₁¹,x₂⁰,x₂¹} μ₁μ₁μ₂μ₂ |Σ_{x₃} μ₃(x₃) H(x₃)|²` with `H` the
/// product of the four `F` values over the `(x₁, x₂)` corners.
pub fn box_cs(f: &Grid3, f1: &Grid2, f2: &Grid2, f3: &Grid2, mu: [&ProbKernel; 3]) -> Result<LemmaReport> {
    for g in [f1, f2, f3] {
        if g.values().iter().any(|v| v.norm() > 1.0 + crate::funcspace::BOUNDED_SLACK) {
            return Err(invalid("BOX_CS needs 1-bounded F₁, F₂, F₃"));
        }
    }
    let [x1s, x2s, x3s] = f.axes();
    let mut lhs_acc = ComplexSum::new();
    for x1 in x1s.iter() {
        for x2 in x2s.iter() {
            for x3 in x3s.iter() {
                let w = mu[0].weight(x1) * mu[1].weight(x2) * mu[2].weight(x3);
                if w == 0.0 {
                    continue;
                }
                lhs_acc.add(f1.at(x2, x3) * f2.at(x1, x3) * f3.at(x1, x2) * f.at(x1, x2, x3) * w);
            }
        }
    }
    let lhs = lhs_acc.value().norm().powi(8);
    let mut rhs_acc = NeumaierSum::new();
    for x1a in x1s.iter() {
        for x1b in x1s.iter() {
            let w1 = mu[0].weight(x1a) * mu[0].weight(x1b);
            if w1 == 0.0 {
                continue;
            }
            for x2a in x2s.iter() {
                for x2b in x2s.iter() {
                    let w2 = mu[1].weight(x2a) * mu[1].weight(x2b);
                    if w2 == 0.0 {
                        continue;
                    }
                    let inner = sum_complex(x3s.iter().map(|x3| {
                        mu[2].weight(x3)
                            * f.at(x1a, x2a, x3)
                            * f.at(x1b, x2a, x3).conj()
                            * f.at(x1a, x2b, x3).conj()
                            * f.at(x1b, x2b, x3)
                    }));
                    rhs_acc.add(w1 * w2 * inner.norm_sqr());
                }
            }
        }
    }
    let digest = InputsDigest::default()
        .with("X1", x1s.len() as f64)
        .with("X2", x2s.len() as f64)
        .with("X3", x3s.len() as f64);
    Ok(LemmaReport::asserted(LemmaId::BoxCs, "weighted", lhs, rhs_acc.value(), digest))
}

/// `h(x) = Σ_k μ_K(k) f(x + bk)` changes by at most `4|y|/⌊K⌋` under
/// `x -> x + by`. Reports the `y` with the largest ratio.
pub fn h_lipschitz(f: &FiniteFunction, b: i64, k: f64, ys: &[i64]) -> Result<LemmaReport> {
    require_bounded(f, "f")?;
    if ys.is_empty() || ys.contains(&0) {
        return Err(invalid("H_LIPSCHITZ needs nonzero steps y"));
    }
    let mu = fejer(k)?;
    let h = convolve(f, &mu.pushforward(-b, 0)?.to_function());
    let kf = k.floor();
    let mut worst: Option<(f64, f64, i64)> = None;
    let mut ok = true;
    for &y in ys {
        let shift = b * y;
        let lo = h.offset().min(h.offset() - shift);
        let hi = h.end().max(h.end() - shift);
        let lhs = (lo..hi).map(|x| (h.at(x + shift) - h.at(x)).norm()).fold(0.0, f64::max);
        let rhs = 4.0 * y.unsigned_abs() as f64 / kf;
        ok &= holds(lhs, rhs);
        if worst.is_none_or(|(l, r, _)| lhs * r > l * rhs) {
            worst = Some((lhs, rhs, y));
        }
    }
    let (lhs, rhs, y) = worst.unwrap();
    let digest = InputsDigest::default().with("b", b as f64).with("K", k).with("y", y as f64);
    Ok(LemmaReport::asserted_with(LemmaId::HLipschitz, "worst_y", lhs, rhs, ok, digest))
}

/// `φ(h⁰; h¹) = Σ_ω (-1)^{|ω|} φ(h^ω)`.
fn alternating_phase(phi: &dyn Fn(&[i64]) -> f64, h0: &[i64], h1: &[i64]) -> f64 {
    let s = h0.len();
    let mut total = 0.0;
    for w in 0..1u32 << s {
        let point: Vec<i64> = (0..s).map(|i| if w >> i & 1 == 0 { h0[i] } else { h1[i] }).collect();
        let sign = if w.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * phi(&point);
    }
    total
}

/// Moving an average over `y` inside the differencing:
/// `(N^{-s-1} Σ_{h ∈ H} |Σ_x Δ_h F(x) e(φ(h) x)|)^{2^s}` against
/// `N^{-2s-1} Σ_{h⁰,h¹ ∈ H} |Σ_x E_y Δ_{h⁰-h¹} F_y(x) e(φ(h⁰;h¹) x)|`
/// with `F = E_y F_y`. At `s = 0` both sides are the same quantity computed
/// in different orders, and agreement is asserted.
pub fn dual_interchange(
    fys: &[FiniteFunction],
    n: u64,
    hs: &[Vec<i64>],
    phi: &dyn Fn(&[i64]) -> f64,
) -> Result<LemmaReport> {
    if fys.is_empty() || hs.is_empty() {
        return Err(invalid("DUAL_INTERCHANGE needs functions and shifts"));
    }
    let s = hs[0].len();
    if hs.iter().any(|h| h.len() != s) {
        return Err(invalid("DUAL_INTERCHANGE shifts must share a dimension"));
    }
    for f in fys {
        require_within(f, n, "F_y")?;
        require_bounded(f, "F_y")?;
    }
    let nf = n as f64;
    let my = fys.len() as f64;
    let avg = fys
        .iter()
        .fold(FiniteFunction::zero(), |acc, f| acc.add(f))
        .scale(Complex64::new(1.0 / my, 0.0));
    let mut a = NeumaierSum::new();
    for h in hs {
        a.add(twisted_sum(&iterated_difference(&avg, h), phi(h)).norm());
    }
    let lhs = (a.value() / nf.powi(s as i32 + 1)).powi(1 << s);
    let mut b = NeumaierSum::new();
    for h0 in hs {
        for h1 in hs {
            let diff: Vec<i64> = h0.iter().zip(h1).map(|(x, y)| x - y).collect();
            let theta = alternating_phase(phi, h0, h1);
            let per_y = sum_complex(fys.iter().map(|f| twisted_sum(&iterated_difference(f, &diff), theta)));
            b.add((per_y / my).norm());
        }
    }
    let rhs = b.value() / nf.powi(2 * s as i32 + 1);
    let digest = InputsDigest::default()
        .with("s", s as f64)
        .with("N", nf)
        .with("|H|", hs.len() as f64)
        .with("Y", my);
    let variant = format!("s={s}");
    Ok(if s == 0 {
        LemmaReport::asserted_with(LemmaId::DualInterchange, variant, lhs, rhs, agrees(lhs, rhs), digest)
    } else {
        LemmaReport::reported(LemmaId::DualInterchange, variant, lhs, rhs, digest)
    })
}

/// Phases of lower rank: `N^{-s-1} Σ_{h ∈ (-N,N)^s} |Σ_x Δ_h f(x) e(θ(h) x)|`
/// with `θ(h) = Σ_{i <= m} φ_i(h without h_i)`, against
/// `(‖f‖^{2^{s+1}}_{U^{s+1}} / N^{s+2})^{2^{-m-1}}`.
///
/// With `m = 0` this is Cauchy–Schwarz over the `(2N - 1)^s` shifts; that
/// count enters the asserted bound.
pub fn low_rank(f: &FiniteFunction, n: u64, s: usize, phases: &[&dyn Fn(&[i64]) -> f64]) -> Result<LemmaReport> {
    require_within(f, n, "f")?;
    require_bounded(f, "f")?;
    let m = phases.len();
    if s == 0 || m > s || s + 1 > crate::gowers::MAX_DEGREE as usize {
        return Err(invalid("LOW_RANK needs 1 <= s, m <= s"));
    }
    let nf = n as f64;
    let mut acc = NeumaierSum::new();
    for h in cube(n as i64, s) {
        let d = iterated_difference(f, &h);
        if d.is_empty() {
            continue;
        }
        let theta: f64 = phases
            .iter()
            .enumerate()
            .map(|(i, phi)| {
                let rest: Vec<i64> = h.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                phi(&rest)
            })
            .sum();
        acc.add(twisted_sum(&d, theta).norm());
    }
    let lhs = acc.value() / nf.powi(s as i32 + 1);
    let u = gowers_norm_power(f, deg(s as u32 + 1));
    let constant_free = (u / nf.powi(s as i32 + 2)).powf(0.5f64.powi(m as i32 + 1));
    let digest = InputsDigest::default()
        .with("N", nf)
        .with("s", s as f64)
        .with("m", m as f64);
    let variant = format!("m={m},s={s}");
    Ok(if m == 0 {
        let rhs = ((2.0 * nf - 1.0).powi(s as i32) * u).sqrt() / nf.powi(s as i32 + 1);
        LemmaReport::asserted(LemmaId::LowRank, variant, lhs, rhs, digest.with("constant_one_rhs", constant_free))
    } else {
        LemmaReport::reported(LemmaId::LowRank, variant, lhs, constant_free, digest)
    })
}

/// `|E_{x ∈ [N]} E_{y ∈ [M]} f₀(x) f₁(x+ay) f₂(x+by) f₃(x+(a+b)y)|⁸` against
/// `Σ_h μ_H(h₁)μ_H(h₂)μ_H(h₃) E_{x ∈ [N]} Δ_{a h₁, b h₂, (a+b) h₃} f₃(x)`,
/// `M = ⌊√N⌋`.
pub fn diff_control(fs: [&FiniteFunction; 4], n: u64, a: i64, b: i64, h: f64) -> Result<LemmaReport> {
    for f in fs {
        require_within(f, n, "f_i")?;
        require_bounded(f, "f_i")?;
    }
    let m = n.isqrt() as i64;
    let nf = n as f64;
    let mut acc = ComplexSum::new();
    for x in 1..=n as i64 {
        let v0 = fs[0].at(x);
        if v0 == Complex64::default() {
            continue;
        }
        for y in 1..=m {
            acc.add(v0 * fs[1].at(x + a * y) * fs[2].at(x + b * y) * fs[3].at(x + (a + b) * y));
        }
    }
    let lhs = (acc.value() / (nf * m as f64)).norm().powi(8);
    let mu = fejer(h)?;
    let mut rhs = NeumaierSum::new();
    for (h1, w1) in mu.iter() {
        let d1 = difference(fs[3], a * h1);
        for (h2, w2) in mu.iter() {
            let d2 = difference(&d1, b * h2);
            for (h3, w3) in mu.iter() {
                rhs.add(w1 * w2 * w3 * difference(&d2, (a + b) * h3).sum().re / nf);
            }
        }
    }
    let digest = InputsDigest::default()
        .with("N", nf)
        .with("a", a as f64)
        .with("b", b as f64)
        .with("H", h);
    Ok(LemmaReport::reported(LemmaId::DiffControl, "fejer_weights", lhs, rhs.value(), digest))
}

/// `|Λ(f₀, f₁, f₂)|^32` against
/// `Σ_{a,b} μ_M(a)μ_M(b) Σ_h μ_H(h₁)μ_H(h₂)μ_H(h₃) E_{x ∈ [N]} Δ_{2q(a+b)h₁, 2qbh₂, 2qah₃} f₂(x)`.
pub fn linearisation(
    p: &CountingParams,
    f0: &FiniteFunction,
    f1: &FiniteFunction,
    f2: &FiniteFunction,
    h: f64,
) -> Result<LemmaReport> {
    for f in [f0, f1, f2] {
        require_within(f, p.n(), "f_i")?;
        require_bounded(f, "f_i")?;
    }
    let lhs = lambda(p, f0, f1, f2).norm().powi(32);
    let mu_m = fejer(p.m() as f64)?;
    let mu_h = fejer(h)?;
    let q2 = 2 * p.q() as i64;
    let nf = p.n() as f64;
    let mut acc = NeumaierSum::new();
    for (a, wa) in mu_m.iter() {
        for (b, wb) in mu_m.iter() {
            for (h1, w1) in mu_h.iter() {
                let d1 = difference(f2, q2 * (a + b) * h1);
                if d1.is_empty() {
                    continue;
                }
                for (h2, w2) in mu_h.iter() {
                    let d2 = difference(&d1, q2 * b * h2);
                    if d2.is_empty() {
                        continue;
                    }
                    for (h3, w3) in mu_h.iter() {
                        let v = difference(&d2, q2 * a * h3).sum().re;
                        acc.add(wa * wb * w1 * w2 * w3 * v / nf);
                    }
                }
            }
        }
    }
    let digest = InputsDigest::default()
        .with("q", p.q() as f64)
        .with("N", nf)
        .with("H", h);
    Ok(LemmaReport::reported(LemmaId::Linearisation, "fejer_weights", lhs, acc.value(), digest))
}

fn mod_inverse(b: i64, a: i64) -> i64 {
    // extended Euclid on (b mod a, a)
    let (mut r0, mut r1) = (b.rem_euclid(a), a);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let t = r0 / r1;
        (r0, r1) = (r1, r0 - t * r1);
        (s0, s1) = (s1, s0 - t * s1);
    }
    s0.rem_euclid(a)
}

/// Bounded `g`, `h` with `g` `a`-periodic, found for coprime `a, b` by
/// writing `x = a y + b z`, `z ∈ [a]`, and maximising the bilinear form
/// `|Σ_{y,z} f(ay + bz) L(y) R(z)|` by alternating best responses; then
/// `h(x) = L(y)`, `g(x) = R(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearWitness {
    pub g: FiniteFunction,
    pub h: FiniteFunction,
    pub correlation: f64,
}

pub fn bilinear_witness(f: &FiniteFunction, a: u64, b: u64) -> Result<BilinearWitness> {
    if a == 0 || b == 0 || gcd(a, b) != 1 {
        return Err(invalid("bilinear witness needs coprime positive a, b"));
    }
    let Some(window) = f.window() else {
        return Ok(BilinearWitness {
            g: FiniteFunction::zero(),
            h: FiniteFunction::zero(),
            correlation: 0.0,
        });
    };
    let (ai, bi) = (a as i64, b as i64);
    let binv = mod_inverse(bi, ai);
    let coords: Vec<(i64, usize)> = window
        .iter()
        .map(|x| {
            let z0 = (x.rem_euclid(ai) * binv).rem_euclid(ai);
            let z = if z0 == 0 { ai } else { z0 };
            ((x - bi * z) / ai, (z - 1) as usize)
        })
        .collect();
    let y_min = coords.iter().map(|c| c.0).min().unwrap();
    let ny = (coords.iter().map(|c| c.0).max().unwrap() - y_min + 1) as usize;
    let entries: Vec<(usize, usize, Complex64)> = coords
        .iter()
        .zip(f.values())
        .map(|(&(y, z), &v)| ((y - y_min) as usize, z, v))
        .collect();
    let one = Complex64::new(1.0, 0.0);
    let value = |l: &[Complex64], r: &[Complex64]| sum_complex(entries.iter().map(|&(y, z, v)| v * l[y] * r[z])).norm();
    let respond_l = |r: &[Complex64]| {
        let mut acc = vec![Complex64::default(); ny];
        for &(y, z, v) in &entries {
            acc[y] += v * r[z];
        }
        acc.into_iter().map(|c| phase_of(c.conj())).collect::<Vec<_>>()
    };
    let respond_r = |l: &[Complex64]| {
        let mut acc = vec![Complex64::default(); a as usize];
        for &(y, z, v) in &entries {
            acc[z] += v * l[y];
        }
        acc.into_iter().map(|c| phase_of(c.conj())).collect::<Vec<_>>()
    };
    let ascend = |mut l: Vec<Complex64>| {
        let mut r = respond_r(&l);
        let mut best = value(&l, &r);
        for _ in 0..100 {
            l = respond_l(&r);
            r = respond_r(&l);
            let v = value(&l, &r);
            if v <= best * (1.0 + 1e-12) {
                best = best.max(v);
                break;
            }
            best = v;
        }
        (best, l, r)
    };
    // start from R = 1, and from the column of largest mass
    let start_flat = respond_l(&vec![one; a as usize]);
    let mut mass = vec![0.0; a as usize];
    for &(_, z, v) in &entries {
        mass[z] += v.norm();
    }
    let z_star = (0..a as usize).fold(0, |best, z| if mass[z] > mass[best] { z } else { best });
    let mut start_col = vec![one; ny];
    for &(y, z, v) in &entries {
        if z == z_star {
            start_col[y] = phase_of(v.conj());
        }
    }
    let first = ascend(start_flat);
    let second = ascend(start_col);
    let (_, l, r) = if second.0 > first.0 { second } else { first };
    let g = FiniteFunction::new(window.lo(), coords.iter().map(|&(_, z)| r[z]).collect());
    let h = FiniteFunction::new(window.lo(), coords.iter().map(|&(y, _)| l[(y - y_min) as usize]).collect());
    let correlation = f.mul(&g).mul(&h).sum().norm();
    Ok(BilinearWitness { g, h, correlation })
}

/// Arithmetic box norm inverse for coprime `a, b`: the constructed `g, h`
/// against `δ⌊H⌋² - 2(H/a + Hb/N)⌊H⌋²`, where `δN` is the arithmetic box norm.
pub fn box_inverse(f: &FiniteFunction, n: u64, a: u64, b: u64, h: f64) -> Result<LemmaReport> {
    require_within(f, n, "f")?;
    require_bounded(f, "f")?;
    let nf = n as f64;
    let delta = arith_box_norm(f, a, b, h)? / nf;
    let w = bilinear_witness(f, a, b)?;
    let hf = h.floor();
    let rhs = (delta - 2.0 * (h / a as f64 + h * b as f64 / nf)) * hf * hf;
    let digest = InputsDigest::default()
        .with("N", nf)
        .with("a", a as f64)
        .with("b", b as f64)
        .with("H", h)
        .with("delta", delta);
    Ok(LemmaReport::reported(LemmaId::BoxInverse, "alternating_ascent", w.correlation, rhs, digest))
}

/// Arithmetic correlation: an `a`-periodic `g` built on the best residue
/// class mod `gcd(a, b)`, scored by
/// `Σ_x f g(x) Σ_k μ_K(k) conj(f g)(x + bk)` against `δ² H⁴ / N`.
pub fn arithcor(f: &FiniteFunction, n: u64, a: u64, b: u64, h: f64, k: f64, c: f64) -> Result<LemmaReport> {
    require_within(f, n, "f")?;
    require_bounded(f, "f")?;
    if a == 0 || b == 0 {
        return Err(invalid("ARITHCOR needs positive a, b"));
    }
    let nf = n as f64;
    let d = gcd(a, b);
    let delta = arith_box_norm(f, a, b, h)? / nf;
    let (ad, bd) = (a / d, b / d);
    let mut best: Option<(f64, i64)> = None;
    for u in 0..d as i64 {
        let v = arith_box_norm(&f.compress(u, d), ad, bd, h)?;
        if best.is_none_or(|(bv, _)| v > bv) {
            best = Some((v, u));
        }
    }
    let (_, u) = best.unwrap();
    let fu = f.compress(u, d);
    let w = bilinear_witness(&fu, ad, bd)?;
    let g = FiniteFunction::from_points(w.g.iter().map(|(x, v)| (u + d as i64 * x, v)));
    let fg = f.mul(&g);
    let mu = fejer(k)?;
    let mut acc = NeumaierSum::new();
    for (kk, wk) in mu.iter() {
        acc.add(wk * difference(&fg, b as i64 * kk).sum().re);
    }
    let lhs = acc.value();
    let rhs = delta * delta * h.powi(4) / nf;
    let root_n = nf.sqrt();
    let met = h <= c * delta.powi(3) * root_n
        && k <= c * delta * delta * h * h / root_n
        && (d as f64) <= 1.0 / delta
        && (a.min(b) as f64) >= delta * root_n;
    let digest = InputsDigest::default()
        .with("N", nf)
        .with("a", a as f64)
        .with("b", b as f64)
        .with("H", h)
        .with("K", k)
        .with("c", c)
        .with("delta", delta)
        .with("class", u as f64)
        .with("hypotheses_met", f64::from(u8::from(met)));
    Ok(LemmaReport::reported(LemmaId::Arithcor, "best_class", lhs, rhs, digest))
}

/// `g(x) = table[x mod a]` with `a = table.len()`, on `[N]`.
fn periodic(table: &[Complex64], n: u64) -> FiniteFunction {
    let a = table.len() as i64;
    FiniteFunction::from_fn(Interval::first(n).expect("N >= 1"), |x| table[x.rem_euclid(a) as usize])
}

fn check_tables(tables: &[Vec<Complex64>]) -> Result<()> {
    for (i, t) in tables.iter().enumerate() {
        if t.len() != i + 1 {
            return Err(invalid("periodic tables must have lengths 1, 2, ..., R"));
        }
        if t.iter().any(|v| v.norm() > 1.0 + crate::funcspace::BOUNDED_SLACK) {
            return Err(invalid("periodic tables must be 1-bounded"));
        }
    }
    Ok(())
}

/// Densification at `s = 1`: with
/// `δ = E_{a ∈ [R]} Σ_h μ_H(h) |Σ_x Δ_{ah} f(x)|² / N²`, `R = H = ⌊√N⌋`,
/// the normalised `‖f‖⁴_{U²}` against `δ^12`.
pub fn densify(f: &FiniteFunction, n: u64) -> Result<LemmaReport> {
    require_within(f, n, "f")?;
    require_bounded(f, "f")?;
    let r = n.isqrt();
    let nf = n as f64;
    let mu = fejer(r as f64)?;
    let mut acc = NeumaierSum::new();
    for a in 1..=r as i64 {
        for (hh, w) in mu.iter() {
            acc.add(w * difference(f, a * hh).sum().norm_sqr());
        }
    }
    let delta = acc.value() / r as f64 / (nf * nf);
    let one = indicator(Interval::first(n)?);
    let lhs = gowers_norm_power(f, deg(2)) / gowers_norm_power(&one, deg(2));
    let digest = InputsDigest::default().with("N", nf).with("delta", delta);
    Ok(LemmaReport::reported(LemmaId::Densify, "s=1", lhs, delta.powi(12), digest))
}

/// Periodic products at `s = 1`: with
/// `δ = E_{a ∈ [R]} |Σ_x f(x) g_a(x)|² / N²` for `a`-periodic `g_a`, the
/// normalised `‖f‖⁴_{U²}` against `δ^24`.
pub fn periodic_product(f: &FiniteFunction, n: u64, tables: &[Vec<Complex64>]) -> Result<LemmaReport> {
    require_within(f, n, "f")?;
    require_bounded(f, "f")?;
    check_tables(tables)?;
    if tables.is_empty() {
        return Err(invalid("PERIODIC_PRODUCT needs R >= 1"));
    }
    let nf = n as f64;
    let mut acc = NeumaierSum::new();
    for t in tables {
        acc.add(f.mul(&periodic(t, n)).sum().norm_sqr());
    }
    let delta = acc.value() / tables.len() as f64 / (nf * nf);
    let one = indicator(Interval::first(n)?);
    let lhs = gowers_norm_power(f, deg(2)) / gowers_norm_power(&one, deg(2));
    let digest = InputsDigest::default()
        .with("N", nf)
        .with("R", tables.len() as f64)
        .with("delta", delta);
    Ok(LemmaReport::reported(LemmaId::PeriodicProduct, "s=1", lhs, delta.powi(24), digest))
}

/// Core of the main iteration. For `b ∈ [R]`, `R = ⌊√N⌋`, with `b`-periodic
/// `g_b`, functions `h_b` on `[N]` and `h̃_b(x) = Σ_k μ_K(k) h_b(x + (a+b)k)`,
/// `δ` is the largest `j/64` such that the sum of `Re Σ_x f g_b h̃_b` over
/// `δ√N <= b <= √N` with `gcd(a, b) <= 1/δ` is at least `δ N^{3/2}`. The
/// normalised `E_b ‖h_b‖⁸_{U³}` is reported against `δ^208`.
pub fn hb_core(
    f: &FiniteFunction,
    n: u64,
    a: u64,
    k: f64,
    tables: &[Vec<Complex64>],
    hs: &[FiniteFunction],
) -> Result<LemmaReport> {
    require_within(f, n, "f")?;
    require_bounded(f, "f")?;
    check_tables(tables)?;
    if tables.len() != hs.len() || hs.is_empty() {
        return Err(invalid("HB_CORE needs one g_b and one h_b per b ∈ [R]"));
    }
    for h in hs {
        require_within(h, n, "h_b")?;
        require_bounded(h, "h_b")?;
    }
    let nf = n as f64;
    let mu = fejer(k)?;
    let terms: Vec<f64> = tables
        .iter()
        .zip(hs)
        .enumerate()
        .map(|(i, (t, h))| {
            let b = i as i64 + 1;
            let smooth = convolve(h, &mu.pushforward(-(a as i64 + b), 0)?.to_function());
            Ok(f.mul(&periodic(t, n)).mul(&smooth).sum().re)
        })
        .collect::<Result<_>>()?;
    let root_n = nf.sqrt();
    let delta = (1..=64)
        .rev()
        .map(|j| j as f64 / 64.0)
        .find(|&dl| {
            let s = crate::sum::sum_f64(terms.iter().enumerate().filter_map(|(i, &t)| {
                let b = i as u64 + 1;
                let ok = b as f64 >= dl * root_n && b as f64 <= root_n && gcd(a, b) as f64 <= 1.0 / dl;
                ok.then_some(t)
            }));
            s >= dl * nf * root_n
        })
        .unwrap_or(0.0);
    let one = gowers_norm_power(&indicator(Interval::first(n)?), deg(3));
    let mean = crate::sum::sum_f64(hs.iter().map(|h| gowers_norm_power(h, deg(3)))) / hs.len() as f64;
    let lhs = mean / one;
    let rhs = delta.powi(208);
    let digest = InputsDigest::default()
        .with("N", nf)
        .with("a", a as f64)
        .with("K", k)
        .with("delta", delta);
    let report = LemmaReport::reported(LemmaId::HbCore, "planted_hb", lhs, rhs, digest);
    Ok(if rhs == 0.0 && delta > 0.0 {
        report.with_note("delta^208 underflows")
    } else {
        report
    })
}

/// With `δ = |Λ(g₀, g₁, f)| / Λ(1, 1, 1)`, the class-summed normalised
/// `‖f‖^32_{U⁵}` against `δ^{2^25}`.
pub fn global_u5(p: &CountingParams, g0: &FiniteFunction, g1: &FiniteFunction, f: &FiniteFunction) -> Result<LemmaReport> {
    for h in [g0, g1, f] {
        require_within(h, p.n(), "inputs")?;
        require_bounded(h, "inputs")?;
    }
    let one = indicator(p.domain());
    let delta = lambda(p, g0, g1, f).norm() / lambda(p, &one, &one, &one).re;
    let lhs = class_power(f, p.q(), 5) / class_power(&one, p.q(), 5);
    let rhs = delta.powf(2f64.powi(25));
    let digest = InputsDigest::default()
        .with("q", p.q() as f64)
        .with("N", p.n() as f64)
        .with("delta", delta);
    let report = LemmaReport::reported(LemmaId::GlobalU5, "class_sum", lhs, rhs, digest);
    Ok(if rhs == 0.0 && delta > 0.0 {
        report.with_note("delta^(2^25) underflows")
    } else {
        report
    })
}

fn denominator_bound(delta: f64) -> u64 {
    if delta > 0.0 {
        delta.powi(-4).ceil().min(Q_CAP) as u64
    } else {
        Q_CAP as u64
    }
}

/// Weyl: with `δ = |E_{y ∈ I} e(αy² + βy)|` and `q'` the best denominator up
/// to `⌈δ^{-4}⌉`, `‖q'α‖` against `δ^{-14} / |I|²`.
pub fn weyl(alpha: Frequency, beta: Frequency, interval: Interval) -> Result<LemmaReport> {
    let delta = crate::diophantine::weyl_sum(alpha, beta, interval);
    let q_max = denominator_bound(delta);
    let r = best_denominator(alpha, q_max)?;
    let len = interval.len() as f64;
    let rhs = delta.powi(-14) / (len * len);
    let digest = InputsDigest::default()
        .with("alpha", alpha.value())
        .with("beta", beta.value())
        .with("len", len)
        .with("delta", delta)
        .with("q_found", r.denominator as f64);
    Ok(LemmaReport::reported(LemmaId::Weyl, "best_denominator", r.err, rhs, digest))
}

/// With `δ = |Σ_{qx ∈ [N]} Σ_{y ∈ [M]} g₀(qx) g₁(qx + y) e(α(x + y²))| / (MN/q)`
/// and `q'` the best denominator of `q²α` up to `⌈δ^{-4}⌉`, `‖q' q² α‖`
/// against `δ^{-14} q³ / N`.
pub fn lem62(p: &CountingParams, g0: &FiniteFunction, g1: &FiniteFunction, alpha: Frequency) -> Result<LemmaReport> {
    for h in [g0, g1] {
        require_within(h, p.n(), "g_i")?;
        require_bounded(h, "g_i")?;
    }
    let q = p.q() as i64;
    let m = p.m() as i64;
    let mut acc = ComplexSum::new();
    for x in 1..=p.n() as i64 / q {
        let v = g0.at(q * x);
        if v == Complex64::default() {
            continue;
        }
        for y in 1..=m {
            acc.add(v * g1.at(q * x + y) * e(frac_mul(alpha.value(), x + y * y)));
        }
    }
    let nf = p.n() as f64;
    let qf = p.q() as f64;
    let delta = acc.value().norm() / (p.m() as f64 * nf / qf);
    let scaled = Frequency::new(frac_mul(alpha.value(), q * q));
    let r = best_denominator(scaled, denominator_bound(delta))?;
    let rhs = delta.powi(-14) * qf.powi(3) / nf;
    let digest = InputsDigest::default()
        .with("q", qf)
        .with("N", nf)
        .with("alpha", alpha.value())
        .with("delta", delta)
        .with("q_found", r.denominator as f64);
    Ok(LemmaReport::reported(LemmaId::Lem62, "best_denominator", r.err, rhs, digest))
}

/// On the dual `F` of `(f₀, f₁)`: with `δ` the class-summed normalised
/// `‖F‖⁸_{U³}`, the class-summed normalised `‖F‖⁴_{U²}` against `δ^1024`.
pub fn degree_lower(p: &CountingParams, f0: &FiniteFunction, f1: &FiniteFunction) -> Result<LemmaReport> {
    for h in [f0, f1] {
        require_within(h, p.n(), "f_i")?;
        require_bounded(h, "f_i")?;
    }
    let dual = dual_function(p, f0, f1);
    let one = indicator(p.domain());
    let q = p.q();
    let delta = class_power(&dual, q, 3) / class_power(&one, q, 3);
    let lhs = class_power(&dual, q, 2) / class_power(&one, q, 2);
    let rhs = delta.powi(1024);
    let digest = InputsDigest::default()
        .with("q", q as f64)
        .with("N", p.n() as f64)
        .with("delta", delta);
    let report = LemmaReport::reported(LemmaId::DegreeLower, "dual_s=3", lhs, rhs, digest);
    Ok(if rhs == 0.0 && delta > 0.0 {
        report.with_note("delta^1024 underflows")
    } else {
        report
    })
}
