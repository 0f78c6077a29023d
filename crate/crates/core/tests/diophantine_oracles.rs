use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;
use uniformity_lab::diophantine::{
    arc_numerator, best_denominator, circle_dist, convergent_best_denominator, convergent_denominators, dist_mul,
    weyl_sum,
};
use uniformity_lab::fourier::Frequency;
use uniformity_lab::funcspace::Interval;

/// The stored double `alpha ∈ [2^-60, 1)` as an exact fraction.
fn dyadic(alpha: f64) -> Ratio<i128> {
    let bits = alpha.to_bits();
    let exp = (bits >> 52 & 0x7ff) as i32;
    let mant = (bits & ((1 << 52) - 1) | 1 << 52) as i128;
    let shift = 1075 - exp;
    assert!((53..=113).contains(&shift), "alpha out of range: {alpha}");
    Ratio::new(mant, 1i128 << shift)
}

/// `‖q α‖` in exact rational arithmetic on the stored double.
fn exact_dist(alpha: f64, q: u64) -> Ratio<i128> {
    let a = dyadic(alpha);
    assert_eq!(*a.numer() as f64 / *a.denom() as f64, alpha);
    let t = a * q as i128;
    let frac = t - t.floor();
    frac.min(Ratio::from_integer(1) - frac)
}

#[test]
fn known_approximations() {
    let r = best_denominator(Frequency::new(2f64.sqrt() - 1.0), 100).unwrap();
    assert_eq!((r.denominator, r.numerator), (70, 29));
    let r = best_denominator(Frequency::new(0.25), 10).unwrap();
    assert_eq!((r.denominator, r.numerator, r.err), (4, 1, 0.0));
    assert!(best_denominator(Frequency::new(0.3), 0).is_err());
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    assert_eq!(convergent_denominators(Frequency::new(golden), 100), vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
}

#[test]
fn large_bounds_use_convergents_consistently() {
    for alpha in [std::f64::consts::PI - 3.0, std::f64::consts::E - 2.0, 0.123456789] {
        let big = best_denominator(Frequency::new(alpha), 10_000_000).unwrap();
        let small = best_denominator(Frequency::new(alpha), 1_000_000).unwrap();
        assert!(big.err <= small.err);
        assert!(big.err <= 1.0 / 10_000_000.0);
    }
}

#[test]
fn weyl_sum_of_a_rational_square_phase() {
    // Σ_{y=1}^{4} e(y²/4) = e(1/4) + 1 + e(1/4) + 1 = 2 + 2i
    let v = weyl_sum(Frequency::new(0.25), Frequency::new(0.0), Interval::first(4).unwrap());
    assert!((v - 8f64.sqrt() / 4.0).abs() < 1e-12);
    assert!((weyl_sum(Frequency::new(0.0), Frequency::new(0.0), Interval::first(9).unwrap()) - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn dist_mul_is_exact(alpha in 1e-6f64..1.0, q in 1u64..100_000) {
        let exact = exact_dist(alpha, q);
        let got = dist_mul(Frequency::new(alpha), q);
        let want = *exact.numer() as f64 / *exact.denom() as f64;
        prop_assert!((got - want).abs() <= 1e-15);
    }

    #[test]
    fn best_denominator_is_optimal_and_obeys_dirichlet(alpha in 1e-6f64..1.0, q_max in 1u64..3000) {
        let r = best_denominator(Frequency::new(alpha), q_max).unwrap();
        let best = exact_dist(alpha, r.denominator);
        for q in 1..=q_max {
            let d = exact_dist(alpha, q);
            prop_assert!(d > best || (d == best && q >= r.denominator));
        }
        prop_assert!(r.err <= 1.0 / (q_max + 1) as f64 + 1e-15);
        let conv = convergent_best_denominator(Frequency::new(alpha), q_max).unwrap();
        prop_assert_eq!(exact_dist(alpha, conv.denominator), best);
    }

    #[test]
    fn weyl_sum_matches_direct(alpha in 0.0f64..1.0, beta in 0.0f64..1.0, lo in -50i64..50, len in 1i64..80) {
        let interval = Interval::new(lo, lo + len).unwrap();
        let mut acc = Complex64::default();
        for y in lo..lo + len {
            let t = (alpha * (y * y) as f64 + beta * y as f64).rem_euclid(1.0);
            acc += Complex64::from_polar(1.0, std::f64::consts::TAU * t);
        }
        let direct = acc.norm() / len as f64;
        prop_assert!((weyl_sum(Frequency::new(alpha), Frequency::new(beta), interval) - direct).abs() <= 1e-9);
    }

    #[test]
    fn arc_numerator_is_the_least_hit(alpha in 0.0f64..1.0, d in 1u64..60, r in 0.0f64..0.2) {
        let hits: Vec<u64> = (0..d).filter(|&a| circle_dist(alpha, a as f64 / d as f64) <= r).collect();
        prop_assert_eq!(arc_numerator(Frequency::new(alpha), d, r), hits.first().copied());
    }
}
