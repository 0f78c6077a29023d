use num_complex::Complex64;
use proptest::prelude::*;
use uniformity_lab::fourier::ft_grid;
use uniformity_lab::funcspace::{fejer, indicator, FiniteFunction, Interval};
use uniformity_lab::gowers::{
    a_norm, a_norm_power, arith_box_norm, box_norm_power, gowers_inner, gowers_norm, gowers_norm_on_class,
    gowers_norm_power, Grid2, GowersDegree,
};

fn deg(s: u32) -> GowersDegree {
    GowersDegree::new(s).unwrap()
}

fn bounded_fn(max_len: usize) -> impl Strategy<Value = FiniteFunction> {
    (-10i64..10, prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..max_len)).prop_map(|(offset, vals)| {
        FiniteFunction::new(
            offset,
            vals.into_iter()
                .map(|(r, t)| Complex64::from_polar(r, std::f64::consts::TAU * t))
                .collect(),
        )
    })
}

#[test]
fn indicator_of_two_points_has_u2_power_six() {
    let f = indicator(Interval::new(1, 3).unwrap());
    assert!((gowers_norm_power(&f, deg(2)) - 6.0).abs() < 1e-12);
    assert!((gowers_norm(&f, deg(2)) - 6f64.powf(0.25)).abs() < 1e-12);
}

#[test]
fn delta_has_unit_norm_in_every_degree() {
    for s in 1..=4 {
        assert!((gowers_norm(&FiniteFunction::delta(7), deg(s)) - 1.0).abs() < 1e-12);
    }
    assert_eq!(gowers_norm(&FiniteFunction::zero(), deg(3)), 0.0);
}

#[test]
fn u1_on_a_class_counts_the_class() {
    let f = indicator(Interval::first(20).unwrap());
    for q in 1..=6u64 {
        for u in 0..q as i64 {
            let count = (1..=20).filter(|x: &i64| x.rem_euclid(q as i64) == u).count() as f64;
            assert!((gowers_norm_on_class(&f, u, q, deg(1)).unwrap() - count).abs() < 1e-12);
        }
    }
}

#[test]
fn box_norm_matches_quadruple_loop() {
    let vals: Vec<Complex64> = (0..16)
        .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
        .collect();
    let xs = Interval::first(4).unwrap();
    let g = Grid2::new(xs, xs, vals).unwrap();
    let mut direct = Complex64::default();
    for x1 in 1..=4 {
        for x2 in 1..=4 {
            for y1 in 1..=4 {
                for y2 in 1..=4 {
                    direct += g.at(x1, y1) * g.at(x1, y2).conj() * g.at(x2, y1).conj() * g.at(x2, y2);
                }
            }
        }
    }
    assert!((box_norm_power(&g) - direct.re).abs() < 1e-10);
    assert!(direct.im.abs() < 1e-10);
}

fn sample_fn(n: i64) -> FiniteFunction {
    FiniteFunction::from_fn(Interval::first(n as u64).unwrap(), |x| {
        Complex64::from_polar(1.0, 0.37 * (x * x) as f64 + 0.11 * x as f64)
    })
}

#[test]
fn arith_box_matches_triple_loop() {
    let f = sample_fn(12);
    let mu = fejer(2.0).unwrap();
    let mut direct = 0.0;
    for (h1, w1) in mu.iter() {
        for (h2, w2) in mu.iter() {
            for x in -20..=32 {
                let v = f.at(x) * f.at(x + 2 * h1).conj() * f.at(x + 3 * h2).conj() * f.at(x + 2 * h1 + 3 * h2);
                direct += w1 * w2 * v.re;
            }
        }
    }
    assert!((arith_box_norm(&f, 2, 3, 2.0).unwrap() - direct).abs() < 1e-12);
}

#[test]
fn a_norm_matches_loop() {
    let f = sample_fn(16);
    let a = 3i64;
    let mut direct = 0.0;
    for b in 1..=4 {
        for h2 in 1..=4 {
            for h3 in 1..=4 {
                let (u, v) = (b * h2, (a + b) * h3);
                for x in -40..=40 {
                    direct += (f.at(x) * f.at(x + u).conj() * f.at(x + v).conj() * f.at(x + u + v)).re;
                }
            }
        }
    }
    let power = a_norm_power(&f, 3, 16).unwrap();
    assert!((power - direct).abs() < 1e-10);
    assert!((a_norm(&f, 3, 16).unwrap() - direct.signum() * direct.abs().powf(0.25)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn u2_power_is_the_fourth_moment_of_the_transform(f in bounded_fn(30)) {
        let modulus = 8 * (f.max_abs_coordinate() as usize + 1);
        let grid = ft_grid(&f, modulus).unwrap();
        let fourth: f64 = grid.iter().map(|c| c.norm_sqr().powi(2)).sum::<f64>() / modulus as f64;
        let power = gowers_norm_power(&f, deg(2));
        prop_assert!((fourth - power).abs() <= 1e-9 * (1.0 + power));
    }

    #[test]
    fn norms_are_shift_and_conjugation_invariant(f in bounded_fn(12), t in -50i64..50, s in 1u32..=3) {
        let base = gowers_norm_power(&f, deg(s));
        prop_assert!((gowers_norm_power(&f.shift(t), deg(s)) - base).abs() <= 1e-9 * (1.0 + base));
        prop_assert!((gowers_norm_power(&f.conj(), deg(s)) - base).abs() <= 1e-9 * (1.0 + base));
    }

    #[test]
    fn inner_product_on_copies_is_the_norm(f in bounded_fn(12), s in 1u32..=3) {
        let copies = vec![f.clone(); 1 << s];
        let inner = gowers_inner(&copies).unwrap();
        let power = gowers_norm_power(&f, deg(s));
        prop_assert!((inner.re - power).abs() <= 1e-9 * (1.0 + power));
        prop_assert!(inner.im.abs() <= 1e-9 * (1.0 + power));
    }

    #[test]
    fn gowers_cauchy_schwarz(fs in prop::collection::vec(bounded_fn(10), 4)) {
        let lhs = gowers_inner(&fs).unwrap().norm();
        let rhs: f64 = fs.iter().map(|f| gowers_norm(f, deg(2))).product();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn arith_box_is_nonnegative(f in bounded_fn(16), a in 1u64..4, b in 1u64..4, h in 1.0f64..6.0) {
        prop_assert!(arith_box_norm(&f, a, b, h).unwrap() >= -1e-10);
    }
}
