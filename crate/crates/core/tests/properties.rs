//! Randomized invariants across modules: norm axioms on piecewise
//! directions, Galois inversion on mixtures, distortion shape constraints
//! under random parameters, and the equivalence of the two distortion-risk
//! evaluation paths.

use proptest::prelude::*;

use riskfunc::dist::EmpiricalDist;
use riskfunc::risk::{eval_distortion_risk, eval_empirical_l};
use riskfunc::weights::weighted_sup_norm;
use riskfunc::{Direction, Dist, Distortion, WeightFn};

fn direction_strategy() -> impl Strategy<Value = Direction> {
    let seg = (
        -2.0f64..2.0,
        0.05f64..1.5,
        prop::array::uniform4(-1.0f64..1.0),
    );
    prop::collection::vec(seg, 1..3).prop_map(|segs| {
        let mut v = Direction::zero();
        let mut cursor = -3.0;
        for (gap, width, coeffs) in segs {
            let start = cursor + (gap + 2.0) * 0.5;
            let end = start + width;
            v = v.add(&Direction::poly(coeffs, start, end));
            cursor = end;
        }
        v
    })
}

fn weight_strategy() -> impl Strategy<Value = WeightFn> {
    prop_oneof![Just(WeightFn::One), (0.1f64..3.0).prop_map(WeightFn::power)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_absolutely_homogeneous(v in direction_strategy(), phi in weight_strategy(),
                                      c in -4.0f64..4.0) {
        let n = weighted_sup_norm(&v, &phi);
        let nc = weighted_sup_norm(&v.scale(c), &phi);
        prop_assert!((nc - c.abs() * n).abs() <= 1e-12 * (1.0 + n));
    }

    #[test]
    fn norm_satisfies_the_triangle_inequality(u in direction_strategy(),
                                              v in direction_strategy(),
                                              phi in weight_strategy()) {
        let nu = weighted_sup_norm(&u, &phi);
        let nv = weighted_sup_norm(&v, &phi);
        let ns = weighted_sup_norm(&u.add(&v), &phi);
        prop_assert!(ns <= nu + nv + 1e-12, "{ns} > {nu} + {nv}");
    }

    #[test]
    fn norm_vanishes_only_with_the_direction(v in direction_strategy()) {
        let n = weighted_sup_norm(&v, &WeightFn::One);
        // evaluate on a dense grid inside the window
        let (a, b) = v.window().unwrap();
        let mut max_val: f64 = 0.0;
        for i in 0..=400 {
            let x = a + (b - a) * i as f64 / 400.0;
            max_val = max_val.max(v.eval(x).abs());
        }
        prop_assert!(n + 1e-12 >= max_val);
        if n == 0.0 {
            prop_assert!(max_val <= 1e-12);
        }
    }

    #[test]
    fn galois_property_on_mixtures(h in 0.05f64..0.95, s in 0.001f64..0.999,
                                   x in -1.0f64..3.5) {
        let f0 = Dist::uniform(0.0, 1.0).unwrap();
        let g = Dist::exponential(1.5).unwrap();
        let mix = Dist::contaminate(&f0, &g, h).unwrap();
        let q = mix.left_inv(s);
        // F(x) >= s  <=>  x >= F^{<-}(s), up to the bisection tolerance
        prop_assert_eq!(mix.cdf(x) >= s, x >= q - 1e-9);
    }

    #[test]
    fn distortions_keep_their_shape_under_random_parameters(
        alpha in 0.01f64..1.0,
        a in 0.01f64..1.0,
        p in 1.0f64..8.0,
        tau in 0.5f64..0.99,
        beta in 0.05f64..1.0,
        t in 0.0f64..0.99,
    ) {
        let gs = [
            Distortion::avatr(alpha).unwrap(),
            Distortion::one_sided_moment(a, p).unwrap(),
            Distortion::expectile(tau).unwrap(),
            Distortion::proportional_hazard(beta).unwrap(),
        ];
        for g in &gs {
            // boundary values and range
            prop_assert!((g.eval(0.0)).abs() <= 1e-12);
            prop_assert!((g.eval(1.0) - 1.0).abs() <= 1e-12);
            let y = g.eval(t);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&y));
            // monotone and concave around t
            let t2 = (t + 0.005).min(1.0);
            let t3 = (t + 0.01).min(1.0);
            prop_assert!(g.eval(t2) >= y - 1e-12);
            if t3 > t2 && t2 > t {
                let chord = y + (g.eval(t3) - y) * (t2 - t) / (t3 - t);
                prop_assert!(g.eval(t2) >= chord - 1e-12);
            }
            // right derivative matches the forward difference where finite
            let d = g.rderiv(t).unwrap();
            if d.is_finite() && t < 0.98 {
                let h = 1e-8;
                let fd = (g.eval(t + h) - g.eval(t)) / h;
                prop_assert!((fd - d).abs() <= 1e-4 * (1.0 + d.abs()));
            }
        }
    }

    #[test]
    fn l_statistic_equals_quantile_path(xs in prop::collection::vec(-5.0f64..5.0, 1..120),
                                        alpha in 0.05f64..1.0) {
        let g = Distortion::avatr(alpha).unwrap();
        let l = eval_empirical_l(&g, &xs).unwrap();
        let emp: Dist = EmpiricalDist::new(&xs).unwrap().into();
        let d = eval_distortion_risk(&g, &emp).unwrap();
        prop_assert!((l - d).abs() <= 1e-9 * (1.0 + l.abs()));
    }

    #[test]
    fn empirical_cdf_and_inverses_are_consistent(xs in prop::collection::vec(-5.0f64..5.0, 1..60),
                                                 t in 0.01f64..1.0) {
        let emp = EmpiricalDist::new(&xs).unwrap();
        let q = emp.left_inv(t);
        // Galois on the step function
        prop_assert!(emp.cdf(q) >= t - 1e-12);
        prop_assert!(emp.cdf_left_limit(q) <= t + 1e-12);
    }
}
