use proptest::prelude::*;

use rde_core::besq::besq_step;
use rde_core::environment::{build_scales, family, hitting_samples, tail_h_unchecked, DiffusionConfig, Environment};
use rde_core::grid::GridFunction;
use rde_core::special::{gamma_p, gamma_q, hypergeom_2f1};
use rde_core::stats::{fit_loglog_slope, ks_two_sample, TailCurve, TailPoint};
use rde_core::sturm::solve_sturm_liouville;
use rde_core::{RngStream, Sequential};

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-1000i32..1000).prop_map(|k| k as f64 / 10.0), 50..200)
}

fn tail_curve() -> impl Strategy<Value = TailCurve> {
    prop::collection::vec((1.0f64..10.0, 0.001f64..0.5, 0.01f64..0.2), 3..7).prop_map(|pts| {
        let mut r = 1.0;
        TailCurve {
            points: pts
                .into_iter()
                .map(|(step, p, rel)| {
                    r *= 1.0 + step;
                    TailPoint { r, n: 1000, hits: 1, p_hat: p, stderr: rel * p }
                })
                .collect(),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ks_is_invariant_under_increasing_maps(a in sample(), b in sample()) {
        let base = ks_two_sample(&a, &b, 1.0).unwrap().statistic;
        let maps: [fn(f64) -> f64; 3] = [|x| 2.0 * x + 1.0, |x| (x / 50.0).exp(), f64::atan];
        for f in maps {
            let fa: Vec<f64> = a.iter().map(|x| f(*x)).collect();
            let fb: Vec<f64> = b.iter().map(|x| f(*x)).collect();
            prop_assert!((ks_two_sample(&fa, &fb, 1.0).unwrap().statistic - base).abs() < 1e-12);
        }
    }

    #[test]
    fn slope_is_equivariant(c in tail_curve(), scale in 0.01f64..10.0, rscale in 0.1f64..10.0, power in 0.2f64..3.0) {
        let s = fit_loglog_slope(&c).unwrap().slope;
        let map = |f: &dyn Fn(&TailPoint) -> TailPoint| TailCurve { points: c.points.iter().map(f).collect() };
        let scaled = map(&|p| TailPoint { p_hat: p.p_hat * scale, stderr: p.stderr * scale, ..*p });
        prop_assert!((fit_loglog_slope(&scaled).unwrap().slope - s).abs() < 1e-9);
        let stretched = map(&|p| TailPoint { r: p.r * rscale, ..*p });
        prop_assert!((fit_loglog_slope(&stretched).unwrap().slope - s).abs() < 1e-9);
        // log p -> power log p scales every relative error by the same factor
        let powered = map(&|p| TailPoint { p_hat: p.p_hat.powf(power), stderr: power * p.p_hat.powf(power) * p.stderr / p.p_hat, ..*p });
        prop_assert!((fit_loglog_slope(&powered).unwrap().slope - power * s).abs() < 1e-9);
    }

    #[test]
    fn incomplete_gamma_halves_sum_to_one(a in 0.05f64..30.0, x in 0.0f64..60.0) {
        let (p, q) = (gamma_p(a, x), gamma_q(a, x));
        prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
        prop_assert!((p + q - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hypergeometric_binomial_case(a in -3.0f64..3.0, b in 0.5f64..4.0, x in -0.9f64..0.9) {
        // F(a, b, b, x) = (1 - x)^-a
        let v = hypergeom_2f1(a, b, b, x).unwrap().value;
        prop_assert!((v / (1.0 - x).powf(-a) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn besq_steps_stay_nonnegative(x in 0.0f64..10.0, d in 0.0f64..8.0, dt in 1e-4f64..3.0, seed in 0u64..1000) {
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..20 {
            prop_assert!(besq_step(x, d, dt, &mut rng).unwrap() >= 0.0);
        }
    }

    #[test]
    fn grid_roundtrip(ys in prop::collection::vec(0.01f64..5.0, 2..40), q in 0.0f64..1.0) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64 * 0.5).collect();
        let mut acc = 0.0;
        let cum: Vec<f64> = ys.iter().map(|d| { acc += d; acc }).collect();
        let g = GridFunction::new(xs.clone(), cum).unwrap();
        let x = xs[0] + q * (xs[xs.len() - 1] - xs[0]);
        prop_assert!((g.inverse(g.eval(x).unwrap()).unwrap() - x).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn environment_is_anchored_and_scales_invert(kappa in 0.3f64..4.0, seed in 0u64..10_000, q in 0.05f64..0.95) {
        let env = Environment::sample(kappa, (3.0, 3.0), 0.02, &RngStream::new(seed, 0)).unwrap();
        prop_assert_eq!(env.w(0), Some(0.0));
        let sc = build_scales(&env).unwrap();
        let (lo, hi) = sc.s.domain();
        let x = lo + q * (hi - lo);
        prop_assert!((sc.s.inverse(sc.s.eval(x).unwrap()).unwrap() - x).abs() < 1e-9);
        prop_assert!(sc.sigma.ys().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lazy_extension_matches_eager_draw(seed in 0u64..10_000, far in 1.0f64..30.0) {
        let eager = Environment::sample(1.5, (far, far), 0.05, &RngStream::new(seed, 0)).unwrap();
        let mut lazy = Environment::sample(1.5, (0.0, 0.0), 0.05, &RngStream::new(seed, 0)).unwrap();
        let (lo, hi) = eager.index_range();
        lazy.extend_to(hi).unwrap();
        lazy.extend_to(lo).unwrap();
        for j in [lo, lo / 2, -1, 1, hi / 3, hi] {
            prop_assert_eq!(lazy.w(j), eager.w(j));
        }
    }

    #[test]
    fn hitting_clocks_grow_with_level(kappa in 1.2f64..3.0, seed in 0u64..10_000) {
        let cfg = DiffusionConfig { grid_step: 0.1, ..DiffusionConfig::default() };
        let rows = hitting_samples(&Sequential, seed, family::HITTING, kappa, &[1.0, 2.0, 4.0], 3, cfg).unwrap();
        for row in rows {
            for d in &row {
                prop_assert!(((d.i1 + d.i2) / d.h - 1.0).abs() < 1e-12);
            }
            prop_assert!(row.windows(2).all(|w| w[0].h < w[1].h && w[0].i1 <= w[1].i1));
        }
    }

    #[test]
    fn exceedance_falls_with_threshold(seed in 0u64..10_000, u in 1.0f64..20.0) {
        let cfg = DiffusionConfig { grid_step: 0.1, ..DiffusionConfig::default() };
        let grid = [2.0, 4.0, 8.0];
        let a = tail_h_unchecked(&Sequential, seed, 2.0, u, &grid, 20, cfg).unwrap();
        let b = tail_h_unchecked(&Sequential, seed, 2.0, 1.5 * u, &grid, 20, cfg).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            prop_assert!(q.hits <= p.hits);
        }
    }

    #[test]
    fn sturm_profile_shape(lambda in 0.01f64..2.0, epsilon in 0.02f64..0.5, gamma in 0.2f64..1.8) {
        let s = solve_sturm_liouville(lambda, epsilon, gamma).unwrap();
        prop_assert!(s.phi_prime_at_zero < 0.0);
        prop_assert!((s.eval(0.0).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(s.profile.iter().all(|p| *p >= 0.0));
        prop_assert!(s.profile.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        for k in 1..s.profile_x.len().saturating_sub(1) {
            let (x0, x1, x2) = (s.profile_x[k - 1], s.profile_x[k], s.profile_x[k + 1]);
            let (f0, f1, f2) = (s.profile[k - 1], s.profile[k], s.profile[k + 1]);
            let chord = f0 + (f2 - f0) * (x1 - x0) / (x2 - x0);
            prop_assert!(f1 <= chord + 1e-9);
        }
    }
}
