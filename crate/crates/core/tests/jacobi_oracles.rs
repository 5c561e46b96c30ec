use rde_core::jacobi::{
    hypergeom_laplace, jacobi_marginals, scale_y, simulate_jacobi, t_half_moment_series, t_half_samples, u_clock,
    JacobiSpec, THalfConfig,
};
use rde_core::special::hypergeom_2f1;
use rde_core::stats::{ks_two_sample, MomentEstimate};
use rde_core::{RngStream, Sequential};

const T_HALF_MEAN_K2: f64 = 0.532_191;

#[test]
fn series_partial_sums() {
    let exact = (5.0 + 2.0 * std::f64::consts::LN_2) / 12.0;
    assert!((exact - T_HALF_MEAN_K2).abs() < 1e-6);
    assert!((t_half_moment_series(2.0, 50).unwrap().value - exact).abs() < 1e-9);
    assert_eq!(t_half_moment_series(2.0, 1).unwrap().value, 0.25);
    // partial sums of (n+1)(n+2) / (6 2^n n), halved
    let brute: f64 = 0.5 * (1..=50).map(|n| ((n + 1) * (n + 2)) as f64 / (6.0 * 2f64.powi(n as i32) * n as f64)).sum::<f64>();
    assert!((t_half_moment_series(2.0, 50).unwrap().value - brute).abs() < 1e-14);
}

#[test]
fn laplace_derivative_matches_the_mean() {
    // G(theta) = F(a, b, 1, 1/2) with a + b = 1 + kappa, ab = theta
    let g = |theta: f64| {
        let s: f64 = 3.0;
        let disc = (s * s - 4.0 * theta).sqrt();
        hypergeom_2f1(0.5 * (s - disc), 0.5 * (s + disc), 1.0, 0.5).unwrap().value
    };
    let h = 1e-4;
    let slope = (g(h) - g(-h)) / (2.0 * h);
    assert!((slope - (5.0 + 2.0 * std::f64::consts::LN_2) / 6.0).abs() < 1e-6);
    assert!((1.0 / hypergeom_laplace(2.0, 0.3).unwrap() - g(0.3)).abs() < 1e-12);
    assert_eq!(hypergeom_laplace(2.0, 0.0).unwrap(), 1.0);
}

#[test]
fn scale_function_bounds_near_one() {
    for kappa in [1.5, 2.0, 3.0] {
        for x in [1e-2, 1e-3] {
            let s = scale_y(kappa, 1.0 - x).unwrap();
            let (lo, hi) = (1.0 / (2.0 * kappa * x.powf(kappa)), 2.0 / x.powf(kappa));
            assert!(lo <= s && s <= hi, "kappa={kappa} x={x}: {lo} <= {s} <= {hi}");
        }
    }
}

#[test]
fn stationary_start_keeps_its_mean() {
    let spec = JacobiSpec::new(2.0, 6.0, 0.25, 1e-3).unwrap();
    let v = jacobi_marginals(&Sequential, 1, spec, 5.0, 20_000);
    assert!(MomentEstimate::from_values(&v).relative_error(0.25) < 0.02);
    assert!(v.iter().all(|y| (0.0..=1.0).contains(y)));
}

#[test]
fn symmetric_dimensions_mirror() {
    let spec = JacobiSpec::new(3.0, 3.0, 0.5, 1e-3).unwrap();
    let a = jacobi_marginals(&Sequential, 2, spec, 1.0, 20_000);
    let b: Vec<f64> = jacobi_marginals(&Sequential, 3, spec, 1.0, 20_000).into_iter().map(|y| 1.0 - y).collect();
    let ks = ks_two_sample(&a, &b, 0.02).unwrap();
    assert!(ks.verdict.passed(), "{ks:?}");
}

#[test]
fn u_clock_is_increasing_and_invertible() {
    let spec = JacobiSpec::new(2.0, 6.0, 0.3, 1e-3).unwrap();
    let path = simulate_jacobi(spec, 2.0, &mut RngStream::new(4, 0)).unwrap();
    let u = u_clock(&path, 2.0).unwrap();
    assert!(u.ys().windows(2).all(|w| w[0] < w[1]));
    for t in [0.1, 0.77, 1.5, 1.999] {
        let back = u.inverse(u.eval(t).unwrap()).unwrap();
        assert!((back - t).abs() < 1e-9, "t={t} back={back}");
    }
}

#[test]
fn t_half_mean_forgets_the_start() {
    let n = 100_000;
    let run = |y0: f64| {
        let cfg = THalfConfig { y0_start: y0, ..THalfConfig::default() };
        MomentEstimate::from_values(&t_half_samples(&Sequential, 5, 2.0, n, cfg).unwrap()).mean
    };
    let (a, b) = (run(1e-3), run(1e-4));
    assert!((a / b - 1.0).abs() < 0.005, "{a} vs {b}");
    assert!((a / T_HALF_MEAN_K2 - 1.0).abs() < 0.02);
}
