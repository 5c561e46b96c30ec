use rde_core::field::FieldGrid;
use rde_core::localtime::{
    affine_cauchy_samples, biane_yor_functional_samples, cauchy_centering, cauchy_functional_samples, cauchy_grid,
    first_passage_time, getoor_sharpe_check, printed_cauchy_centering, GetoorSharpeEstimator,
};
use rde_core::sampling::{biane_yor_scale, stable_psi};
use rde_core::special::{normal_cdf, EULER_GAMMA};
use rde_core::stats::{ks_two_sample, MomentEstimate};
use rde_core::{RngStream, Sequential};

#[test]
fn biane_yor_constants_at_one_half() {
    assert!((stable_psi(0.5) - 1.0 / 32.0).abs() < 1e-15);
    // 2 p^(2 - 2/p) psi(p) = 2 * 4 / 32
    assert!((biane_yor_scale(0.5) - 0.25).abs() < 1e-15);
}

#[test]
fn cauchy_centering_constants() {
    let pi4 = (std::f64::consts::PI / 4.0).ln();
    assert!((printed_cauchy_centering() - (2.0 * EULER_GAMMA + pi4)).abs() < 1e-15);
    assert!((cauchy_centering() - (pi4 - 2.0 * EULER_GAMMA)).abs() < 1e-15);
    assert!((EULER_GAMMA - 0.577216).abs() < 1e-6);
}

#[test]
fn getoor_sharpe_closed_form_is_e() {
    let r = getoor_sharpe_check(&Sequential, 1, 0.5, 0.5, 20_000, GetoorSharpeEstimator::Conditional).unwrap();
    assert!((r.closed_form - std::f64::consts::E).abs() < 1e-12);
    assert!(r.rel_error < 0.02, "{r:?}");
    assert!(getoor_sharpe_check(&Sequential, 1, 1.0, 0.5, 10, GetoorSharpeEstimator::Conditional).is_err());
}

#[test]
fn first_passage_survival_follows_reflection() {
    // P(sigma(1) > t) = P(|N(0, t)| < 1)
    let exact = |t: f64| 2.0 * normal_cdf(1.0 / t.sqrt()) - 1.0;
    let n = 20_000;
    let mut rng = RngStream::new(2, 0);
    let times: Vec<Option<f64>> = (0..n).map(|_| first_passage_time(1.0, 1e-3, 16.0, &mut rng)).collect();
    let surv = |t: f64| times.iter().filter(|s| s.map_or(true, |s| s > t)).count() as f64 / n as f64;
    for t in [4.0, 16.0] {
        let p = exact(t);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((surv(t) - p).abs() < 4.0 * se, "t={t}: {} vs {p}", surv(t));
    }
    assert!((surv(4.0) / surv(16.0) / 2.0 - 1.0).abs() < 0.1);
}

#[test]
fn biane_yor_functional_scales_with_local_time() {
    let n = 20_000;
    let grid = FieldGrid::default();
    let a = biane_yor_functional_samples(&Sequential, 3, 0.5, 2.0, n, grid).unwrap();
    let b: Vec<f64> =
        biane_yor_functional_samples(&Sequential, 4, 0.5, 1.0, n, grid).unwrap().into_iter().map(|x| 4.0 * x).collect();
    let ks = ks_two_sample(&a, &b, 0.02).unwrap();
    assert!(ks.verdict.passed(), "{ks:?}");
    assert!(MomentEstimate::from_values(&a).mean > 0.0);
}

#[test]
fn only_the_corrected_centering_matches_the_functional() {
    let n = 4_000;
    let f = cauchy_functional_samples(&Sequential, 6, n, cauchy_grid());
    let c = affine_cauchy_samples(&Sequential, 6, n);
    let ks = ks_two_sample(&f, &c, 0.05).unwrap();
    assert!(ks.verdict.passed(), "{ks:?}");
    let shift = printed_cauchy_centering() - cauchy_centering();
    let printed: Vec<f64> = c.iter().map(|x| x + shift).collect();
    assert!(ks_two_sample(&f, &printed, 0.05).unwrap().statistic > 0.2);
}
