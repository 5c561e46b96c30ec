use rde_core::besq::{
    besq0_sup_exceeds, besq_step, dufresne_cdf, dufresne_density, lamperti_transform, perpetuity_samples,
    perpetuity_scale, s_infinity_samples, AbsorptionConfig, PerpetuityConfig, SupConfig,
};
use rde_core::jacobi::additivity_check;
use rde_core::path::ProcessPath;
use rde_core::quad::integrate;
use rde_core::sampling::draw_gaussian;
use rde_core::stats::{ks_two_sample, MomentEstimate};
use rde_core::{RngStream, Sequential};

#[test]
fn dimension_zero_is_a_martingale() {
    let mut rng = RngStream::new(1, 0);
    let v: Vec<f64> = (0..1_000_000).map(|_| besq_step(1.0, 0.0, 0.5, &mut rng).unwrap()).collect();
    assert!(MomentEstimate::from_values(&v).relative_error(1.0) < 0.01);
}

#[test]
fn mean_grows_linearly_in_time() {
    let mut rng = RngStream::new(2, 0);
    let v: Vec<f64> = (0..1_000_000).map(|_| besq_step(4.0, 2.0, 1.0, &mut rng).unwrap()).collect();
    assert!(MomentEstimate::from_values(&v).relative_error(6.0) < 0.01);
    for (x, d, t) in [(0.0, 1.0, 0.3), (0.5, 0.5, 2.0), (2.0, 3.0, 0.1), (10.0, 0.0, 5.0)] {
        let v: Vec<f64> = (0..100_000).map(|_| besq_step(x, d, t, &mut rng).unwrap()).collect();
        let z = MomentEstimate::from_values(&v).z_score(x + d * t);
        assert!(z.abs() < 4.0, "x={x} d={d} t={t} z={z}");
    }
}

#[test]
fn additivity_with_a_zero_start() {
    let ks = additivity_check(&Sequential, 3, (2.0, 0.0), (6.0, 4.0), 1.0, 100_000, 0.02).unwrap();
    assert!(ks.verdict.passed(), "{ks:?}");
}

#[test]
fn dufresne_mean_at_kappa_three() {
    let s = s_infinity_samples(&Sequential, 4, 3.0, 50_000, AbsorptionConfig::default()).unwrap();
    assert!(MomentEstimate::from_values(&s).relative_error(1.0) < 0.02);
}

#[test]
fn dufresne_cdf_integrates_the_density() {
    for kappa in [0.5, 2.0, 3.5] {
        for x in [0.3, 1.0, 4.0] {
            let q = integrate(|y| dufresne_density(y, kappa).unwrap(), 1e-9, x, 1e-12).unwrap();
            assert!((q - dufresne_cdf(x, kappa)).abs() < 1e-8, "kappa={kappa} x={x}");
        }
    }
    // 4 e^-2 at (x = 1, kappa = 2)
    assert!((dufresne_density(1.0, 2.0).unwrap() - 4.0 * (-2.0f64).exp()).abs() < 1e-12);
}

#[test]
fn perpetuity_mean_and_moment_stability() {
    let (d, b) = (6.0, 4.0);
    assert_eq!(perpetuity_scale(b), 1.0 / 16.0);
    let v = perpetuity_samples(&Sequential, 5, d, b, 20_000, PerpetuityConfig::default()).unwrap();
    // scale times the Dufresne mean 2 / (k - 1) at k = 2
    assert!(MomentEstimate::from_values(&v).relative_error(0.125) < 0.03);
    let moment = |xs: &[f64], q: f64| xs.iter().map(|x| x.powf(q)).sum::<f64>() / xs.len() as f64;
    let (half, all) = (&v[..10_000], &v[..]);
    // below the index 2 the moment settles
    assert!((moment(half, 0.5) / moment(all, 0.5) - 1.0).abs() < 0.05);
    // above it a handful of draws carry the sum
    let p3: Vec<f64> = all.iter().map(|x| x.powi(3)).collect();
    let top = p3.iter().cloned().fold(0.0, f64::max);
    assert!(top / p3.iter().sum::<f64>() > 0.1);
}

#[test]
fn sup_law_at_four() {
    let mut rng = RngStream::new(6, 0);
    let cfg = SupConfig::default();
    let v: Vec<f64> = (0..100_000).map(|_| besq0_sup_exceeds(4.0, cfg, &mut rng).unwrap()).collect();
    assert!(MomentEstimate::from_values(&v).relative_error(0.25) < 0.05);
}

fn lamperti_at_clock(zeta: f64, u: f64, dt: f64, rng: &mut RngStream) -> f64 {
    let mut b = vec![0.0];
    loop {
        for _ in 0..(1.0 / dt) as usize {
            let last = *b.last().unwrap();
            b.push(last + dt.sqrt() * draw_gaussian(rng));
        }
        let path = ProcessPath::new(0.0, dt, b.clone());
        let r = lamperti_transform(&path, zeta).unwrap();
        if let Some(v) = r.value_at(u) {
            return v;
        }
    }
}

#[test]
fn lamperti_marginal_matches_exact_bessel_six() {
    let n = 100_000;
    let mut rng = RngStream::new(7, 0);
    let a: Vec<f64> = (0..n).map(|_| lamperti_at_clock(2.0, 0.5, 1e-4, &mut rng)).collect();
    let mut rng = RngStream::new(7, 1);
    let b: Vec<f64> = (0..n).map(|_| besq_step(4.0, 6.0, 0.5, &mut rng).unwrap().sqrt()).collect();
    let ks = ks_two_sample(&a, &b, 0.02).unwrap();
    assert!(ks.verdict.passed(), "{ks:?}");
}
