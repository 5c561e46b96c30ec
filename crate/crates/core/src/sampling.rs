//! Random primitives: Gaussian, exponential, gamma, Poisson, noncentral
//! chi-square, and the completely asymmetric stable and Cauchy laws.
//!
//! Gaussian, exponential, gamma (Marsaglia-Tsang, boosted below shape 1) and
//! Poisson draws come from `rand_distr`.

#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::{FRAC_PI_2, PI};

use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};

use crate::error::{ensure, param, Result};
use crate::rng::RngStream;

#[inline]
pub fn draw_gaussian(rng: &mut RngStream) -> f64 {
    StandardNormal.sample(rng)
}

#[inline]
pub fn draw_exp1(rng: &mut RngStream) -> f64 {
    Exp1.sample(rng)
}

/// Gamma(shape, 1); shape 0 is the point mass at 0.
#[inline]
pub fn draw_gamma(shape: f64, rng: &mut RngStream) -> f64 {
    if shape == 0.0 {
        return 0.0;
    }
    Gamma::new(shape, 1.0).expect("gamma shape must be positive").sample(rng)
}

/// Poisson(mean); mean 0 gives 0.
#[inline]
pub fn draw_poisson(mean: f64, rng: &mut RngStream) -> u64 {
    if mean == 0.0 {
        return 0;
    }
    let k: f64 = Poisson::new(mean).expect("poisson mean must be finite and positive").sample(rng);
    k as u64
}

/// One draw of the noncentral chi-square law with `d` degrees of freedom.
pub fn draw_noncentral_chisq(d: f64, noncentrality: f64, rng: &mut RngStream) -> Result<f64> {
    ensure(d >= 0.0 && d.is_finite(), "d", "must be finite and >= 0")?;
    ensure(noncentrality >= 0.0 && noncentrality.is_finite(), "noncentrality", "must be finite and >= 0")?;
    Ok(noncentral_chisq_parts(d, noncentrality, rng).1)
}

/// Poisson-mixed gamma representation: returns the mixing index `K` and the
/// draw `2 Gamma(d/2 + K)` with `K ~ Poisson(noncentrality / 2)`.
///
/// No validation; callers guarantee `d >= 0` and `noncentrality >= 0`.
#[inline]
pub fn noncentral_chisq_parts(d: f64, noncentrality: f64, rng: &mut RngStream) -> (u64, f64) {
    let k = draw_poisson(0.5 * noncentrality, rng);
    let shape = 0.5 * d + k as f64;
    (k, 2.0 * draw_gamma(shape, rng))
}

/// Completely asymmetric stable law of index `p`, with characteristic function
/// `exp(-|t|^p (1 - i sgn(t) tan(pi p / 2)))` for `p < 1` and
/// `exp(-|t| - i t (2/pi) log|t|)` for `p = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableLawSpec {
    index_p: f64,
}

impl StableLawSpec {
    pub fn new(index_p: f64) -> Result<Self> {
        ensure(index_p > 0.0 && index_p <= 1.0, "index_p", "must lie in (0, 1]")?;
        Ok(StableLawSpec { index_p })
    }

    pub fn index_p(&self) -> f64 {
        self.index_p
    }

    /// Characteristic function at `t` as `(re, im)`.
    pub fn characteristic_function(&self, t: f64) -> (f64, f64) {
        let p = self.index_p;
        if t == 0.0 {
            return (1.0, 0.0);
        }
        let (modulus_log, phase) = if p == 1.0 {
            (-t.abs(), -t * (2.0 / PI) * t.abs().ln())
        } else {
            let a = t.abs().powf(p);
            (-a, a * t.signum() * (FRAC_PI_2 * p).tan())
        };
        let m = modulus_log.exp();
        (m * phase.cos(), m * phase.sin())
    }
}

/// Draw from the stable law of index `p < 1` (use [`draw_cauchy_asym`] for `p = 1`).
///
/// Chambers-Mallows-Stuck with skewness `beta = 1`, scale 1 and shift 0 in the
/// parametrization whose characteristic function is
/// `exp(-|t|^a (1 - i beta sgn(t) tan(pi a / 2)))`. That is the target law
/// once `a = p`. With `beta = 1` the method's constants reduce to
/// `a B = pi a / 2` and `S = cos(pi a / 2)^(-1/a)`, and
/// `X = S sin(a V + pi a / 2) / cos(V)^(1/a) * (cos((1 - a) V - pi a / 2) / E)^((1 - a)/a)`
/// with `V` uniform on `(-pi/2, pi/2)` and `E` standard exponential. All
/// factors are positive, so the draws live on the positive half-line.
pub fn draw_stable(spec: StableLawSpec, rng: &mut RngStream) -> Result<f64> {
    let a = spec.index_p;
    if a >= 1.0 {
        return Err(param("index_p", "draw_stable needs index_p < 1; use draw_cauchy_asym"));
    }
    Ok(stable_unchecked(a, rng))
}

#[inline]
fn stable_unchecked(a: f64, rng: &mut RngStream) -> f64 {
    let v = PI * (rng.uniform() - 0.5);
    let e = draw_exp1(rng);
    let half = FRAC_PI_2 * a;
    let log_s = -half.cos().ln() / a;
    let ln_x = log_s + (a * v + half).sin().ln() - v.cos().ln() / a
        + (1.0 - a) / a * ((((1.0 - a) * v) - half).cos().ln() - e.ln());
    ln_x.exp()
}

/// Draw from the completely asymmetric Cauchy law with characteristic
/// function `exp(-|t| - i t (2/pi) log|t|)`.
///
/// Chambers-Mallows-Stuck at index 1 and `beta = 1`:
/// `X = (2/pi) ((pi/2 + V) tan V - log((pi/2) E cos V / (pi/2 + V)))`.
pub fn draw_cauchy_asym(rng: &mut RngStream) -> f64 {
    let v = PI * (rng.uniform() - 0.5);
    let e = draw_exp1(rng);
    let w = FRAC_PI_2 + v;
    (2.0 / PI) * (w * v.tan() - (FRAC_PI_2 * e * v.cos() / w).ln())
}

/// The constant `psi(p) = (pi p / (4 Gamma(p)^2 sin(pi p / 2)))^(1/p)`.
pub fn stable_psi(p: f64) -> f64 {
    let g = libm::tgamma(p);
    (PI * p / (4.0 * g * g * (FRAC_PI_2 * p).sin())).powf(1.0 / p)
}

/// Scale `2 p^(2 - 2/p) psi(p)` relating the weighted local-time integral at
/// unit local time to the stable law of index `p`.
pub fn biane_yor_scale(p: f64) -> f64 {
    2.0 * p.powf(2.0 - 2.0 / p) * stable_psi(p)
}
