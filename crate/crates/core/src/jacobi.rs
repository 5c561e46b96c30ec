//! Jacobi diffusions, the Warren-Yor ratio, the functionals `Upsilon` and
//! `Lambda`, and the hitting time of 1/2 from the entrance boundary.
//!
//! `Jacobi(d1, d2)` solves `dY = 2 sqrt(Y (1 - Y)) dB + (d1 - (d1 + d2) Y) dt`.
//! The integrator works with the angle `theta` where `Y = sin^2 theta`; Ito's
//! formula gives
//!
//! ```text
//! d theta = dB + ((d1 - 1)/2 cot theta - (d2 - 1)/2 tan theta) dt
//! ```
//!
//! so the noise is additive, both boundaries look like Bessel processes of
//! dimensions `d1` and `d2`, and the Brownian-bridge correction for level
//! crossings applies as is. Each step moves the Bessel part of the motion,
//! relative to the nearer boundary, exactly; only the smooth remainder of the
//! drift is stepped by Euler. Steps shrink like the squared distance to 1.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};


use crate::besq::besq_step_unchecked;
use crate::error::{domain, ensure, Error, Result};
use crate::grid::GridFunction;
use crate::path::ProcessPath;
use crate::quad::integrate;
use crate::replicate::Replicator;
use crate::rng::RngStream;
use crate::sampling::draw_gaussian;
use crate::special::{hypergeom_2f1, ln_gamma, SeriesValue};
use crate::stats::{ks_two_sample, KsResult, MomentEstimate, TailCurve, TailPoint};

pub mod family {
    pub const JACOBI: u32 = 0x20;
    pub const WARREN_YOR_RATIO: u32 = 0x21;
    pub const WARREN_YOR_JACOBI: u32 = 0x22;
    pub const ADDITIVITY_SUM: u32 = 0x23;
    pub const ADDITIVITY_DIRECT: u32 = 0x24;
    pub const LAMBDA: u32 = 0x25;
    pub const UPSILON_TAIL: u32 = 0x26;
    pub const T_HALF: u32 = 0x27;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiSpec {
    pub d1: f64,
    pub d2: f64,
    pub y0: f64,
    /// Output spacing and largest integration step.
    pub dt: f64,
}

impl JacobiSpec {
    pub fn new(d1: f64, d2: f64, y0: f64, dt: f64) -> Result<Self> {
        ensure(d1 > 0.0 && d1.is_finite(), "d1", "must be finite and > 0")?;
        ensure(d2 > 0.0 && d2.is_finite(), "d2", "must be finite and > 0")?;
        ensure((0.0..=1.0).contains(&y0), "y0", "must lie in [0, 1]")?;
        ensure(dt > 0.0 && dt.is_finite(), "dt", "must be finite and > 0")?;
        Ok(JacobiSpec { d1, d2, y0, dt })
    }
}

/// Step control of the angle integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiScheme {
    /// Largest step.
    pub dt_max: f64,
    /// Steps are at most `boundary_frac * dist^2`, `dist` being the angular
    /// distance to the boundary 1, where `Y / (1 - Y)^2` and the clock `U`
    /// blow up. Near 0 the exact Bessel step needs no refinement.
    pub boundary_frac: f64,
    /// Smallest step, relative to `dt_max`.
    pub min_frac: f64,
}

impl Default for JacobiScheme {
    fn default() -> Self {
        JacobiScheme { dt_max: 1e-3, boundary_frac: 0.1, min_frac: 1e-6 }
    }
}

impl JacobiScheme {
    pub fn with_dt(dt_max: f64) -> Self {
        JacobiScheme { dt_max, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug)]
struct Angle {
    a: f64,
    b: f64,
    scheme: JacobiScheme,
}

impl Angle {
    fn new(d1: f64, d2: f64, scheme: JacobiScheme) -> Self {
        Angle { a: 0.5 * (d1 - 1.0), b: 0.5 * (d2 - 1.0), scheme }
    }

    #[inline]
    fn step_size(&self, th: f64) -> f64 {
        let dist = FRAC_PI_2 - th;
        (self.scheme.boundary_frac * dist * dist)
            .min(self.scheme.dt_max)
            .max(self.scheme.dt_max * self.scheme.min_frac)
    }

    /// One step of length `h`.
    ///
    /// In the bulk this is an Euler step. Within `BOUNDARY_ZONE` of a boundary
    /// the distance to it is a Bessel process of dimension `d1` (or `d2`) plus a
    /// smooth drift; the Bessel part is stepped exactly through its squared
    /// transition, so the step cannot overshoot the boundary.
    #[inline]
    fn advance(&self, th: f64, h: f64, rng: &mut RngStream) -> f64 {
        let (s, c) = th.sin_cos();
        if th < BOUNDARY_ZONE {
            let rest = self.a * (c / s - 1.0 / th) - self.b * s / c;
            let x = besq_step_unchecked(th * th, 2.0 * self.a + 1.0, h, rng);
            return fold(x.sqrt() + rest * h);
        }
        let phi = FRAC_PI_2 - th;
        if phi <= BOUNDARY_ZONE {
            // phi = pi/2 - theta has drift b cot(phi) - a tan(phi)
            let rest = self.b * (s / c - 1.0 / phi) - self.a * c / s;
            let x = besq_step_unchecked(phi * phi, 2.0 * self.b + 1.0, h, rng);
            return fold(FRAC_PI_2 - (x.sqrt() + rest * h));
        }
        let drift = self.a * c / s - self.b * s / c;
        fold(th + drift * h + h.sqrt() * draw_gaussian(rng))
    }
}

const BOUNDARY_ZONE: f64 = FRAC_PI_4;

/// Reflects into `(0, pi/2)`.
#[inline]
fn fold(mut x: f64) -> f64 {
    for _ in 0..2 {
        if x < 0.0 {
            x = -x;
        }
        if x > FRAC_PI_2 {
            x = core::f64::consts::PI - x;
        }
    }
    x.clamp(1e-300, FRAC_PI_2 * (1.0 - 1e-16))
}

#[inline]
fn angle_of(y: f64) -> f64 {
    y.clamp(0.0, 1.0).sqrt().asin().clamp(1e-300, FRAC_PI_2 * (1.0 - 1e-16))
}

/// `Y = sin^2 theta`.
#[inline]
fn y_of(th: f64) -> f64 {
    let s = th.sin();
    s * s
}

/// Jacobi path on the grid `k spec.dt` up to `horizon`.
///
/// Between grid times the integrator takes as many substeps as the boundary
/// control asks for. Values lie in `[0, 1]` by construction.
pub fn simulate_jacobi(spec: JacobiSpec, horizon: f64, rng: &mut RngStream) -> Result<ProcessPath> {
    ensure(horizon >= 0.0 && horizon.is_finite(), "horizon", "must be finite and >= 0")?;
    let ang = Angle::new(spec.d1, spec.d2, JacobiScheme::with_dt(spec.dt));
    let steps = (horizon / spec.dt + 1e-9).floor() as usize;
    let mut values = Vec::with_capacity(steps + 1);
    let mut th = angle_of(spec.y0);
    values.push(spec.y0);
    for _ in 0..steps {
        let mut left = spec.dt;
        while left > 0.0 {
            let h = ang.step_size(th).min(left);
            th = ang.advance(th, h, rng);
            left -= h;
            if left < 1e-15 * spec.dt {
                left = 0.0;
            }
        }
        values.push(y_of(th));
    }
    Ok(ProcessPath::new(0.0, spec.dt, values))
}

/// Marginal draws of `Y(t)` started at `y0`.
pub fn jacobi_marginals<R: Replicator>(
    rep: &R,
    seed: u64,
    spec: JacobiSpec,
    t: f64,
    n: usize,
) -> Vec<f64> {
    let ang = Angle::new(spec.d1, spec.d2, JacobiScheme::with_dt(spec.dt));
    rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::JACOBI, i as u64);
        let mut th = angle_of(spec.y0);
        let mut s = 0.0;
        while s < t {
            let h = ang.step_size(th).min(t - s);
            th = ang.advance(th, h, &mut rng);
            s += h;
        }
        y_of(th)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonResult {
    pub r: f64,
    pub value: f64,
    /// `Lambda` value attached to `r`, when the caller has one.
    pub clock: Option<f64>,
    /// The path came within `1e-12` of 1 and the integrand was capped there.
    pub saturated: bool,
}

const SATURATION: f64 = 1e-12;

#[inline]
fn upsilon_integrand(y: f64) -> (f64, bool) {
    let q = 1.0 - y;
    if q < SATURATION {
        (1.0 / (SATURATION * SATURATION), true)
    } else {
        (y / (q * q), false)
    }
}

/// `Upsilon(r) = int_0^r Y / (1 - Y)^2 ds` by the trapezoid rule on the path.
pub fn upsilon_of(path: &ProcessPath, r: f64) -> Result<UpsilonResult> {
    ensure(r >= 0.0, "r", "must be >= 0")?;
    ensure(path.t0 == 0.0 && !path.is_empty(), "path", "must start at time 0")?;
    if r > path.end_time() + 1e-9 * path.dt {
        return Err(Error::Horizon(alloc::format!(
            "path ends at {} before r = {}",
            path.end_time(),
            r
        )));
    }
    let mut acc = 0.0;
    let mut saturated = false;
    let full = ((r / path.dt) + 1e-9).floor() as usize;
    let full = full.min(path.len() - 1);
    let (mut f0, s0) = upsilon_integrand(path.values[0]);
    saturated |= s0;
    for k in 1..=full {
        let (f1, s1) = upsilon_integrand(path.values[k]);
        saturated |= s1;
        acc += 0.5 * (f0 + f1) * path.dt;
        f0 = f1;
    }
    let rest = r - full as f64 * path.dt;
    if rest > 1e-12 * path.dt && full + 1 < path.len() {
        let y = path.value_at(r).unwrap_or(path.values[full]);
        let (f1, s1) = upsilon_integrand(y);
        saturated |= s1;
        acc += 0.5 * (f0 + f1) * rest;
    }
    Ok(UpsilonResult { r, value: acc, clock: None, saturated })
}

/// `Lambda(r) = int_0^r du / (R1^2 + R2^2)` from paths of the squared
/// processes on a common grid.
pub fn lambda_clock(r1_sq: &ProcessPath, r2_sq: &ProcessPath, r: f64) -> Result<f64> {
    ensure(r >= 0.0, "r", "must be >= 0")?;
    ensure(
        r1_sq.t0 == r2_sq.t0 && r1_sq.dt == r2_sq.dt,
        "paths",
        "must share the time grid",
    )?;
    let n = r1_sq.len().min(r2_sq.len());
    let end = r1_sq.t0 + (n.saturating_sub(1)) as f64 * r1_sq.dt;
    if r > end + 1e-9 * r1_sq.dt {
        return Err(Error::Horizon(alloc::format!("paths end at {end} before r = {r}")));
    }
    let g = |k: usize| 1.0 / (r1_sq.values[k] + r2_sq.values[k]);
    let full = ((r / r1_sq.dt) + 1e-9).floor() as usize;
    let full = full.min(n - 1);
    let mut acc = 0.0;
    for k in 1..=full {
        acc += 0.5 * (g(k - 1) + g(k)) * r1_sq.dt;
    }
    let rest = r - full as f64 * r1_sq.dt;
    if rest > 1e-12 * r1_sq.dt && full + 1 < n {
        let f = rest / r1_sq.dt;
        let s1 = r1_sq.values[full] + f * (r1_sq.values[full + 1] - r1_sq.values[full]);
        let s2 = r2_sq.values[full] + f * (r2_sq.values[full + 1] - r2_sq.values[full]);
        acc += 0.5 * (g(full) + 1.0 / (s1 + s2)) * rest;
    }
    Ok(acc)
}

/// One draw of `Lambda(r) / log r` with `R1^2 + R2^2 = BESQ(4 + 2 kappa)` from 4.
///
/// The squared process is sampled exactly on a time grid with steps
/// `rel_step * max(t, 1)`, and the clock by the trapezoid rule.
pub fn lambda_ratio_sample(kappa: f64, r: f64, rel_step: f64, rng: &mut RngStream) -> Result<f64> {
    ensure(kappa > 0.0, "kappa", "must be > 0")?;
    ensure(r > 1.0, "r", "must be > 1")?;
    ensure(rel_step > 0.0 && rel_step < 1.0, "rel_step", "must lie in (0, 1)")?;
    let d = 4.0 + 2.0 * kappa;
    let mut t = 0.0;
    let mut x = 4.0;
    let mut acc = 0.0;
    while t < r {
        let h = (rel_step * t.max(1.0)).min(r - t);
        let next = besq_step_unchecked(x, d, h, rng);
        acc += 0.5 * (1.0 / x + 1.0 / next) * h;
        x = next;
        t += h;
    }
    Ok(acc / r.ln())
}

/// The limit of `Lambda(r) / log r`, `1 / (2 + 2 kappa)`.
pub fn lambda_limit(kappa: f64) -> f64 {
    1.0 / (2.0 + 2.0 * kappa)
}

/// Draws of the Warren-Yor ratio `R1^2 / (R1^2 + R2^2)` at the time the clock
/// `int_0^t ds / (R1^2 + R2^2)` reaches `s_star`, with `R1^2 = BESQ(2)` from 0
/// and `R2^2 = BESQ(2 + 2 kappa)` from 4.
pub fn warren_yor_ratio_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    s_star: f64,
    dt: f64,
    n: usize,
) -> Result<Vec<f64>> {
    ensure(kappa > 0.0, "kappa", "must be > 0")?;
    ensure(s_star > 0.0, "s_star", "must be > 0")?;
    ensure(dt > 0.0, "dt", "must be > 0")?;
    let d2 = 2.0 + 2.0 * kappa;
    // the clock grows at least like log(1 + t d / 4) / d in expectation; a
    // wide margin over that gives the horizon
    let horizon = 1e3f64.max(100.0 * (s_star * (4.0 + d2)).exp());
    let out = rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::WARREN_YOR_RATIO, i as u64);
        let (mut a, mut b) = (0.0f64, 4.0f64);
        let mut clock = 0.0;
        let mut t = 0.0;
        loop {
            let a1 = besq_step_unchecked(a, 2.0, dt, &mut rng);
            let b1 = besq_step_unchecked(b, d2, dt, &mut rng);
            let inc = 0.5 * (1.0 / (a + b) + 1.0 / (a1 + b1)) * dt;
            if clock + inc >= s_star {
                let f = (s_star - clock) / inc;
                let r0 = a / (a + b);
                let r1 = a1 / (a1 + b1);
                return Ok(r0 + f * (r1 - r0));
            }
            clock += inc;
            a = a1;
            b = b1;
            t += dt;
            if t > horizon {
                return Err(Error::Horizon(alloc::format!(
                    "Warren-Yor clock stayed below {s_star} up to t = {horizon}"
                )));
            }
        }
    });
    out.into_iter().collect()
}

/// Compares the Warren-Yor ratio with `Y(s_star)` for `Y = Jacobi(2, 2 + 2 kappa)`
/// started at `y0_start`, a stand-in for the entrance boundary 0.
pub fn warren_yor_check<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    s_star: f64,
    n: usize,
    besq_dt: f64,
    jacobi: JacobiSpec,
    threshold: f64,
) -> Result<KsResult> {
    ensure(
        jacobi.d1 == 2.0 && (jacobi.d2 - (2.0 + 2.0 * kappa)).abs() < 1e-12,
        "jacobi",
        "dimensions must be (2, 2 + 2 kappa)",
    )?;
    let a = warren_yor_ratio_samples(rep, seed, kappa, s_star, besq_dt, n)?;
    let b: Vec<f64> = {
        let ang = Angle::new(jacobi.d1, jacobi.d2, JacobiScheme::with_dt(jacobi.dt));
        rep.map(n, |i| {
            let mut rng = RngStream::replica(seed, family::WARREN_YOR_JACOBI, i as u64);
            let mut th = angle_of(jacobi.y0);
            let mut s = 0.0;
            while s < s_star {
                let h = ang.step_size(th).min(s_star - s);
                th = ang.advance(th, h, &mut rng);
                s += h;
            }
            y_of(th)
        })
    };
    ks_two_sample(&a, &b, threshold)
}

/// Additivity of squared Bessel marginals: `BESQ(d1, x1)(t) + BESQ(d2, x2)(t)`
/// against `BESQ(d1 + d2, x1 + x2)(t)`.
pub fn additivity_check<R: Replicator>(
    rep: &R,
    seed: u64,
    (d1, x1): (f64, f64),
    (d2, x2): (f64, f64),
    t: f64,
    n: usize,
    threshold: f64,
) -> Result<KsResult> {
    ensure(d1 >= 0.0 && d2 >= 0.0, "d", "dimensions must be >= 0")?;
    ensure(x1 >= 0.0 && x2 >= 0.0, "x", "starts must be >= 0")?;
    ensure(t > 0.0, "t", "must be > 0")?;
    let a = rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::ADDITIVITY_SUM, i as u64);
        besq_step_unchecked(x1, d1, t, &mut rng) + besq_step_unchecked(x2, d2, t, &mut rng)
    });
    let b = rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::ADDITIVITY_DIRECT, i as u64);
        besq_step_unchecked(x1 + x2, d1 + d2, t, &mut rng)
    });
    ks_two_sample(&a, &b, threshold)
}

/// Settings of the `Upsilon` tail experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpsilonTailConfig {
    pub y0_start: f64,
    pub scheme: JacobiScheme,
}

impl Default for UpsilonTailConfig {
    fn default() -> Self {
        UpsilonTailConfig { y0_start: 1e-3, scheme: JacobiScheme::with_dt(5e-3) }
    }
}

/// Smallest `u` for which `{Upsilon(r) > u r}` is a large deviation:
/// the stationary mean `(1 + kappa) / (kappa (kappa - 1))` of `Y / (1 - Y)^2`.
pub fn upsilon_speed(kappa: f64) -> f64 {
    (1.0 + kappa) / (kappa * (kappa - 1.0))
}

/// Runs one `Jacobi(2, 2 + 2 kappa)` path up to the last `r` and records, for
/// every `r` of the grid, whether `Upsilon(r) > u r`. Also returns the final
/// `Upsilon`.
pub fn upsilon_exceedances(
    kappa: f64,
    u: f64,
    r_grid: &[f64],
    cfg: UpsilonTailConfig,
    rng: &mut RngStream,
    hits: &mut [bool],
) -> f64 {
    let ang = Angle::new(2.0, 2.0 + 2.0 * kappa, cfg.scheme);
    let mut th = angle_of(cfg.y0_start);
    let integrand = |th: f64| {
        let (s, c) = th.sin_cos();
        let c2 = c * c;
        s * s / (c2 * c2)
    };
    let mut f0 = integrand(th);
    let mut ups = 0.0;
    let mut t = 0.0;
    for (k, &r) in r_grid.iter().enumerate() {
        while t < r {
            let h = ang.step_size(th).min(r - t);
            th = ang.advance(th, h, rng);
            let f1 = integrand(th);
            ups += 0.5 * (f0 + f1) * h;
            f0 = f1;
            t += h;
        }
        hits[k] = ups > u * r;
    }
    ups
}

/// Exceedance curve `r -> P(Upsilon(r) > u r)` for `Y = Jacobi(2, 2 + 2 kappa)`
/// from near 0; one path per replica serves every `r`.
pub fn tail_upsilon<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    u: f64,
    r_grid: &[f64],
    n: usize,
    cfg: UpsilonTailConfig,
) -> Result<TailCurve> {
    ensure(kappa > 1.0, "kappa", "must be > 1")?;
    ensure(u > upsilon_speed(kappa), "u", "must exceed (1 + kappa) / (kappa (kappa - 1))")?;
    ensure(!r_grid.is_empty(), "r_grid", "must not be empty")?;
    ensure(
        r_grid[0] > 0.0 && r_grid.windows(2).all(|w| w[0] < w[1]),
        "r_grid",
        "must be positive and strictly increasing",
    )?;
    ensure(n >= 1, "n", "must be >= 1")?;
    let rows = rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::UPSILON_TAIL, i as u64);
        let mut hits = alloc::vec![false; r_grid.len()];
        upsilon_exceedances(kappa, u, r_grid, cfg, &mut rng, &mut hits);
        hits
    });
    let points = r_grid
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let h = rows.iter().filter(|row| row[k]).count() as u64;
            TailPoint::from_counts(r, n as u64, h)
        })
        .collect();
    Ok(TailCurve { points })
}

/// Settings of the `T_{1/2}` sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct THalfConfig {
    pub y0_start: f64,
    pub scheme: JacobiScheme,
    pub horizon: f64,
}

impl Default for THalfConfig {
    fn default() -> Self {
        THalfConfig {
            y0_start: 1e-3,
            scheme: JacobiScheme { dt_max: 1e-3, boundary_frac: 0.5, min_frac: 1e-6 },
            horizon: 1e3,
        }
    }
}

/// First time `Jacobi(2, 2 + 2 kappa)` from `y0_start` reaches 1/2.
///
/// A crossing inside a step is detected with the Brownian-bridge probability
/// for the angle, whose noise is additive; the time is then the end of the step.
pub fn sample_t_half(kappa: f64, cfg: THalfConfig, rng: &mut RngStream) -> Result<f64> {
    ensure(kappa > 0.0, "kappa", "must be > 0")?;
    ensure(
        cfg.y0_start > 0.0 && cfg.y0_start < 0.5,
        "y0_start",
        "must lie in (0, 1/2)",
    )?;
    let ang = Angle::new(2.0, 2.0 + 2.0 * kappa, cfg.scheme);
    let mut th = angle_of(cfg.y0_start);
    let mut t = 0.0;
    let level = FRAC_PI_4;
    while t < cfg.horizon {
        let h = ang.step_size(th);
        let next = ang.advance(th, h, rng);
        if next >= level {
            return Ok(t + h * (level - th) / (next - th));
        }
        let p = (-2.0 * (level - th) * (level - next) / h).exp();
        t += h;
        if p > 1e-12 && rng.uniform() < p {
            return Ok(t);
        }
        th = next;
    }
    Err(Error::Horizon(alloc::format!("no crossing of 1/2 before t = {}", cfg.horizon)))
}

pub fn t_half_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    n: usize,
    cfg: THalfConfig,
) -> Result<Vec<f64>> {
    rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::T_HALF, i as u64);
        sample_t_half(kappa, cfg, &mut rng)
    })
    .into_iter()
    .collect()
}

/// `E_0 T_{1/2}` from `2 E_0 T = sum_{n >= 1} Gamma(1+n+kappa) / Gamma(2+kappa) / (2^n n n!)`.
///
/// The value and remainder bound are for `E_0 T` itself (the halved sum).
pub fn t_half_moment_series(kappa: f64, n_terms: usize) -> Result<SeriesValue> {
    ensure(kappa > 1.0, "kappa", "must be > 1")?;
    ensure(n_terms >= 1, "n_terms", "must be >= 1")?;
    let term = |n: usize| {
        let nf = n as f64;
        (ln_gamma(1.0 + nf + kappa) - ln_gamma(2.0 + kappa) - nf * core::f64::consts::LN_2 - nf.ln()
            - ln_gamma(nf + 1.0))
        .exp()
    };
    let mut sum = 0.0;
    for n in 1..=n_terms {
        sum += term(n);
    }
    // t_{n+1} / t_n = n (n + 1 + kappa) / (2 (n + 1)^2) rises then falls to 1/2;
    // the largest ratio past n_terms bounds the tail geometrically
    let ratio = |n: usize| {
        let nf = n as f64;
        nf * (nf + 1.0 + kappa) / (2.0 * (nf + 1.0) * (nf + 1.0))
    };
    let peak = (1.0 + 2.0 / (kappa - 1.0)).ceil() as usize + 1;
    let q = (n_terms..=peak.max(n_terms)).map(ratio).fold(0.0, f64::max);
    let bound = if q < 1.0 { term(n_terms) * q / (1.0 - q) } else { f64::INFINITY };
    Ok(SeriesValue { value: 0.5 * sum, remainder_bound: 0.5 * bound, terms: n_terms })
}

/// `E_0 exp(-2 theta T_{1/2}) = 1 / F(a, b, 1, 1/2)` with `ab = theta`,
/// `a + b = 1 + kappa`.
pub fn hypergeom_laplace(kappa: f64, theta: f64) -> Result<f64> {
    ensure(theta >= 0.0, "theta", "must be >= 0")?;
    let s = 1.0 + kappa;
    let disc = s * s - 4.0 * theta;
    if disc < 0.0 {
        return Err(domain("hypergeom_laplace", "theta > (1 + kappa)^2 / 4 makes a, b complex"));
    }
    let a = 0.5 * (s - disc.sqrt());
    let b = 0.5 * (s + disc.sqrt());
    Ok(1.0 / hypergeom_2f1(a, b, 1.0, 0.5)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceCheck {
    pub mc: MomentEstimate,
    pub closed_form: f64,
    pub rel_error: f64,
}

pub fn hypergeom_laplace_check(t_half: &[f64], kappa: f64, theta: f64) -> Result<LaplaceCheck> {
    let closed_form = hypergeom_laplace(kappa, theta)?;
    let vals: Vec<f64> = t_half.iter().map(|t| (-2.0 * theta * t).exp()).collect();
    let mc = MomentEstimate::from_values(&vals);
    Ok(LaplaceCheck { mc, closed_form, rel_error: mc.relative_error(closed_form) })
}

/// Scale function `S_Y(y) = int_{1/2}^y dx / (x (1 - x)^(kappa + 1))` by quadrature.
pub fn scale_y(kappa: f64, y: f64) -> Result<f64> {
    ensure(kappa > 0.0, "kappa", "must be > 0")?;
    ensure(y > 0.0 && y < 1.0, "y", "must lie in (0, 1)")?;
    let f = |x: f64| 1.0 / (x * (1.0 - x).powf(kappa + 1.0));
    if y >= 0.5 {
        integrate(f, 0.5, y, 1e-12)
    } else {
        integrate(f, y, 0.5, 1e-12).map(|v| -v)
    }
}

/// `U(t) = 4 int_0^t ds / (Y (1 - Y)^(2 kappa + 1))` along a path, as a
/// strictly increasing grid function of `t`.
pub fn u_clock(path: &ProcessPath, kappa: f64) -> Result<GridFunction> {
    ensure(path.len() >= 2, "path", "needs at least two points")?;
    let f = |y: f64| {
        let y = y.clamp(SATURATION, 1.0 - SATURATION);
        4.0 / (y * (1.0 - y).powf(2.0 * kappa + 1.0))
    };
    let mut xs = Vec::with_capacity(path.len());
    let mut ys = Vec::with_capacity(path.len());
    let mut acc = 0.0;
    xs.push(path.t0);
    ys.push(0.0);
    for k in 1..path.len() {
        acc += 0.5 * (f(path.values[k - 1]) + f(path.values[k])) * path.dt;
        xs.push(path.time(k));
        ys.push(acc);
    }
    GridFunction::new(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upsilon_of_constant_paths() {
        let p = ProcessPath::new(0.0, 0.01, alloc::vec![0.5; 301]);
        assert!((upsilon_of(&p, 3.0).unwrap().value - 6.0).abs() < 1e-9);
        let z = ProcessPath::new(0.0, 0.01, alloc::vec![0.0; 11]);
        assert_eq!(upsilon_of(&z, 0.1).unwrap().value, 0.0);
        assert!(upsilon_of(&z, 1.0).is_err());
        let one = ProcessPath::new(0.0, 0.01, alloc::vec![1.0; 11]);
        assert!(upsilon_of(&one, 0.1).unwrap().saturated);
    }

    #[test]
    fn series_first_term_and_limit() {
        let s = t_half_moment_series(2.0, 1).unwrap();
        assert!((s.value - 0.25).abs() < 1e-15);
        let s = t_half_moment_series(2.0, 50).unwrap();
        let exact = (5.0 + 2.0 * core::f64::consts::LN_2) / 12.0;
        assert!((s.value - exact).abs() < 1e-9);
        assert!(s.remainder_bound < 1e-9);
        assert!(exact - s.value <= s.remainder_bound + 1e-14);
        let s10 = t_half_moment_series(2.0, 10).unwrap();
        assert!(exact - s10.value <= s10.remainder_bound && s10.remainder_bound < 1e-2);
    }

    #[test]
    fn laplace_closed_form_edges() {
        assert!((hypergeom_laplace(2.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(hypergeom_laplace(2.0, 2.5).is_err());
        assert!(hypergeom_laplace(2.0, 0.5).unwrap() < hypergeom_laplace(2.0, 0.1).unwrap());
    }

    #[test]
    fn scale_function_is_antisymmetric_at_one_half() {
        assert_eq!(scale_y(2.0, 0.5).unwrap(), 0.0);
        // kappa -> closed form for kappa = 1:
        // int dx/(x(1-x)^2) = ln(x/(1-x)) + 1/(1-x)
        let f = |x: f64| (x / (1.0 - x)).ln() + 1.0 / (1.0 - x);
        let v = scale_y(1.0, 0.9).unwrap();
        assert!((v - (f(0.9) - f(0.5))).abs() < 1e-9);
        let v = scale_y(1.0, 0.1).unwrap();
        assert!((v - (f(0.1) - f(0.5))).abs() < 1e-9);
    }

    #[test]
    fn jacobi_path_stays_in_unit_interval() {
        let spec = JacobiSpec::new(0.5, 0.7, 0.3, 1e-3).unwrap();
        let mut rng = RngStream::new(3, 3);
        let p = simulate_jacobi(spec, 2.0, &mut rng).unwrap();
        assert_eq!(p.len(), 2001);
        assert!(p.values.iter().all(|&y| (0.0..=1.0).contains(&y)));
    }
}
