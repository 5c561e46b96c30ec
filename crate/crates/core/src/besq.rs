//! Squared Bessel processes: exact transitions, absorption times, the
//! Lamperti construction, perpetuities and the supremum law of BESQ(0).
//!
//! `BESQ(d)` solves `dX = 2 sqrt(X) dB + d dt`. For `d >= 0` a step of length
//! `dt` from `x` is `dt * chi2'(d, x / dt)`, exact in law for every `dt`; it is
//! drawn as `(sqrt(x) + sqrt(dt) N)^2 + dt chi2(d - 1)` when `d >= 1` and as
//! the Poisson-mixed gamma otherwise.
//! Negative dimensions only appear through their absorption time and use an
//! Euler scheme.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;


use crate::error::{domain, ensure, Error, Result};
use crate::path::{ClockedPath, ProcessPath};
use crate::replicate::Replicator;
use crate::rng::RngStream;
use crate::sampling::{draw_gamma, draw_gaussian, noncentral_chisq_parts};
use crate::special::{gamma_q, ln_gamma};
use crate::stats::MomentEstimate;

pub mod family {
    pub const S_INFINITY: u32 = 0x01;
    pub const PERPETUITY: u32 = 0x02;
    pub const SUP: u32 = 0x03;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesqSpec {
    pub dimension_d: f64,
    pub start: f64,
}

impl BesqSpec {
    pub fn new(dimension_d: f64, start: f64) -> Result<Self> {
        ensure(dimension_d.is_finite(), "dimension_d", "must be finite")?;
        ensure(start >= 0.0 && start.is_finite(), "start", "must be finite and >= 0")?;
        Ok(BesqSpec { dimension_d, start })
    }
}

/// One transition of `BESQ(d)` over `dt` from `x`.
pub fn besq_step(x: f64, d: f64, dt: f64, rng: &mut RngStream) -> Result<f64> {
    ensure(x >= 0.0 && x.is_finite(), "x", "must be finite and >= 0")?;
    ensure(d.is_finite(), "d", "must be finite")?;
    ensure(dt > 0.0 && dt.is_finite(), "dt", "must be finite and > 0")?;
    Ok(besq_step_unchecked(x, d, dt, rng))
}

/// [`besq_step`] without argument checks, for inner loops.
#[inline]
pub fn besq_step_unchecked(x: f64, d: f64, dt: f64, rng: &mut RngStream) -> f64 {
    if d >= 1.0 {
        // chi2'(d, l) = (sqrt(l) + N)^2 + chi2(d - 1), cheaper than the mixture
        let z = x.sqrt() + dt.sqrt() * draw_gaussian(rng);
        let m = d - 1.0;
        let rest = if m == 0.0 {
            0.0
        } else if m == 1.0 {
            let g = draw_gaussian(rng);
            g * g
        } else {
            2.0 * draw_gamma(0.5 * m, rng)
        };
        z * z + dt * rest
    } else if d >= 0.0 {
        if x == 0.0 && d == 0.0 {
            return 0.0;
        }
        dt * noncentral_chisq_parts(d, x / dt, rng).1
    } else {
        if x == 0.0 {
            return 0.0;
        }
        let y = x + d * dt + 2.0 * (x * dt).sqrt() * draw_gaussian(rng);
        y.max(0.0)
    }
}

/// Path of `BESQ(d)` on the grid `k dt`, `k dt <= horizon`.
///
/// For `d <= 0` the first grid time at which the value is 0 is recorded in
/// `absorbed_at` (the Euler crossing, linearly interpolated, for `d < 0`)
/// and later values are 0.
pub fn besq_path(spec: BesqSpec, dt: f64, horizon: f64, rng: &mut RngStream) -> Result<ProcessPath> {
    ensure(dt > 0.0 && horizon >= 0.0, "dt", "needs dt > 0 and horizon >= 0")?;
    let steps = (horizon / dt).floor() as usize;
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = spec.start;
    values.push(x);
    let mut absorbed_at = if x == 0.0 && spec.dimension_d <= 0.0 { Some(0.0) } else { None };
    let d = spec.dimension_d;
    for k in 0..steps {
        let y = if d < 0.0 && x > 0.0 {
            let raw = x + d * dt + 2.0 * (x * dt).sqrt() * draw_gaussian(rng);
            if raw <= 0.0 {
                absorbed_at = Some((k as f64 + x / (x - raw)) * dt);
            }
            raw.max(0.0)
        } else {
            let y = besq_step_unchecked(x, d, dt, rng);
            if absorbed_at.is_none() && y == 0.0 && d == 0.0 {
                absorbed_at = Some((k + 1) as f64 * dt);
            }
            y
        };
        x = y;
        values.push(x);
    }
    let mut p = ProcessPath::new(0.0, dt, values);
    p.absorbed_at = absorbed_at;
    Ok(p)
}

/// Step control for the absorption time of a negative-dimension BESQ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorptionConfig {
    /// Largest Euler step.
    pub dt: f64,
    /// Near 0 the step is at most `rel_step * x`.
    pub rel_step: f64,
    /// Below this level the remaining time is taken as its drift value `x / |d|`.
    pub floor: f64,
    /// Give up after this much simulated time.
    pub hard_cap: f64,
}

impl Default for AbsorptionConfig {
    fn default() -> Self {
        AbsorptionConfig { dt: 1e-3, rel_step: 0.01, floor: 1e-12, hard_cap: 1e4 }
    }
}

/// Absorption time at 0 of `BESQ(d)` started at `x0`, for `d < 0`.
pub fn besq_absorption_time(d: f64, x0: f64, cfg: AbsorptionConfig, rng: &mut RngStream) -> Result<f64> {
    ensure(d < 0.0, "d", "absorption sampler needs a negative dimension")?;
    ensure(x0 > 0.0, "x0", "must be > 0")?;
    ensure(cfg.dt > 0.0 && cfg.rel_step > 0.0 && cfg.floor > 0.0, "cfg", "steps must be > 0")?;
    let mut x = x0;
    let mut t = 0.0;
    while t < cfg.hard_cap {
        if x < cfg.floor {
            return Ok(t + x / -d);
        }
        let h = cfg.dt.min(cfg.rel_step * x);
        let y = x + d * h + 2.0 * (x * h).sqrt() * draw_gaussian(rng);
        if y <= 0.0 {
            return Ok(t + h * x / (x - y));
        }
        t += h;
        x = y;
    }
    Err(Error::Horizon(alloc::format!("no absorption within time {}", cfg.hard_cap)))
}

/// `S(inf)`: absorption time of `BESQ(2 - 2 kappa)` started at 4.
///
/// Equivalently the hitting time of 0 by a Bessel process of dimension
/// `2 - 2 kappa` started at 2. Needs `kappa > 1` for a finite mean; for
/// `kappa <= 1` the process is not absorbed and the hard cap reports an error.
pub fn sample_s_infinity(kappa: f64, cfg: AbsorptionConfig, rng: &mut RngStream) -> Result<f64> {
    ensure(kappa > 0.0, "kappa", "must be > 0")?;
    let d = 2.0 - 2.0 * kappa;
    if d >= 0.0 {
        return Err(Error::Horizon("BESQ of nonnegative dimension from 4 is not absorbed".into()));
    }
    besq_absorption_time(d, 4.0, cfg, rng)
}

/// Density of `S(inf)`: `2^kappa / Gamma(kappa) e^{-2/x} x^{-kappa-1}`.
pub fn dufresne_density(x: f64, kappa: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("dufresne_density", "x must be > 0"));
    }
    ensure(kappa > 0.0, "kappa", "must be > 0")?;
    Ok((kappa * 2f64.ln() - ln_gamma(kappa) - 2.0 / x - (kappa + 1.0) * x.ln()).exp())
}

/// Distribution function of `S(inf)`; `1/S(inf)` is Gamma(kappa) with rate 2.
pub fn dufresne_cdf(x: f64, kappa: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_q(kappa, 2.0 / x)
    }
}

/// Lamperti construction from a Brownian path `B` (uniform grid, `B(0) = 0`).
///
/// Returns `R(A(t)) = 2 exp((B(t) + zeta t / 2) / 2)` observed on the clock
/// `A(t) = int_0^t exp(B(y) + zeta y / 2) dy`, the clock by the trapezoid rule.
/// `R` is a Bessel process of dimension `2 + 2 zeta` started at 2.
pub fn lamperti_transform(bm_path: &ProcessPath, zeta: f64) -> Result<ClockedPath> {
    ensure(bm_path.len() >= 2, "bm_path", "needs at least two points")?;
    ensure(bm_path.values[0] == 0.0, "bm_path", "must start at 0")?;
    let n = bm_path.len();
    let mut clock = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    let mut a = 0.0;
    let mut prev = 1.0;
    for (i, &b) in bm_path.values.iter().enumerate() {
        let e = (b + 0.5 * zeta * bm_path.time(i)).exp();
        if i > 0 {
            a += 0.5 * bm_path.dt * (prev + e);
        }
        clock.push(a);
        r.push(2.0 * e.sqrt());
        prev = e;
    }
    ClockedPath::new(clock, r)
}

/// `max_i |exp(B(t_i) + zeta t_i / 2) - R(A(t_i))^2 / 4|` on the path nodes.
pub fn lamperti_residual(bm_path: &ProcessPath, zeta: f64, r: &ClockedPath) -> f64 {
    bm_path
        .values
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let lhs = (b + 0.5 * zeta * bm_path.time(i)).exp();
            let rv = r.values[i];
            (lhs - 0.25 * rv * rv).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerpetuityConfig {
    /// Step relative to the current value of `R^2`.
    pub rel_step: f64,
    /// Stop once the expected remaining integral is below `rel_tol` times the
    /// accumulated one.
    pub rel_tol: f64,
    /// Time after which the integral is cut and flagged as truncated.
    pub horizon: f64,
}

impl Default for PerpetuityConfig {
    fn default() -> Self {
        PerpetuityConfig { rel_step: 0.01, rel_tol: 1e-8, horizon: 1e12 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perpetuity {
    pub value: f64,
    /// Expected size of the discarded remainder `int_t^inf R^{-b}`.
    pub tail_bound: f64,
    pub truncated: bool,
}

/// `(2^{b-2} (b-2)^2)^{-1}`: the scale turning a Dufresne variable of index
/// `(d-2)/(b-2)` into the law of `int_0^inf R^{-b}` for `R` Bessel(d) from 2.
pub fn perpetuity_scale(b: f64) -> f64 {
    1.0 / (2f64.powf(b - 2.0) * (b - 2.0) * (b - 2.0))
}

/// One draw of `int_0^inf R(s)^{-b} ds`, `R` a Bessel process of dimension `d`
/// started at 2.
///
/// `X = R^2` is advanced by exact BESQ(d) steps of length `rel_step * X`, and
/// `X^{-b/2}` is integrated by the trapezoid rule. By scaling the remainder
/// from level `x` is `(x/4)^{1-b/2}` times a copy of the whole integral, so
/// the expected remainder is known in closed form when its mean is finite,
/// and the loop stops once it is negligible.
pub fn sample_perpetuity(d: f64, b: f64, cfg: PerpetuityConfig, rng: &mut RngStream) -> Result<Perpetuity> {
    ensure(d > 2.0, "d", "must be > 2 (transient)")?;
    ensure(b > 2.0, "b", "must be > 2")?;
    ensure(cfg.rel_step > 0.0 && cfg.rel_tol > 0.0, "cfg", "steps and tolerances must be > 0")?;
    let kappa = (d - 2.0) / (b - 2.0);
    let scale = perpetuity_scale(b);
    // mean of the whole integral from 4, or its scale when the mean is infinite
    let unit_remainder = if kappa > 1.0 { scale * 2.0 / (kappa - 1.0) } else { scale };
    let e = -0.5 * b;
    let mut x: f64 = 4.0;
    let mut f = x.powf(e);
    let mut t = 0.0;
    let mut integral = 0.0;
    loop {
        let tail = (0.25 * x).powf(1.0 + e) * unit_remainder;
        if tail < cfg.rel_tol * integral {
            return Ok(Perpetuity { value: integral, tail_bound: tail, truncated: false });
        }
        if t >= cfg.horizon {
            return Ok(Perpetuity { value: integral, tail_bound: tail, truncated: true });
        }
        let h = cfg.rel_step * x;
        let y = besq_step_unchecked(x, d, h, rng);
        let g = y.powf(e);
        integral += 0.5 * h * (f + g);
        t += h;
        x = y;
        f = g;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupConfig {
    /// Step is `rel_step * max(Z, floor)`.
    pub rel_step: f64,
    pub floor: f64,
}

impl Default for SupConfig {
    fn default() -> Self {
        SupConfig { rel_step: 0.01, floor: 1e-3 }
    }
}

/// Conditional probability that `BESQ(0)` started at 1 exceeds `u` before
/// absorption, given one simulated skeleton.
///
/// The skeleton is exact. Between nodes the crossing probability of `sqrt(Z)`
/// (unit volatility) is the Brownian-bridge value
/// `exp(-2 (c - a)(c - b) / h)`, and the function returns `1 - P(no crossing)`;
/// averaging over skeletons estimates `P(sup Z > u) = 1/u`.
pub fn besq0_sup_exceeds(u: f64, cfg: SupConfig, rng: &mut RngStream) -> Result<f64> {
    ensure(u > 1.0, "u", "must be > 1")?;
    let c = u.sqrt();
    let mut z: f64 = 1.0;
    let mut survive = 1.0;
    loop {
        let h = cfg.rel_step * z.max(cfg.floor);
        let y = besq_step_unchecked(z, 0.0, h, rng);
        if y >= u {
            return Ok(1.0);
        }
        let (a, b) = (z.sqrt(), y.sqrt());
        survive *= 1.0 - (-2.0 * (c - a) * (c - b) / h).exp();
        if y == 0.0 {
            return Ok(1.0 - survive);
        }
        z = y;
    }
}

/// `E Z(t)^b` for `Z` a BESQ(0) started at 1, `b > 0`:
/// `t^{b-1} 2^{b-1} e^{-1/(2t)} sum_n Gamma(n+b+1) / (n! (n+1)!) (2t)^{-n}`.
pub fn besq0_moment(t: f64, b: f64) -> Result<f64> {
    ensure(t > 0.0, "t", "must be > 0")?;
    ensure(b > 0.0, "b", "must be > 0")?;
    let lx = -(2.0 * t).ln();
    let mut sum = 0.0;
    let mut n = 0.0;
    let mut peaked = false;
    loop {
        let lt = ln_gamma(n + b + 1.0) - ln_gamma(n + 1.0) - ln_gamma(n + 2.0) + n * lx;
        let term = lt.exp();
        sum += term;
        if n > 1.0 / t + b {
            peaked = true;
        }
        if peaked && term < 1e-17 * sum {
            break;
        }
        n += 1.0;
    }
    Ok(t.powf(b - 1.0) * 2f64.powf(b - 1.0) * (-0.5 / t).exp() * sum)
}

/// `S(inf)` draws, one stream per replica.
pub fn s_infinity_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    n: usize,
    cfg: AbsorptionConfig,
) -> Result<Vec<f64>> {
    rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::S_INFINITY, i as u64);
        sample_s_infinity(kappa, cfg, &mut rng)
    })
    .into_iter()
    .collect()
}

/// Perpetuity draws; a truncated draw is an error.
pub fn perpetuity_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    d: f64,
    b: f64,
    n: usize,
    cfg: PerpetuityConfig,
) -> Result<Vec<f64>> {
    rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::PERPETUITY, i as u64);
        let p = sample_perpetuity(d, b, cfg, &mut rng)?;
        if p.truncated {
            return Err(Error::Horizon(alloc::format!("perpetuity still open at t = {}", cfg.horizon)));
        }
        Ok(p.value)
    })
    .into_iter()
    .collect()
}

/// Estimate of `P(sup Z > u)` for `Z = BESQ(0)` from 1, averaging the
/// conditional crossing probabilities of `n` skeletons.
pub fn sup_law_estimate<R: Replicator>(rep: &R, seed: u64, u: f64, n: usize, cfg: SupConfig) -> Result<MomentEstimate> {
    let v: Vec<f64> = rep
        .map(n, |i| {
            let mut rng = RngStream::replica(seed, family::SUP, i as u64).derive(u.to_bits());
            besq0_sup_exceeds(u, cfg, &mut rng)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(MomentEstimate::from_values(&v))
}
