//! Brownian paths stopped at hitting times, local-time estimation, and the
//! identities in law for local-time fields at inverse local times.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;


use crate::error::{ensure, param, Error, Result};
use crate::field::{cauchy_functional, power_weight_integral, sample_field_nodes, FieldGrid};
use crate::path::ProcessPath;
use crate::replicate::Replicator;
use crate::rng::RngStream;
use crate::sampling::{biane_yor_scale, draw_cauchy_asym, draw_gaussian, draw_stable, noncentral_chisq_parts, StableLawSpec};
use crate::special::EULER_GAMMA;
use crate::stats::{ks_two_sample, KsResult, MomentEstimate};

/// Stream families of this module.
pub mod family {
    pub const SIGMA: u32 = 0x10;
    pub const RAY_KNIGHT_FIRST: u32 = 0x11;
    pub const GETOOR_SHARPE: u32 = 0x12;
    pub const BIANE_YOR_FIELD: u32 = 0x13;
    pub const BIANE_YOR_STABLE: u32 = 0x14;
    pub const CAUCHY_FIELD: u32 = 0x15;
    pub const CAUCHY_STABLE: u32 = 0x16;
    pub const QUENCHED_SCALING: u32 = 0x17;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// First hitting time of level `r`.
    Sigma(f64),
    /// Inverse local time at 0, at local time `l`.
    Tau(f64),
}

/// Brownian path from 0 stopped at `sigma(r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaPath {
    pub path: ProcessPath,
    pub r: f64,
    /// Hitting time; at most one step after the last grid time.
    pub sigma: f64,
}

/// Probability that a Brownian bridge from `a` to `b` over time `dt` crosses
/// the level `r > max(a, b)`.
#[inline]
fn bridge_cross(r: f64, a: f64, b: f64, dt: f64) -> f64 {
    (-2.0 * (r - a) * (r - b) / dt).exp()
}

/// Brownian path on the grid `k dt` up to the first crossing of `r`.
///
/// A crossing is declared when a grid value reaches `r`, or, between two grid
/// values below `r`, with the Brownian-bridge crossing probability. `sigma` is
/// the interpolated crossing time in the first case and the end of the step in
/// the second.
pub fn simulate_to_sigma(r: f64, dt: f64, horizon: f64, rng: &mut RngStream) -> Result<SigmaPath> {
    ensure(r > 0.0, "r", "must be > 0")?;
    ensure(dt > 0.0, "dt", "must be > 0")?;
    let sd = dt.sqrt();
    let mut values = alloc::vec![0.0];
    let mut b = 0.0;
    let mut t = 0.0;
    while t < horizon {
        let nb = b + sd * draw_gaussian(rng);
        if nb >= r {
            let sigma = t + dt * (r - b) / (nb - b);
            values.push(nb);
            return Ok(SigmaPath { path: ProcessPath::new(0.0, dt, values), r, sigma });
        }
        if r - nb < 8.0 * sd && rng.uniform() < bridge_cross(r, b, nb, dt) {
            values.push(nb);
            return Ok(SigmaPath { path: ProcessPath::new(0.0, dt, values), r, sigma: t + dt });
        }
        values.push(nb);
        b = nb;
        t += dt;
    }
    Err(Error::Horizon(alloc::format!("level {r} not reached by time {horizon}")))
}

/// First passage time of level `r`, or `None` if it exceeds `cap`. No path is stored.
pub fn first_passage_time(r: f64, dt: f64, cap: f64, rng: &mut RngStream) -> Option<f64> {
    let sd = dt.sqrt();
    let mut b = 0.0;
    let mut t = 0.0;
    while t < cap {
        let nb = b + sd * draw_gaussian(rng);
        if nb >= r {
            return Some(t + dt * (r - b) / (nb - b));
        }
        if r - nb < 8.0 * sd && rng.uniform() < bridge_cross(r, b, nb, dt) {
            return Some(t + dt);
        }
        b = nb;
        t += dt;
    }
    None
}

/// Estimated local-time field of a stopped path.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTimeField {
    /// Uniform levels with spacing `bandwidth`.
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub stop_rule: StopRule,
    /// Set when the bandwidth is below the path's per-step resolution.
    pub warning: Option<&'static str>,
}

impl LocalTimeField {
    /// Riemann sum of the field over its levels.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bandwidth
    }

    /// Field value at the level nearest to `x` (0 off the grid).
    pub fn at(&self, x: f64) -> f64 {
        let k = ((x - self.levels[0]) / self.bandwidth).round();
        if k < 0.0 || k as usize >= self.values.len() {
            0.0
        } else {
            self.values[k as usize]
        }
    }
}

/// `L^x` estimated as the time spent in `[x - h, x + h)` divided by `2h`.
///
/// Levels are spaced by `h`, so each instant is counted in exactly two windows
/// and the field integrates to the elapsed time `stop_time`. Grid point `k`
/// carries the time `dt` clipped at `stop_time`; the last one carries whatever
/// remains.
pub fn local_time_profile(
    path: &ProcessPath,
    stop_time: f64,
    bandwidth: f64,
    stop_rule: StopRule,
) -> Result<LocalTimeField> {
    ensure(bandwidth > 0.0, "bandwidth", "must be > 0")?;
    ensure(!path.is_empty(), "path", "must not be empty")?;
    let h = bandwidth;
    let lo = path.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = path.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k0 = (lo / h).floor() as i64 - 1;
    let k1 = (hi / h).ceil() as i64 + 1;
    let m = (k1 - k0 + 1) as usize;
    let levels: Vec<f64> = (0..m).map(|i| (k0 + i as i64) as f64 * h).collect();
    let mut occ = alloc::vec![0.0; m];
    let n = path.len();
    for (i, &b) in path.values.iter().enumerate() {
        let left = (stop_time - path.time(i)).max(0.0);
        let w = if i + 1 < n { left.min(path.dt) } else { left };
        if w == 0.0 {
            continue;
        }
        // windows [x_k - h, x_k + h) containing b: k = j and k = j + 1 with j = floor(b / h)
        let j = (b / h).floor() as i64;
        for k in [j, j + 1] {
            let idx = (k - k0) as usize;
            occ[idx] += w;
        }
    }
    let values = occ.iter().map(|o| o / (2.0 * h)).collect();
    let warning = if h < path.dt.sqrt() { Some("bandwidth below the per-step displacement sqrt(dt)") } else { None };
    Ok(LocalTimeField { levels, values, bandwidth: h, stop_rule, warning })
}

/// Settings for local times at a hitting time without storing the path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HittingLocalTimeConfig {
    pub dt: f64,
    pub bandwidth: f64,
    /// Level whose first hitting time stops the path.
    pub hit_level: f64,
    /// Excursions below this level are cut out: the path is restarted at the
    /// level, which leaves local times above it unchanged in law.
    pub floor: f64,
}

impl HittingLocalTimeConfig {
    /// `dt`, bandwidth `dt^0.4`, stopping at 1 with the floor at -1/4.
    pub fn standard(dt: f64) -> Self {
        HittingLocalTimeConfig { dt, bandwidth: dt.powf(0.4), hit_level: 1.0, floor: -0.25 }
    }
}

/// Window estimates of `L^x_{sigma(hit_level)}` at each requested level.
///
/// By the strong Markov property a Brownian path below `floor` returns to
/// `floor` without visiting higher levels, so replacing a step that ends below
/// `floor` by the value `floor` removes only time spent below it. Levels must
/// satisfy `x - bandwidth > floor`.
pub fn hitting_local_times(levels: &[f64], cfg: HittingLocalTimeConfig, rng: &mut RngStream) -> Result<Vec<f64>> {
    ensure(cfg.dt > 0.0 && cfg.bandwidth > 0.0, "cfg", "dt and bandwidth must be > 0")?;
    ensure(cfg.hit_level > 0.0 && cfg.floor < 0.0, "cfg", "needs floor < 0 < hit_level")?;
    if levels.iter().any(|&x| x - cfg.bandwidth <= cfg.floor || x > cfg.hit_level) {
        return Err(param("levels", "windows must lie above the floor and at or below the hit level"));
    }
    let sd = cfg.dt.sqrt();
    let h = cfg.bandwidth;
    let r = cfg.hit_level;
    let mut occ = alloc::vec![0.0; levels.len()];
    let mut b: f64 = 0.0;
    loop {
        for (o, &x) in occ.iter_mut().zip(levels) {
            if (b - x).abs() < h {
                *o += cfg.dt;
            }
        }
        let nb = b + sd * draw_gaussian(rng);
        if nb >= r || (r - nb < 8.0 * sd && rng.uniform() < bridge_cross(r, b, nb, cfg.dt)) {
            break;
        }
        b = nb.max(cfg.floor);
    }
    Ok(occ.into_iter().map(|o| o / (2.0 * h)).collect())
}

/// Local times at 0 and 1/2 at `sigma(1)`, one row per replica.
pub fn ray_knight_first_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    n: usize,
    cfg: HittingLocalTimeConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::RAY_KNIGHT_FIRST, i as u64);
        hitting_local_times(&[0.0, 0.5], cfg, &mut rng)
    });
    let mut l0 = Vec::with_capacity(n);
    let mut lhalf = Vec::with_capacity(n);
    for row in rows {
        let row = row?;
        l0.push(row[0]);
        lhalf.push(row[1]);
    }
    Ok((l0, lhalf))
}

/// Samples of `L^{c x}_{sigma(c)} / c` from paths stopped at `sigma(c)`;
/// the same law as `L^x_{sigma(1)}` by Brownian scaling.
pub fn scaled_local_time_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    n: usize,
    c: f64,
    x: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    let cfg = HittingLocalTimeConfig { dt, bandwidth: c * dt.powf(0.4), hit_level: c, floor: -0.25 * c };
    rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::QUENCHED_SCALING, ((c * 1000.0) as u64) << 24 | i as u64);
        hitting_local_times(&[c * x], cfg, &mut rng).map(|v| v[0] / c)
    })
    .into_iter()
    .collect()
}

/// Estimator of `E exp(u L^z_{tau(1)})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GetoorSharpeEstimator {
    /// Average of `exp(u Z)` over exact draws `Z = L^z_{tau(1)}`.
    Direct,
    /// Average of `E[exp(u Z) | K] = (1 - 2uz)^{-K}` over the Poisson index
    /// `K` of each exact draw `Z = 2z Gamma(K)`.
    Conditional,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GetoorSharpeResult {
    pub mc_estimate: f64,
    pub stderr: f64,
    pub closed_form: f64,
    pub rel_error: f64,
}

/// Compares Monte Carlo with `E exp(u L^z_{tau(1)}) = exp(u / (1 - 2uz))`.
pub fn getoor_sharpe_check<R: Replicator>(
    rep: &R,
    seed: u64,
    z: f64,
    u: f64,
    n: usize,
    estimator: GetoorSharpeEstimator,
) -> Result<GetoorSharpeResult> {
    ensure(z >= 0.0 && u >= 0.0, "z, u", "must be >= 0")?;
    if !(2.0 * u * z < 1.0) {
        return Err(crate::error::domain("getoor_sharpe_check", "needs 2uz < 1; the transform diverges"));
    }
    let closed_form = (u / (1.0 - 2.0 * u * z)).exp();
    let draws = rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::GETOOR_SHARPE, i as u64);
        if z == 0.0 {
            return u.exp();
        }
        // L^z_{tau(1)} is BESQ(0) from 1 at time z: z chi2'(0, 1/z) = 2z Gamma(K)
        let (k, chi) = noncentral_chisq_parts(0.0, 1.0 / z, &mut rng);
        match estimator {
            GetoorSharpeEstimator::Direct => (u * z * chi).exp(),
            GetoorSharpeEstimator::Conditional => (1.0 - 2.0 * u * z).powf(-(k as f64)),
        }
    });
    let m = MomentEstimate::from_values(&draws);
    Ok(GetoorSharpeResult {
        mc_estimate: m.mean,
        stderr: m.stderr,
        closed_form,
        rel_error: (m.mean / closed_form - 1.0).abs(),
    })
}

/// Draws of `int_0^inf x^{1/p - 2} L^x_{tau(l)} dx` from exact fields.
pub fn biane_yor_functional_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    p: f64,
    ell: f64,
    n: usize,
    grid: FieldGrid,
) -> Result<Vec<f64>> {
    ensure(p > 0.0 && p < 1.0, "p", "must lie in (0, 1)")?;
    ensure(ell > 0.0, "lambda", "must be > 0")?;
    let s = 1.0 / p - 2.0;
    Ok(rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::BIANE_YOR_FIELD, i as u64);
        let mut nodes = Vec::new();
        sample_field_nodes(ell, grid, &mut rng, &mut nodes);
        power_weight_integral(&nodes, s, 0.0, f64::INFINITY)
    }))
}

/// Draws of `2 p^{2-2/p} psi(p) l^{1/p} S_p`.
pub fn scaled_stable_samples<R: Replicator>(rep: &R, seed: u64, p: f64, ell: f64, n: usize) -> Result<Vec<f64>> {
    let spec = StableLawSpec::new(p)?;
    let c = biane_yor_scale(p) * ell.powf(1.0 / p);
    rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::BIANE_YOR_STABLE, i as u64);
        draw_stable(spec, &mut rng).map(|v| c * v)
    })
    .into_iter()
    .collect()
}

/// Two-sample KS between the weighted field integral and the scaled stable law.
pub fn biane_yor_stable_check<R: Replicator>(
    rep: &R,
    seed: u64,
    p: f64,
    ell: f64,
    n: usize,
    grid: FieldGrid,
    threshold: f64,
) -> Result<KsResult> {
    let a = biane_yor_functional_samples(rep, seed, p, ell, n, grid)?;
    let b = scaled_stable_samples(rep, seed, p, ell, n)?;
    ks_two_sample(&a, &b, threshold)
}

/// `log(pi/4) - 2 gamma`, the centering of the Cauchy identity.
pub fn cauchy_centering() -> f64 {
    (core::f64::consts::PI / 4.0).ln() - 2.0 * EULER_GAMMA
}

/// The centering with the opposite sign on the Euler term. Kept for reports;
/// its KS distance to the functional is large.
pub fn printed_cauchy_centering() -> f64 {
    2.0 * EULER_GAMMA + (core::f64::consts::PI / 4.0).ln()
}

/// Default grid for the compensated integral: geometric from `1e-6` with
/// ratio 5% near 0, then steps relative to the field value.
pub fn cauchy_grid() -> FieldGrid {
    FieldGrid { rel_step: 0.01, floor_frac: 0.01, geometric_start: Some((1e-6, 0.05)) }
}

/// Draws of `int_0^1 (L^x - 1)/x dx + int_1^inf L^x/x dx` at `tau(1)`.
///
/// The initial segment `[0, first]` is taken as linear; its contribution is of
/// order `sqrt(first)`.
pub fn cauchy_functional_samples<R: Replicator>(rep: &R, seed: u64, n: usize, grid: FieldGrid) -> Vec<f64> {
    rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::CAUCHY_FIELD, i as u64);
        let mut nodes = Vec::new();
        sample_field_nodes(1.0, grid, &mut rng, &mut nodes);
        cauchy_functional(&nodes)
    })
}

/// Functional values on a fine grid and on the grid of every other node of
/// the same fields.
pub fn cauchy_functional_pairs<R: Replicator>(rep: &R, seed: u64, n: usize, grid: FieldGrid) -> Vec<(f64, f64)> {
    rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::CAUCHY_FIELD, i as u64);
        let mut nodes = Vec::new();
        sample_field_nodes(1.0, grid, &mut rng, &mut nodes);
        let coarse = crate::field::coarsen(&nodes);
        (cauchy_functional(&nodes), cauchy_functional(&coarse))
    })
}

/// Draws of `log(pi/4) - 2 gamma + (pi/2) C_1`.
pub fn affine_cauchy_samples<R: Replicator>(rep: &R, seed: u64, n: usize) -> Vec<f64> {
    let c = cauchy_centering();
    rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::CAUCHY_STABLE, i as u64);
        c + core::f64::consts::FRAC_PI_2 * draw_cauchy_asym(&mut rng)
    })
}

pub fn cauchy_identity_check<R: Replicator>(
    rep: &R,
    seed: u64,
    n: usize,
    grid: FieldGrid,
    threshold: f64,
) -> Result<KsResult> {
    ensure(n >= 1000, "n", "must be >= 1000")?;
    let a = cauchy_functional_samples(rep, seed, n, grid);
    let b = affine_cauchy_samples(rep, seed, n);
    ks_two_sample(&a, &b, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Sequential;

    #[test]
    fn getoor_sharpe_trivial_points() {
        let r = getoor_sharpe_check(&Sequential, 1, 0.0, 0.7, 100, GetoorSharpeEstimator::Direct).unwrap();
        assert_eq!(r.mc_estimate, 0.7f64.exp());
        assert_eq!(r.rel_error, 0.0);
        let r = getoor_sharpe_check(&Sequential, 1, 0.8, 0.0, 100, GetoorSharpeEstimator::Direct).unwrap();
        assert_eq!(r.mc_estimate, 1.0);
        assert_eq!(r.closed_form, 1.0);
        assert!(getoor_sharpe_check(&Sequential, 1, 1.0, 0.5, 10, GetoorSharpeEstimator::Direct).is_err());
    }

    #[test]
    fn occupation_identity_on_a_path() {
        let mut rng = RngStream::new(5, 5);
        let sp = simulate_to_sigma(0.5, 1e-4, 1e3, &mut rng).unwrap();
        let f = local_time_profile(&sp.path, sp.sigma, 0.01, StopRule::Sigma(0.5)).unwrap();
        assert!((f.integral() / sp.sigma - 1.0).abs() < 1e-9);
        assert!(f.values.iter().all(|&v| v >= 0.0));
        assert_eq!(f.at(10.0), 0.0);
    }

    #[test]
    fn sigma_path_stays_below_level_until_the_end() {
        let mut rng = RngStream::new(6, 1);
        let sp = simulate_to_sigma(0.3, 1e-3, 1e3, &mut rng).unwrap();
        let n = sp.path.len();
        assert!(sp.path.values[..n - 1].iter().all(|&b| b < 0.3));
        assert!(sp.sigma <= sp.path.end_time() + 1e-12);
    }
}
