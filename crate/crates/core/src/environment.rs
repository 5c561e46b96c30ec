//! The random potential `W(x) = B(x) - kappa x / 2`, its scale objects, and
//! the diffusion `X` moving in it.
//!
//! `W` is drawn on the uniform grid `j h` and interpolated linearly, so `e^W`
//! and `e^-W` integrate exactly cell by cell. `X(t) = S^-1(B(T^-1(t)))` is
//! simulated through the Brownian motion `B` observed at the scale images
//! `S(j h)` of the grid. Seen at those levels, `B` is the nearest-neighbour
//! walk with `P(j -> j+1) = (S_j - S_{j-1}) / (S_{j+1} - S_{j-1})`, which is
//! exact. Each step adds to the clock `T` its mean given the side of exit,
//! obtained from the Green function of the two adjacent cells, and split by
//! cell so that `H = I1 + I2` holds exactly. Only the fluctuation of the clock
//! inside a single step is dropped.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;


use crate::besq::besq_step_unchecked;
use crate::error::{ensure, param, Error, Result};
use crate::grid::GridFunction;
use crate::path::ProcessPath;
use crate::replicate::Replicator;
use crate::rng::RngStream;
use crate::sampling::{draw_exp1, draw_gaussian};
use crate::stats::{ks_two_sample, quantile, KsResult, MomentEstimate, TailCurve, TailPoint};

pub mod family {
    pub const ENVIRONMENT: u32 = 0x30;
    pub const SPEED: u32 = 0x31;
    pub const HITTING: u32 = 0x32;
    pub const TAIL_H: u32 = 0x33;
    pub const STABLE_LIMIT: u32 = 0x34;
    pub const SIGMA_GROWTH: u32 = 0x35;
    pub const S_INFINITY: u32 = 0x36;
    pub const I1_LAW_DIRECT: u32 = 0x37;
    pub const I1_LAW_FIELDS: u32 = 0x38;
    pub const DUALITY: u32 = 0x39;
}

const BLOCK: usize = 256;

/// Two-sided potential on the grid `j h`, `W(0) = 0`, extended lazily.
///
/// The two half-lines draw their increments from separate streams derived
/// from the construction stream, so the values do not depend on the order in
/// which the halves are extended.
#[derive(Clone, Debug)]
pub struct Environment {
    pub kappa: f64,
    pub grid_step: f64,
    /// `W(j h)`, `j >= 0`.
    right: Vec<f64>,
    /// `W(-j h)`, `j >= 0`.
    left: Vec<f64>,
    gen: Option<(RngStream, RngStream)>,
}

impl Environment {
    /// Draws the potential on `[-extent.0, extent.1]`.
    pub fn sample(kappa: f64, extent: (f64, f64), grid_step: f64, rng: &RngStream) -> Result<Self> {
        ensure(kappa.is_finite(), "kappa", "must be finite")?;
        ensure(grid_step > 0.0 && grid_step.is_finite(), "grid_step", "must be finite and > 0")?;
        ensure(extent.0 >= 0.0 && extent.1 >= 0.0, "extent", "must be nonnegative")?;
        let mut env = Environment {
            kappa,
            grid_step,
            right: alloc::vec![0.0],
            left: alloc::vec![0.0],
            gen: Some((rng.derive(1), rng.derive(2))),
        };
        env.extend_to(-((extent.0 / grid_step).ceil() as i64))?;
        env.extend_to((extent.1 / grid_step).ceil() as i64)?;
        Ok(env)
    }

    /// A fixed potential from its grid values, `left[0] = right[0] = 0` being
    /// `W(0)`. It cannot be extended.
    pub fn from_values(kappa: f64, grid_step: f64, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        ensure(grid_step > 0.0, "grid_step", "must be > 0")?;
        ensure(
            !left.is_empty() && !right.is_empty() && left[0] == 0.0 && right[0] == 0.0,
            "values",
            "both halves must start with W(0) = 0",
        )?;
        ensure(left.iter().chain(&right).all(|w| w.is_finite()), "values", "must be finite")?;
        Ok(Environment { kappa, grid_step, right, left, gen: None })
    }

    /// Builds a fixed potential from ascending `(x, W)` nodes on a uniform grid
    /// containing 0, the inverse of [`Environment::nodes`].
    pub fn from_nodes(kappa: f64, xs: &[f64], ws: &[f64]) -> Result<Self> {
        ensure(xs.len() == ws.len() && xs.len() >= 2, "nodes", "need matching x and W columns")?;
        // the span spreads the rounding of the written abscissae over every cell
        let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        ensure(h > 0.0, "nodes", "x must increase")?;
        for (k, &x) in xs.iter().enumerate() {
            let expect = xs[0] + k as f64 * h;
            ensure((x - expect).abs() <= 1e-9 * h.max(x.abs()), "nodes", "x must be uniform")?;
        }
        let zero = xs.iter().position(|&x| x.abs() <= 1e-9 * h).ok_or_else(|| param("nodes", "grid must contain 0"))?;
        let right = ws[zero..].to_vec();
        let mut left: Vec<f64> = ws[..=zero].to_vec();
        left.reverse();
        ensure(right[0] == 0.0, "nodes", "W(0) must be 0")?;
        Environment::from_values(kappa, h, left, right)
    }

    pub fn extent(&self) -> (f64, f64) {
        (
            -((self.left.len() - 1) as f64) * self.grid_step,
            (self.right.len() - 1) as f64 * self.grid_step,
        )
    }

    /// Index range `[lo, hi]` of the drawn nodes.
    pub fn index_range(&self) -> (i64, i64) {
        (-((self.left.len() - 1) as i64), (self.right.len() - 1) as i64)
    }

    /// `W(j h)` if drawn.
    #[inline]
    pub fn w(&self, j: i64) -> Option<f64> {
        if j >= 0 {
            self.right.get(j as usize).copied()
        } else {
            self.left.get((-j) as usize).copied()
        }
    }

    /// Makes sure node `j` is drawn, extending by whole blocks.
    pub fn extend_to(&mut self, j: i64) -> Result<()> {
        let (lo, hi) = self.index_range();
        if j >= lo && j <= hi {
            return Ok(());
        }
        let Some((gr, gl)) = self.gen.as_mut() else {
            return Err(Error::Horizon(alloc::format!(
                "fixed environment covers nodes {lo}..={hi}, node {j} requested"
            )));
        };
        let h = self.grid_step;
        let (mean, sd) = (-0.5 * self.kappa * h, h.sqrt());
        if j > hi {
            let want = (j as usize + 1).div_ceil(BLOCK) * BLOCK;
            while self.right.len() < want {
                let last = *self.right.last().unwrap();
                self.right.push(last + mean + sd * draw_gaussian(gr));
            }
        } else {
            let want = ((-j) as usize + 1).div_ceil(BLOCK) * BLOCK;
            while self.left.len() < want {
                let last = *self.left.last().unwrap();
                self.left.push(last - mean - sd * draw_gaussian(gl));
            }
        }
        Ok(())
    }

    /// Ascending grid `(x, W(x))` over the drawn extent.
    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.index_range();
        let xs = (lo..=hi).map(|j| j as f64 * self.grid_step).collect();
        let ws = (lo..=hi).map(|j| self.w(j).unwrap()).collect();
        (xs, ws)
    }
}

pub fn sample_environment(kappa: f64, extent: (f64, f64), grid_step: f64, rng: &RngStream) -> Result<Environment> {
    Environment::sample(kappa, extent, grid_step, rng)
}

/// `(e^z - 1) / z`, 1 at 0.
#[inline]
fn exprel(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 + 0.5 * z
    } else {
        z.exp_m1() / z
    }
}

/// `int` of `e^W` over the cell `[j h, (j+1) h]`.
#[inline]
fn cell_exp(w0: f64, w1: f64, h: f64) -> f64 {
    h * w0.exp() * exprel(w1 - w0)
}

/// Scale function `S(x) = int_0^x e^W` and `Sigma(x) = int_0^x e^-W`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalePair {
    pub s: GridFunction,
    pub sigma: GridFunction,
}

/// Cumulative integrals of `e^W` and `e^-W` over the drawn extent, exact for
/// the piecewise-linear potential.
///
/// Each function is cut at the first node, from 0 outwards, where its
/// increment no longer changes the accumulated value in floating point, so
/// both stay strictly increasing.
pub fn build_scales(env: &Environment) -> Result<ScalePair> {
    let s = cumulative(env, 1.0)?;
    let sigma = cumulative(env, -1.0)?;
    Ok(ScalePair { s, sigma })
}

fn cumulative(env: &Environment, sign: f64) -> Result<GridFunction> {
    let h = env.grid_step;
    let (lo, hi) = env.index_range();
    let w = |j: i64| sign * env.w(j).unwrap();
    let mut right_x = alloc::vec![0.0];
    let mut right_y = alloc::vec![0.0];
    let mut acc = 0.0;
    for j in 0..hi {
        let next = acc + cell_exp(w(j), w(j + 1), h);
        if !(next > acc) || !next.is_finite() {
            break;
        }
        acc = next;
        right_x.push((j + 1) as f64 * h);
        right_y.push(acc);
    }
    let mut left_x = Vec::new();
    let mut left_y = Vec::new();
    let mut acc = 0.0;
    for j in (lo + 1..=0).rev() {
        let next = acc - cell_exp(w(j - 1), w(j), h);
        if !(next < acc) || !next.is_finite() {
            break;
        }
        acc = next;
        left_x.push((j - 1) as f64 * h);
        left_y.push(acc);
    }
    left_x.reverse();
    left_y.reverse();
    left_x.extend(right_x);
    left_y.extend(right_y);
    GridFunction::new(left_x, left_y)
}

/// `S(infinity) = int_0^inf e^W` for `kappa > 1`, extending the potential
/// until the expected remainder `e^W(x) * 2 / (kappa - 1)` is below
/// `rel_tol` times the running value.
pub fn s_infinity(env: &mut Environment, rel_tol: f64, max_x: f64) -> Result<f64> {
    ensure(env.kappa > 1.0, "kappa", "S(infinity) is finite only for kappa > 1")?;
    let h = env.grid_step;
    let tail = 2.0 / (env.kappa - 1.0);
    let mut acc = 0.0;
    let mut j = 0i64;
    loop {
        env.extend_to(j + 1)?;
        let (w0, w1) = (env.w(j).unwrap(), env.w(j + 1).unwrap());
        acc += cell_exp(w0, w1, h);
        j += 1;
        if w1.exp() * tail < rel_tol * acc {
            return Ok(acc);
        }
        if j as f64 * h > max_x {
            return Err(Error::Horizon(alloc::format!("S(infinity) not settled by x = {max_x}")));
        }
    }
}

/// `log Sigma(r)` by log-sum-exp over cells.
pub fn log_sigma(env: &mut Environment, r: f64) -> Result<f64> {
    ensure(r > 0.0, "r", "must be > 0")?;
    let h = env.grid_step;
    let n = (r / h).round() as i64;
    env.extend_to(n)?;
    let mut log_acc = f64::NEG_INFINITY;
    for j in 0..n {
        let (w0, w1) = (env.w(j).unwrap(), env.w(j + 1).unwrap());
        let lc = h.ln() - w0 + exprel(w0 - w1).ln();
        log_acc = if log_acc == f64::NEG_INFINITY {
            lc
        } else {
            let m = log_acc.max(lc);
            m + ((log_acc - m).exp() + (lc - m).exp()).ln()
        };
    }
    Ok(log_acc)
}

/// Conditional mean clock of one skeleton step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct NodeStep {
    p_right: f64,
    /// Mean time spent in the (left, right) cell given exit to the right.
    to_right: (f64, f64),
    /// Same given exit to the left.
    to_left: (f64, f64),
}

// 8-point Gauss-Legendre on [0, 1]
const GL_X: [f64; 8] = [
    0.019_855_071_751_231_856,
    0.101_666_761_293_186_63,
    0.237_233_795_041_835_5,
    0.408_282_678_752_175_1,
    0.591_717_321_247_824_9,
    0.762_766_204_958_164_5,
    0.898_333_238_706_813_4,
    0.980_144_928_248_768_2,
];
const GL_W: [f64; 8] = [
    0.050_614_268_145_188_13,
    0.111_190_517_226_687_24,
    0.156_853_322_938_943_64,
    0.181_341_891_689_180_99,
    0.181_341_891_689_180_99,
    0.156_853_322_938_943_64,
    0.111_190_517_226_687_24,
    0.050_614_268_145_188_13,
];

/// Green-function means for node `j` with `dl = W_j - W_{j-1}` and
/// `dr = W_{j+1} - W_j`, everything relative to `W_j`.
///
/// With `s_l(v)` the scale increment from `x_{j-1}` and `s_r(v)` the one from
/// `x_j`, the killed Green function times the speed density `2 e^-W` gives
/// the mean occupation of each cell; conditioning on the exit side is the
/// Doob transform by the corresponding harmonic function.
fn node_step(dl: f64, dr: f64, h: f64) -> NodeStep {
    let a = h * (-dl).exp() * exprel(dl);
    let b = h * exprel(dr);
    let ab = a + b;
    let (mut l_r, mut l_l, mut r_r, mut r_l) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..8 {
        let v = GL_X[k] * h;
        let wt = GL_W[k] * h;
        // left cell, y = x_{j-1} + v
        let sl = (-dl).exp() * v * exprel(dl * v / h);
        let el = (dl * (1.0 - v / h)).exp();
        l_r += wt * sl * sl * el;
        l_l += wt * sl * (ab - sl) * el;
        // right cell, y = x_j + v
        let sr = v * exprel(dr * v / h);
        let er = (-dr * v / h).exp();
        r_r += wt * (b - sr) * (a + sr) * er;
        r_l += wt * (b - sr) * (b - sr) * er;
    }
    NodeStep {
        p_right: a / ab,
        to_right: (2.0 * b / (ab * a) * l_r, 2.0 / ab * r_r),
        to_left: (2.0 / ab * l_l, 2.0 * a / (ab * b) * r_l),
    }
}

/// Position and clocks of one run of `X` in a fixed environment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HittingDecomposition {
    pub h: f64,
    /// Time spent on the negative half-line.
    pub i1: f64,
    /// Time spent on the positive half-line.
    pub i2: f64,
}

/// The skeleton walk of `X` in an environment it may extend.
pub struct Walker<'e> {
    env: &'e mut Environment,
    right: Vec<NodeStep>,
    left: Vec<NodeStep>,
    node: i64,
    clock: HittingDecomposition,
    pending: Option<(i64, f64, f64)>,
}

impl<'e> Walker<'e> {
    pub fn new(env: &'e mut Environment) -> Self {
        Walker { env, right: Vec::new(), left: Vec::new(), node: 0, clock: HittingDecomposition::default(), pending: None }
    }

    pub fn position(&self) -> f64 {
        self.node as f64 * self.env.grid_step
    }

    pub fn node(&self) -> i64 {
        self.node
    }

    pub fn clock(&self) -> HittingDecomposition {
        self.clock
    }

    pub fn environment(&self) -> &Environment {
        self.env
    }

    fn record(&mut self, j: i64) -> Result<NodeStep> {
        let (table, idx) = if j >= 0 { (&self.right, j as usize) } else { (&self.left, (-j - 1) as usize) };
        if let Some(r) = table.get(idx) {
            return Ok(*r);
        }
        self.env.extend_to(j - 1)?;
        self.env.extend_to(j + 1)?;
        let h = self.env.grid_step;
        let (lo, hi) = self.env.index_range();
        if j >= 0 {
            let top = hi - 1;
            for k in self.right.len() as i64..=top {
                let w = |i: i64| self.env.w(i).unwrap();
                self.right.push(node_step(w(k) - w(k - 1), w(k + 1) - w(k), h));
            }
            Ok(self.right[idx])
        } else {
            let bottom = lo + 1;
            for k in (bottom..=-(self.left.len() as i64) - 1).rev() {
                let w = |i: i64| self.env.w(i).unwrap();
                self.left.push(node_step(w(k) - w(k - 1), w(k + 1) - w(k), h));
            }
            Ok(self.left[idx])
        }
    }

    fn draw(&mut self, rng: &mut RngStream) -> Result<(i64, f64, f64)> {
        if let Some(p) = self.pending.take() {
            return Ok(p);
        }
        let j = self.node;
        let rec = self.record(j)?;
        let (next, (tl, tr)) =
            if rng.uniform() < rec.p_right { (j + 1, rec.to_right) } else { (j - 1, rec.to_left) };
        // cell (j-1, j) is negative iff j <= 0, cell (j, j+1) iff j <= -1
        let neg = if j <= -1 { tl + tr } else if j == 0 { tl } else { 0.0 };
        Ok((next, tl + tr, neg))
    }

    #[inline]
    fn commit(&mut self, (next, tau, neg): (i64, f64, f64)) {
        self.node = next;
        self.clock.h += tau;
        self.clock.i1 += neg;
        self.clock.i2 += tau - neg;
    }

    /// Takes one skeleton step.
    pub fn step(&mut self, rng: &mut RngStream) -> Result<()> {
        let s = self.draw(rng)?;
        self.commit(s);
        Ok(())
    }

    /// Walks until the node index reaches `target`; returns the clocks.
    pub fn run_to_node(&mut self, target: i64, rng: &mut RngStream) -> Result<HittingDecomposition> {
        while self.node < target {
            self.step(rng)?;
        }
        Ok(self.clock)
    }

    /// Walks until the clock would pass `t` and returns the position at `t`.
    /// A step that straddles `t` is kept for the next call.
    pub fn run_to_time(&mut self, t: f64, rng: &mut RngStream) -> Result<f64> {
        loop {
            let s = self.draw(rng)?;
            if self.clock.h + s.1 > t {
                self.pending = Some(s);
                return Ok(self.position());
            }
            self.commit(s);
        }
    }
}

/// Hitting time `H(r) = inf{t : X(t) > r}` split as `I1 + I2`.
pub fn hitting_time(env: &mut Environment, r: f64, rng: &mut RngStream) -> Result<HittingDecomposition> {
    ensure(r > 0.0, "r", "must be > 0")?;
    let target = (r / env.grid_step - 1e-9).ceil() as i64;
    Walker::new(env).run_to_node(target, rng)
}

/// `X` on the output grid `k dt_out`, `k dt_out <= t_max`.
pub fn simulate_x(env: &mut Environment, t_max: f64, dt_out: f64, rng: &mut RngStream) -> Result<ProcessPath> {
    ensure(t_max >= 0.0 && dt_out > 0.0, "t_max", "needs t_max >= 0 and dt_out > 0")?;
    let m = (t_max / dt_out + 1e-9).floor() as usize;
    let mut w = Walker::new(env);
    let mut values = Vec::with_capacity(m + 1);
    values.push(0.0);
    for k in 1..=m {
        values.push(w.run_to_time(k as f64 * dt_out, rng)?);
    }
    Ok(ProcessPath::new(0.0, dt_out, values))
}

/// Settings shared by the environment experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionConfig {
    pub grid_step: f64,
    /// Initial extent `(left, right)`; the walk extends it on demand.
    pub extent: (f64, f64),
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig { grid_step: 0.02, extent: (10.0, 10.0) }
    }
}

fn replica_env(kappa: f64, cfg: DiffusionConfig, seed: u64, fam: u32, i: usize) -> Result<(Environment, RngStream)> {
    let base = RngStream::replica(seed, fam, i as u64);
    let env = Environment::sample(kappa, cfg.extent, cfg.grid_step, &base.derive(0x10))?;
    Ok((env, base.derive(0x20)))
}

/// The almost-sure speed `(kappa - 1)^+ / 4`.
pub fn speed(kappa: f64) -> f64 {
    (kappa - 1.0).max(0.0) / 4.0
}

/// Draws of `X(t) / t`, one environment per replica.
pub fn speed_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    t: f64,
    n: usize,
    cfg: DiffusionConfig,
) -> Result<Vec<f64>> {
    ensure(t > 0.0, "t", "must be > 0")?;
    rep.map(n, |i| {
        let (mut env, mut rng) = replica_env(kappa, cfg, seed, family::SPEED, i)?;
        Ok(Walker::new(&mut env).run_to_time(t, &mut rng)? / t)
    })
    .into_iter()
    .collect()
}

/// Hitting decompositions at every `r` of an increasing grid, one environment
/// and one walk per replica.
pub fn hitting_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    fam: u32,
    kappa: f64,
    r_grid: &[f64],
    n: usize,
    cfg: DiffusionConfig,
) -> Result<Vec<Vec<HittingDecomposition>>> {
    ensure(
        !r_grid.is_empty() && r_grid[0] > 0.0 && r_grid.windows(2).all(|w| w[0] < w[1]),
        "r_grid",
        "must be positive and strictly increasing",
    )?;
    rep.map(n, |i| {
        let (mut env, mut rng) = replica_env(kappa, cfg, seed, fam, i)?;
        let h = env.grid_step;
        let mut w = Walker::new(&mut env);
        r_grid
            .iter()
            .map(|&r| w.run_to_node((r / h - 1e-9).ceil() as i64, &mut rng))
            .collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect()
}

/// `r -> P(H(r) > u r)`, one walk per replica serving every `r`.
pub fn tail_h<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    u: f64,
    r_grid: &[f64],
    n: usize,
    cfg: DiffusionConfig,
) -> Result<TailCurve> {
    ensure(kappa > 1.0, "kappa", "must be > 1")?;
    ensure(u > 4.0 / (kappa - 1.0), "u", "must exceed 4 / (kappa - 1)")?;
    tail_h_unchecked(rep, seed, kappa, u, r_grid, n, cfg)
}

/// [`tail_h`] without the large-deviation condition on `u`, for the
/// law-of-large-numbers regime.
pub fn tail_h_unchecked<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    u: f64,
    r_grid: &[f64],
    n: usize,
    cfg: DiffusionConfig,
) -> Result<TailCurve> {
    ensure(n >= 1, "n", "must be >= 1")?;
    let rows = hitting_samples(rep, seed, family::TAIL_H, kappa, r_grid, n, cfg)?;
    let points = r_grid
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let hits = rows.iter().filter(|row| row[k].h > u * r).count() as u64;
            TailPoint::from_counts(r, n as u64, hits)
        })
        .collect();
    Ok(TailCurve { points })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StableLimitResult {
    pub ks: KsResult,
    /// Median of `H(r) / r` at the smaller `r`, to compare with `4 / (kappa - 1)`.
    pub median_ratio: f64,
    pub centering: f64,
}

/// Compares `(H(r) - 4 r / (kappa - 1)) / r^(1/kappa)` at `r` and `2 r`.
pub fn stable_limit_check<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    r: f64,
    n: usize,
    cfg: DiffusionConfig,
    threshold: f64,
) -> Result<StableLimitResult> {
    ensure(kappa > 1.0 && kappa < 2.0, "kappa", "must lie in (1, 2)")?;
    ensure(r > 0.0, "r", "must be > 0")?;
    let rows = hitting_samples(rep, seed, family::STABLE_LIMIT, kappa, &[r, 2.0 * r], n, cfg)?;
    let c = 4.0 / (kappa - 1.0);
    let norm = |h: f64, r: f64| (h - c * r) / r.powf(1.0 / kappa);
    let a: Vec<f64> = rows.iter().map(|row| norm(row[0].h, r)).collect();
    let b: Vec<f64> = rows.iter().map(|row| norm(row[1].h, 2.0 * r)).collect();
    let ratios: Vec<f64> = rows.iter().map(|row| row[0].h / r).collect();
    Ok(StableLimitResult { ks: ks_two_sample(&a, &b, threshold)?, median_ratio: quantile(&ratios, 0.5), centering: c })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaGrowthPoint {
    pub r: f64,
    /// Mean of `log Sigma(r) / r` over environments.
    pub ratio: MomentEstimate,
    /// Frequency of `|log Sigma(r) - kappa r / 2| > deviation * r`.
    pub deviation_freq: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaGrowth {
    pub points: Vec<SigmaGrowthPoint>,
    /// Least-squares slope of the mean of `log Sigma(r)` against `r`.
    pub slope: f64,
}

pub fn sigma_growth_check<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    r_grid: &[f64],
    n: usize,
    deviation: f64,
    grid_step: f64,
) -> Result<SigmaGrowth> {
    ensure(kappa > 1.0, "kappa", "must be > 1")?;
    ensure(r_grid.len() >= 2 && r_grid.iter().all(|&r| r > 0.0), "r_grid", "needs two positive points")?;
    let rows: Vec<Vec<f64>> = rep
        .map(n, |i| {
            let base = RngStream::replica(seed, family::SIGMA_GROWTH, i as u64);
            let r_max = r_grid.iter().cloned().fold(0.0, f64::max);
            let mut env = Environment::sample(kappa, (0.0, r_max), grid_step, &base)?;
            r_grid.iter().map(|&r| log_sigma(&mut env, r)).collect::<Result<Vec<f64>>>()
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    let mut means = Vec::new();
    for (k, &r) in r_grid.iter().enumerate() {
        let vals: Vec<f64> = rows.iter().map(|row| row[k] / r).collect();
        let dev = rows.iter().filter(|row| (row[k] - 0.5 * kappa * r).abs() > deviation * r).count();
        means.push(rows.iter().map(|row| row[k]).sum::<f64>() / n as f64);
        points.push(SigmaGrowthPoint {
            r,
            ratio: MomentEstimate::from_values(&vals),
            deviation_freq: dev as f64 / n as f64,
        });
    }
    let m = r_grid.len() as f64;
    let rm = r_grid.iter().sum::<f64>() / m;
    let ym = means.iter().sum::<f64>() / m;
    let sxy: f64 = r_grid.iter().zip(&means).map(|(r, y)| (r - rm) * (y - ym)).sum();
    let sxx: f64 = r_grid.iter().map(|r| (r - rm) * (r - rm)).sum();
    Ok(SigmaGrowth { points, slope: sxy / sxx })
}

/// `S(infinity)` over independent environments.
pub fn s_infinity_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    n: usize,
    grid_step: f64,
) -> Result<Vec<f64>> {
    rep.map(n, |i| {
        let base = RngStream::replica(seed, family::S_INFINITY, i as u64);
        let mut env = Environment::sample(kappa, (0.0, 10.0), grid_step, &base)?;
        s_infinity(&mut env, 1e-10, 1e6)
    })
    .into_iter()
    .collect()
}

/// `H(r)` rebuilt from local-time fields in a given environment:
///
/// ```text
/// S(r) xi int_{-inf}^0 e^-W(y) Z(|S(y)| / (S(r) xi)) dy
///   + S(r) int_0^r e^-W(y) R1^2(1 - S(y)/S(r)) dy
/// ```
///
/// with `xi` exponential of mean 2, `Z = BESQ(0)` from 1 and `R1^2 = BESQ(2)`
/// from 0, all independent.
pub fn hitting_time_from_fields(env: &mut Environment, r: f64, rng: &mut RngStream) -> Result<f64> {
    ensure(r > 0.0, "r", "must be > 0")?;
    let h = env.grid_step;
    let n = (r / h - 1e-9).ceil() as i64;
    env.extend_to(n)?;
    let w = |env: &Environment, j: i64| env.w(j).unwrap();
    // S at the nodes 0..=n
    let mut s = Vec::with_capacity(n as usize + 1);
    s.push(0.0);
    for j in 0..n {
        let last = *s.last().unwrap();
        s.push(last + cell_exp(w(env, j), w(env, j + 1), h));
    }
    let sr = s[n as usize];
    let xi = 2.0 * draw_exp1(rng);
    // negative half-line: Z in the time variable |S(y)| / (S(r) xi)
    let mut first = 0.0;
    let (mut z, mut tz) = (1.0, 0.0);
    let mut f0 = 1.0; // e^-W(0) Z(0)
    let mut s_neg = 0.0;
    let mut j = 0i64;
    while z > 0.0 {
        env.extend_to(j - 1)?;
        let (w1, w0) = (w(env, j), w(env, j - 1));
        s_neg += cell_exp(w0, w1, h);
        let t1 = s_neg / (sr * xi);
        z = besq_step_unchecked(z, 0.0, t1 - tz, rng);
        tz = t1;
        let f1 = (-w0).exp() * z;
        first += 0.5 * (f0 + f1) * h;
        f0 = f1;
        j -= 1;
    }
    // positive half-line: R1^2 in the time variable 1 - S(y)/S(r), run from y = r
    let mut second = 0.0;
    let (mut x, mut tx) = (0.0, 0.0);
    let mut g0 = 0.0;
    for k in (0..n).rev() {
        let t1 = 1.0 - s[k as usize] / sr;
        x = besq_step_unchecked(x, 2.0, t1 - tx, rng);
        tx = t1;
        let g1 = (-w(env, k)).exp() * x;
        second += 0.5 * (g0 + g1) * h;
        g0 = g1;
    }
    Ok(sr * xi * first + sr * second)
}

/// Annealed law of `H(r)` from the walk against the local-time-field
/// construction, by two-sample KS.
pub fn i1_law_check<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    r: f64,
    n: usize,
    cfg: DiffusionConfig,
    threshold: f64,
) -> Result<KsResult> {
    let direct: Vec<f64> = hitting_samples(rep, seed, family::I1_LAW_DIRECT, kappa, &[r], n, cfg)?
        .into_iter()
        .map(|row| row[0].h)
        .collect();
    let fields: Vec<f64> = rep
        .map(n, |i| {
            let (mut env, mut rng) = replica_env(kappa, cfg, seed, family::I1_LAW_FIELDS, i)?;
            hitting_time_from_fields(&mut env, r, &mut rng)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    ks_two_sample(&direct, &fields, threshold)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityResult {
    /// Estimate of `P(X(t) < v t)`.
    pub p_position: TailPoint,
    /// Estimate of `P(H(v t) > t)` on the same runs.
    pub p_hitting: TailPoint,
    /// Difference in units of the combined standard error.
    pub z: f64,
}

/// Both sides of `{X(t) < v t}` versus `{H(v t) > t}` on shared runs.
pub fn duality_check<R: Replicator>(
    rep: &R,
    seed: u64,
    kappa: f64,
    v: f64,
    t: f64,
    n: usize,
    cfg: DiffusionConfig,
) -> Result<DualityResult> {
    ensure(v > 0.0 && t > 0.0, "v", "needs v > 0 and t > 0")?;
    let rows: Vec<(bool, bool)> = rep
        .map(n, |i| {
            let (mut env, mut rng) = replica_env(kappa, cfg, seed, family::DUALITY, i)?;
            let target = (v * t / cfg.grid_step - 1e-9).ceil() as i64;
            let mut w = Walker::new(&mut env);
            let mut reached = None;
            loop {
                let s = w.draw(&mut rng)?;
                if w.clock.h + s.1 > t {
                    w.pending = Some(s);
                    break;
                }
                w.commit(s);
                if reached.is_none() && w.node >= target {
                    reached = Some(w.clock.h);
                }
            }
            Ok((w.position() < v * t, reached.is_none()))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let n64 = n as u64;
    let a = rows.iter().filter(|r| r.0).count() as u64;
    let b = rows.iter().filter(|r| r.1).count() as u64;
    let pa = TailPoint::from_counts(t, n64, a);
    let pb = TailPoint::from_counts(t, n64, b);
    let se = (pa.stderr * pa.stderr + pb.stderr * pb.stderr).sqrt();
    Ok(DualityResult { p_position: pa, p_hitting: pb, z: (pa.p_hat - pb.p_hat) / se })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_environment_scales_are_identity() {
        let env = Environment::from_values(1.0, 0.1, alloc::vec![0.0; 11], alloc::vec![0.0; 11]).unwrap();
        let sp = build_scales(&env).unwrap();
        for x in [-1.0, -0.35, 0.0, 0.5, 1.0] {
            assert!((sp.s.eval(x).unwrap() - x).abs() < 1e-12);
            assert!((sp.sigma.eval(x).unwrap() - x).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_step_is_brownian() {
        let st = node_step(0.0, 0.0, 0.1);
        assert!((st.p_right - 0.5).abs() < 1e-15);
        let total = st.to_right.0 + st.to_right.1;
        assert!((total - 0.01).abs() < 1e-14);
        assert!((st.to_left.0 + st.to_left.1 - 0.01).abs() < 1e-14);
        // given exit right, more time is spent in the right cell
        assert!(st.to_right.1 > st.to_right.0);
    }

    #[test]
    fn conditional_means_average_to_the_green_function() {
        let (dl, dr, h): (f64, f64, f64) = (0.3, -0.2, 0.05);
        let st = node_step(dl, dr, h);
        let p = st.p_right;
        let mean = p * (st.to_right.0 + st.to_right.1) + (1.0 - p) * (st.to_left.0 + st.to_left.1);
        // direct: E tau = int G(x_j, y) 2 e^-W(y) dy on a fine grid
        let a = h * (-dl).exp() * exprel(dl);
        let b = h * exprel(dr);
        let m = 200_000;
        let mut acc = 0.0;
        for k in 0..m {
            let v = (k as f64 + 0.5) / m as f64 * h;
            let sl = (-dl).exp() * v * exprel(dl * v / h);
            acc += 2.0 * sl * b / (a + b) * (dl * (1.0 - v / h)).exp() * h / m as f64;
            let sr = v * exprel(dr * v / h);
            acc += 2.0 * a * (b - sr) / (a + b) * (-dr * v / h).exp() * h / m as f64;
        }
        assert!((mean - acc).abs() < 1e-9 * acc);
    }

    #[test]
    fn lazy_extension_is_order_independent() {
        let rng = RngStream::new(5, 0);
        let mut a = Environment::sample(2.0, (1.0, 1.0), 0.01, &rng).unwrap();
        let mut b = Environment::sample(2.0, (1.0, 1.0), 0.01, &rng).unwrap();
        a.extend_to(5000).unwrap();
        a.extend_to(-5000).unwrap();
        b.extend_to(-5000).unwrap();
        b.extend_to(5000).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        assert_eq!(a.w(0), Some(0.0));
    }

    #[test]
    fn decomposition_adds_up() {
        let rng = RngStream::new(8, 0);
        let mut env = Environment::sample(2.0, (5.0, 5.0), 0.05, &rng).unwrap();
        let mut w = RngStream::new(8, 1);
        let d = hitting_time(&mut env, 3.0, &mut w).unwrap();
        assert!(d.i1 >= 0.0 && d.i2 > 0.0);
        assert!((d.i1 + d.i2 - d.h).abs() <= 1e-12 * d.h);
    }

    #[test]
    fn fixed_environment_refuses_to_grow() {
        let mut env = Environment::from_values(1.0, 0.1, alloc::vec![0.0; 3], alloc::vec![0.0; 3]).unwrap();
        assert!(env.extend_to(10).is_err());
    }
}
