//! The registered checks.
//!
//! Each check draws from its own replica streams, so running a subset of the
//! registry reproduces the same statistics as the full suite.

use std::collections::BTreeMap;

use rde_core::besq::{
    dufresne_cdf, lamperti_residual, lamperti_transform, perpetuity_samples, perpetuity_scale, s_infinity_samples,
    sup_law_estimate, AbsorptionConfig, PerpetuityConfig, SupConfig,
};
use rde_core::environment::{self as env, DiffusionConfig};
use rde_core::field::FieldGrid;
use rde_core::jacobi::{
    additivity_check, hypergeom_laplace_check, t_half_moment_series, t_half_samples, tail_upsilon, warren_yor_check,
    JacobiScheme, JacobiSpec, THalfConfig, UpsilonTailConfig,
};
use rde_core::localtime::{
    biane_yor_stable_check, cauchy_grid, cauchy_identity_check, getoor_sharpe_check, ray_knight_first_samples,
    GetoorSharpeEstimator, HittingLocalTimeConfig,
};
use rde_core::path::ProcessPath;
use rde_core::sampling::draw_gaussian;
use rde_core::special::ln_gamma;
use rde_core::stats::{fit_loglog_slope, ks_one_sample, KsResult, MomentEstimate, TailCurve};
use rde_core::sturm::sturm_mc_check;
use rde_core::RngStream;

use crate::config::{Command, RunConfig};
use crate::output::{FitRow, KsRow};
use crate::pool::Pool;
use crate::LabError;

/// Values handed to a check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub n: usize,
    pub kappa: f64,
    pub seed: u64,
}

/// What a check found.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub details: BTreeMap<String, f64>,
}

impl Outcome {
    fn new(statistic: f64, threshold: f64, pass: bool) -> Self {
        Outcome { statistic, threshold, pass, details: BTreeMap::new() }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }
}

/// Files the checks produce besides their report record.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub ks: Vec<KsRow>,
    /// `(file stem, curve)`.
    pub tails: Vec<(String, TailCurve)>,
    pub fits: Vec<FitRow>,
    /// `(file stem, column, values)`.
    pub samples: Vec<(String, String, Vec<f64>)>,
}

pub struct Ctx<'a> {
    pub pool: &'a Pool,
    pub cfg: &'a RunConfig,
    pub art: Artifacts,
}

impl Ctx<'_> {
    /// A named step size, overridable by `dt.<name>`.
    pub fn dt(&self, name: &str, default: f64) -> f64 {
        self.cfg.dt.get(name).copied().unwrap_or(default)
    }

    fn r_grid(&self, default: &[f64]) -> Vec<f64> {
        self.cfg.r_grid.clone().unwrap_or_else(|| default.to_vec())
    }

    fn ks(&mut self, check: &str, ks: KsResult) -> KsResult {
        self.art.ks.push(KsRow { check: check.to_string(), ks: ks.clone() });
        ks
    }
}

type RunFn = fn(&mut Ctx, Params) -> Result<Outcome, LabError>;

pub struct Check {
    pub name: &'static str,
    /// The identity or limit the check tests.
    pub anchor: &'static str,
    pub group: Command,
    pub default_n: usize,
    pub default_kappa: f64,
    /// Whether `kappa` may be overridden from the run configuration.
    pub kappa_free: bool,
    /// Step-size names the check reads through `dt.<name>`.
    pub steps: &'static [&'static str],
    run: RunFn,
}

impl Check {
    pub fn run(&self, ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
        (self.run)(ctx, p)
    }
}

macro_rules! check {
    ($name:expr, $anchor:expr, $group:ident, $n:expr, $kappa:expr, $free:expr, $steps:expr, $f:expr) => {
        Check {
            name: $name,
            anchor: $anchor,
            group: Command::$group,
            default_n: $n,
            default_kappa: $kappa,
            kappa_free: $free,
            steps: $steps,
            run: $f,
        }
    };
}

/// Every check, in report order.
pub fn registry() -> Vec<Check> {
    vec![
        check!("dufresne", "Dufresne: S(inf) from BESQ(2-2kappa) absorption is inverse Gamma(kappa, 2)", Verify, 50_000, 2.0, true, &["absorption"], dufresne),
        check!("getoor_sharpe", "Getoor-Sharpe: E exp(u L^z_tau(1)) = exp(u / (1 - 2uz))", Verify, 1_000_000, 2.0, false, &[], getoor_sharpe),
        check!("ray_knight", "Ray-Knight at sigma(1): L^0 is exponential with mean 2", Verify, 20_000, 2.0, false, &["ray_knight"], ray_knight),
        check!("biane_yor", "Biane-Yor: weighted local-time integral at tau(1) is a scaled 1/2-stable law", Verify, 100_000, 2.0, false, &[], biane_yor),
        check!("cauchy", "Cauchy identity: compensated local-time integral is affine asymmetric Cauchy", Verify, 100_000, 2.0, false, &[], cauchy),
        check!("warren_yor", "Warren-Yor: BESQ ratio at the additive clock is Jacobi(2, 2+2kappa)", Verify, 100_000, 2.0, false, &["warren_yor_besq", "jacobi"], warren_yor),
        check!("besq_additivity", "Shiga-Watanabe additivity of squared Bessel laws", Verify, 100_000, 2.0, false, &[], besq_additivity),
        check!("t_half_moment", "Mean first passage of Jacobi(2, 2+2kappa) at 1/2 against its series", Verify, 100_000, 2.0, false, &["t_half"], t_half_moment),
        check!("hypergeom_laplace", "Laplace transform of T_1/2 as 1 / F(a, b, 1, 1/2)", Verify, 100_000, 2.0, false, &["t_half"], hypergeom_laplace),
        check!("sup_law", "Supremum of BESQ(0) from 1: P(sup > u) = 1/u", Verify, 100_000, 2.0, false, &[], sup_law),
        check!("perpetuity", "Perpetuity int R^-b of Bessel(d) is a scaled Dufresne variable", Verify, 10_000, 2.0, false, &[], perpetuity),
        check!("lamperti", "Lamperti: exp(B + zeta t/2) is a time-changed squared Bessel process", Verify, 1, 2.0, false, &["lamperti"], lamperti),
        check!("s_infinity_env", "Dufresne mean of int_0^inf e^W over environments", Verify, 50_000, 2.0, true, &["env"], s_infinity_env),
        check!("sigma_growth", "Growth of log Sigma(r) at rate kappa/2", Verify, 1_000, 2.0, true, &["env"], sigma_growth),
        check!("hitting_speed", "Law of large numbers H(r)/r -> 4/(kappa-1)", Verify, 1_000, 2.0, true, &["env"], hitting_speed),
        check!("i1_law", "Hitting time rebuilt from BESQ(0) and BESQ(2) local-time fields", Verify, 10_000, 2.0, false, &["env"], i1_law),
        check!("stable_limit", "Stabilisation of (H(r) - 4r/(kappa-1)) / r^(1/kappa) between r and 2r", Verify, 5_000, 1.5, false, &["env_coarse"], stable_limit),
        check!("duality", "Duality of P(X(t) < vt) and P(H(vt) > t)", Verify, 2_000, 2.0, false, &["env"], duality),
        check!("upsilon_tail", "Tail exponent 1-kappa of the Jacobi occupation functional Upsilon", Tails, 100_000, 1.5, true, &["upsilon"], upsilon_tail),
        check!("upsilon_ratio", "Tail ratio p(2r)/p(r) = 1/2 of Upsilon at kappa = 2", Tails, 100_000, 2.0, false, &["upsilon"], upsilon_ratio),
        check!("h_tail", "Tail exponent 1-kappa of the hitting time H(r)", Tails, 10_000, 1.5, true, &["env"], h_tail),
        check!("speed", "Almost-sure speed (kappa-1)^+/4 of X", Speed, 200, 3.0, true, &["env"], speed),
        check!("speed_control", "Zero speed of X for kappa < 1", Speed, 200, 0.5, false, &["env"], speed_control),
        check!("sturm", "Sturm-Liouville Laplace transform exp(phi'(0+)/2) of a weighted local time", Sturm, 100_000, 2.0, false, &[], sturm),
    ]
}

fn ks_threshold_99(n1: usize, n2: usize) -> f64 {
    // 1.63 is the 1% point of the Kolmogorov distribution
    1.63 * ((n1 + n2) as f64 / (n1 as f64 * n2 as f64)).sqrt()
}

fn dufresne(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let cfg = AbsorptionConfig { dt: ctx.dt("absorption", 1e-3), ..AbsorptionConfig::default() };
    let s = s_infinity_samples(ctx.pool, p.seed, p.kappa, p.n, cfg)?;
    let ks = ctx.ks("dufresne", ks_one_sample(&s, |x| dufresne_cdf(x, p.kappa), 0.015)?);
    let m = MomentEstimate::from_values(&s);
    let target = 2.0 / (p.kappa - 1.0);
    let mean_err = m.relative_error(target);
    ctx.art.samples.push(("dufresne_samples".into(), "s_infinity".into(), s));
    Ok(Outcome::new(ks.statistic, 0.015, ks.verdict.passed() && mean_err < 0.02)
        .with("mean", m.mean)
        .with("mean_target", target)
        .with("mean_rel_error", mean_err))
}

fn getoor_sharpe(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let r = getoor_sharpe_check(ctx.pool, p.seed, 0.5, 0.5, p.n, GetoorSharpeEstimator::Conditional)?;
    Ok(Outcome::new(r.rel_error, 0.005, r.rel_error < 0.005)
        .with("mc", r.mc_estimate)
        .with("stderr", r.stderr)
        .with("closed_form", r.closed_form))
}

fn ray_knight(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let cfg = HittingLocalTimeConfig::standard(ctx.dt("ray_knight", 1e-4));
    let (l0, _) = ray_knight_first_samples(ctx.pool, p.seed, p.n, cfg)?;
    let ks = ctx.ks("ray_knight", ks_one_sample(&l0, |x| if x <= 0.0 { 0.0 } else { -(-0.5 * x).exp_m1() }, 0.03)?);
    let m = MomentEstimate::from_values(&l0);
    let err = m.relative_error(2.0);
    Ok(Outcome::new(ks.statistic, 0.03, ks.verdict.passed() && err < 0.03)
        .with("mean", m.mean)
        .with("mean_rel_error", err))
}

fn biane_yor(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let ks = biane_yor_stable_check(ctx.pool, p.seed, 0.5, 1.0, p.n, FieldGrid::default(), 0.02)?;
    let ks = ctx.ks("biane_yor", ks);
    Ok(Outcome::new(ks.statistic, 0.02, ks.verdict.passed()))
}

fn cauchy(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let ks = ctx.ks("cauchy", cauchy_identity_check(ctx.pool, p.seed, p.n.max(1000), cauchy_grid(), 0.03)?);
    Ok(Outcome::new(ks.statistic, 0.03, ks.verdict.passed()))
}

fn warren_yor(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let jac = JacobiSpec::new(2.0, 2.0 + 2.0 * p.kappa, 1e-3, ctx.dt("jacobi", 1e-3))?;
    let ks = warren_yor_check(ctx.pool, p.seed, p.kappa, 0.1, p.n, ctx.dt("warren_yor_besq", 1e-3), jac, 0.02)?;
    let ks = ctx.ks("warren_yor", ks);
    Ok(Outcome::new(ks.statistic, 0.02, ks.verdict.passed()))
}

fn besq_additivity(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let ks = ctx.ks("besq_additivity", additivity_check(ctx.pool, p.seed, (2.0, 1.0), (3.0, 0.5), 1.0, p.n, 0.02)?);
    Ok(Outcome::new(ks.statistic, 0.02, ks.verdict.passed()))
}

fn t_half_cfg(ctx: &Ctx) -> THalfConfig {
    let d = THalfConfig::default();
    THalfConfig { scheme: JacobiScheme { dt_max: ctx.dt("t_half", d.scheme.dt_max), ..d.scheme }, ..d }
}

fn t_half_moment(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let target = (5.0 + 2.0 * std::f64::consts::LN_2) / 12.0;
    let series = t_half_moment_series(p.kappa, 50)?;
    let series_err = (series.value - target).abs();
    let t = t_half_samples(ctx.pool, p.seed, p.kappa, p.n, t_half_cfg(ctx))?;
    let m = MomentEstimate::from_values(&t);
    let err = m.relative_error(target);
    Ok(Outcome::new(err, 0.02, err < 0.02 && series_err < 1e-6)
        .with("mean", m.mean)
        .with("stderr", m.stderr)
        .with("target", target)
        .with("series_50", series.value)
        .with("series_abs_error", series_err))
}

fn hypergeom_laplace(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let t = t_half_samples(ctx.pool, p.seed, p.kappa, p.n, t_half_cfg(ctx))?;
    let c = hypergeom_laplace_check(&t, p.kappa, 0.5)?;
    Ok(Outcome::new(c.rel_error, 0.01, c.rel_error < 0.01)
        .with("mc", c.mc.mean)
        .with("stderr", c.mc.stderr)
        .with("closed_form", c.closed_form))
}

fn sup_law(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let mut worst: f64 = 0.0;
    let mut out = Outcome::new(0.0, 0.05, true);
    for u in [2.0, 4.0, 8.0] {
        let m = sup_law_estimate(ctx.pool, p.seed, u, p.n, SupConfig::default())?;
        let err = m.relative_error(1.0 / u);
        worst = worst.max(err);
        out = out.with(&format!("p_u{u}"), m.mean).with(&format!("rel_error_u{u}"), err);
    }
    out.statistic = worst;
    out.pass = worst < 0.05;
    Ok(out)
}

fn perpetuity(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let (d, b) = (6.0, 4.0);
    let k = (d - 2.0) / (b - 2.0);
    let scale = perpetuity_scale(b);
    let v = perpetuity_samples(ctx.pool, p.seed, d, b, p.n, PerpetuityConfig::default())?;
    let ks = ctx.ks("perpetuity", ks_one_sample(&v, |x| dufresne_cdf(x / scale, k), 0.03)?);
    // X = scale * 2 / G with G ~ Gamma(k), so E X^q = (2 scale)^q Gamma(k - q) / Gamma(k) for q < k
    let q_lo = 0.5;
    let exact = (q_lo * (2.0 * scale).ln() + ln_gamma(k - q_lo) - ln_gamma(k)).exp();
    let m_lo = MomentEstimate::from_values(&v.iter().map(|x| x.powf(q_lo)).collect::<Vec<_>>());
    let lo_err = m_lo.relative_error(exact);
    // above the threshold the sample moment is carried by its largest term
    let q_hi = 3.0;
    let pw: Vec<f64> = v.iter().map(|x| x.powf(q_hi)).collect();
    let share = pw.iter().cloned().fold(0.0, f64::max) / pw.iter().sum::<f64>();
    let pass = ks.verdict.passed() && lo_err < 0.05 && share > 0.1;
    Ok(Outcome::new(ks.statistic, 0.03, pass)
        .with("index", k)
        .with("moment_q0.5_rel_error", lo_err)
        .with("max_share_q3", share))
}

fn lamperti(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let dt = ctx.dt("lamperti", 1e-3);
    let mut rng = RngStream::new(p.seed, 0x50 << 40);
    let mut b = vec![0.0];
    for _ in 0..10_000 {
        let last = *b.last().unwrap();
        b.push(last + dt.sqrt() * draw_gaussian(&mut rng));
    }
    let path = ProcessPath::new(0.0, dt, b);
    let r = lamperti_transform(&path, 1.0)?;
    let res = lamperti_residual(&path, 1.0, &r);
    let scale = r.values.iter().map(|v| v * v / 4.0).fold(1.0, f64::max);
    let rel = res / scale;
    Ok(Outcome::new(rel, 1e-12, rel < 1e-12))
}

fn diffusion_cfg(ctx: &Ctx, name: &str, default: f64) -> DiffusionConfig {
    DiffusionConfig { grid_step: ctx.dt(name, default), ..DiffusionConfig::default() }
}

fn s_infinity_env(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let s = env::s_infinity_samples(ctx.pool, p.seed, p.kappa, p.n, ctx.dt("env", 0.02))?;
    let m = MomentEstimate::from_values(&s);
    let target = 2.0 / (p.kappa - 1.0);
    let err = m.relative_error(target);
    Ok(Outcome::new(err, 0.02, err < 0.02).with("mean", m.mean).with("stderr", m.stderr))
}

fn sigma_growth(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let g = env::sigma_growth_check(ctx.pool, p.seed, p.kappa, &[25.0, 50.0, 100.0], p.n, 0.5, ctx.dt("env", 0.02))?;
    let last = g.points.last().unwrap();
    let err = last.ratio.relative_error(0.5 * p.kappa);
    Ok(Outcome::new(err, 0.05, err < 0.05 && last.deviation_freq < 1e-2)
        .with("mean_ratio_r100", last.ratio.mean)
        .with("deviation_freq_r100", last.deviation_freq)
        .with("slope", g.slope))
}

fn hitting_speed(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let r = 50.0;
    let rows = env::hitting_samples(ctx.pool, p.seed, env::family::HITTING, p.kappa, &[r], p.n, diffusion_cfg(ctx, "env", 0.02))?;
    let v: Vec<f64> = rows.iter().map(|x| x[0].h / r).collect();
    let worst_split = rows.iter().map(|x| ((x[0].i1 + x[0].i2) / x[0].h - 1.0).abs()).fold(0.0, f64::max);
    let m = MomentEstimate::from_values(&v);
    let err = m.relative_error(4.0 / (p.kappa - 1.0));
    Ok(Outcome::new(err, 0.1, err < 0.1 && worst_split < 1e-9)
        .with("mean", m.mean)
        .with("stderr", m.stderr)
        .with("max_split_error", worst_split))
}

fn i1_law(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let thr = ks_threshold_99(p.n, p.n);
    let ks = env::i1_law_check(ctx.pool, p.seed, p.kappa, 5.0, p.n, diffusion_cfg(ctx, "env", 0.02), thr)?;
    let ks = ctx.ks("i1_law", ks);
    Ok(Outcome::new(ks.statistic, thr, ks.verdict.passed()))
}

fn stable_limit(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let r = env::stable_limit_check(ctx.pool, p.seed, p.kappa, 200.0, p.n, diffusion_cfg(ctx, "env_coarse", 0.05), 0.05)?;
    let ks = ctx.ks("stable_limit", r.ks);
    Ok(Outcome::new(ks.statistic, 0.05, ks.verdict.passed())
        .with("median_ratio", r.median_ratio)
        .with("centering", r.centering))
}

fn duality(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let v = 0.5 * env::speed(p.kappa);
    let d = env::duality_check(ctx.pool, p.seed, p.kappa, v, 200.0, p.n, diffusion_cfg(ctx, "env", 0.02))?;
    Ok(Outcome::new(d.z.abs(), 2.0, d.z.abs() < 2.0)
        .with("p_position", d.p_position.p_hat)
        .with("p_hitting", d.p_hitting.p_hat))
}

fn upsilon_cfg(ctx: &Ctx) -> UpsilonTailConfig {
    let d = UpsilonTailConfig::default();
    UpsilonTailConfig { scheme: JacobiScheme { dt_max: ctx.dt("upsilon", d.scheme.dt_max), ..d.scheme }, ..d }
}

fn record_fit(ctx: &mut Ctx, check: &str, stem: &str, kappa: f64, curve: &TailCurve) -> Result<rde_core::stats::SlopeFit, LabError> {
    ctx.art.tails.push((stem.to_string(), curve.clone()));
    let fit = fit_loglog_slope(curve)?;
    ctx.art.fits.push(FitRow { check: check.to_string(), kappa, fit: fit.clone() });
    Ok(fit)
}

fn upsilon_tail(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let grid = ctx.r_grid(&[25.0, 50.0, 100.0, 200.0]);
    let u = if p.kappa == 1.5 { 7.0 } else { 2.0 * rde_core::jacobi::upsilon_speed(p.kappa) };
    let curve = tail_upsilon(ctx.pool, p.seed, p.kappa, u, &grid, p.n, upsilon_cfg(ctx))?;
    let fit = record_fit(ctx, "upsilon_tail", "tails", p.kappa, &curve)?;
    let dev = (fit.slope - (1.0 - p.kappa)).abs();
    Ok(Outcome::new(fit.slope, 1.0 - p.kappa, dev <= 0.35)
        .with("u", u)
        .with("slope_stderr", fit.slope_stderr)
        .with("abs_deviation", dev))
}

fn upsilon_ratio(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let grid = ctx.r_grid(&[25.0, 50.0, 100.0, 200.0]);
    let u = 4.0;
    let curve = tail_upsilon(ctx.pool, p.seed, p.kappa, u, &grid, p.n, upsilon_cfg(ctx))?;
    record_fit(ctx, "upsilon_ratio", "tails_upsilon_ratio", p.kappa, &curve)?;
    let k = curve.points.len();
    let (a, b) = (curve.points[k - 2], curve.points[k - 1]);
    if a.hits == 0 || b.hits == 0 {
        return Ok(Outcome::new(f64::NAN, 0.5, false).with("hits_r", a.hits as f64).with("hits_2r", b.hits as f64));
    }
    let ratio = b.p_hat / a.p_hat;
    let se = ratio * ((a.stderr / a.p_hat).powi(2) + (b.stderr / b.p_hat).powi(2)).sqrt();
    let z = (ratio - 0.5) / se;
    Ok(Outcome::new(ratio, 0.5, z.abs() <= 2.0)
        .with("ratio_stderr", se)
        .with("z", z)
        .with("r", a.r)
        .with("u", u))
}

fn h_tail(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let grid = ctx.r_grid(&[10.0, 20.0, 40.0]);
    let u = if p.kappa == 1.5 { 16.0 } else { 2.0 * 4.0 / (p.kappa - 1.0) };
    let curve = env::tail_h(ctx.pool, p.seed, p.kappa, u, &grid, p.n, diffusion_cfg(ctx, "env", 0.02))?;
    let fit = record_fit(ctx, "h_tail", "tails_h", p.kappa, &curve)?;
    let pass = (-1.0..=0.0).contains(&fit.slope) && curve.strictly_decreasing();
    Ok(Outcome::new(fit.slope, 1.0 - p.kappa, pass).with("u", u).with("slope_stderr", fit.slope_stderr))
}

fn speed(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let v = env::speed_samples(ctx.pool, p.seed, p.kappa, 1000.0, p.n, diffusion_cfg(ctx, "env", 0.02))?;
    let m = MomentEstimate::from_values(&v);
    let target = env::speed(p.kappa);
    let pass = if target > 0.0 { m.relative_error(target) <= 0.1 } else { m.mean.abs() < 0.02 };
    Ok(Outcome::new(m.mean, target, pass).with("stderr", m.stderr))
}

fn speed_control(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let v = env::speed_samples(ctx.pool, p.seed, p.kappa, 1000.0, p.n, diffusion_cfg(ctx, "env", 0.02))?;
    let m = MomentEstimate::from_values(&v);
    Ok(Outcome::new(m.mean, 0.02, m.mean.abs() < 0.02).with("stderr", m.stderr))
}

fn sturm(ctx: &mut Ctx, p: Params) -> Result<Outcome, LabError> {
    let c = sturm_mc_check(ctx.pool, p.seed, 0.1, 0.1, 0.5, 2.0, p.n, FieldGrid::default())?;
    Ok(Outcome::new(c.mc_rel_error, 0.02, c.mc_rel_error < 0.02 && c.cross_rel_error < 0.005)
        .with("phi_prime_ode", c.ode)
        .with("phi_prime_closed_form", c.closed_form)
        .with("cross_rel_error", c.cross_rel_error)
        .with("mc", c.mc.mean)
        .with("mc_stderr", c.mc.stderr))
}
