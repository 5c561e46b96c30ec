//! Statistical verdicts: Kolmogorov-Smirnov distances, moment estimates,
//! empirical characteristic functions and weighted log-log slope fits.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::String;
use alloc::vec::Vec;


use crate::error::{Error, Result};

/// A batch of i.i.d. draws with the seed and generator that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalSample {
    pub values: Vec<f64>,
    pub seed: u64,
    pub generator: String,
}

impl EmpiricalSample {
    pub fn new(values: Vec<f64>, seed: u64, generator: impl Into<String>) -> Self {
        EmpiricalSample { values, seed, generator: generator.into() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> MomentEstimate {
        MomentEstimate::from_values(&self.values)
    }

    /// Sample median (mean of the two middle order statistics for even n).
    pub fn median(&self) -> f64 {
        quantile(&self.values, 0.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub n1: usize,
    /// Absent when the comparison is against a distribution function.
    pub n2: Option<usize>,
    pub pass_threshold: f64,
    pub verdict: Verdict,
}

impl KsResult {
    fn new(statistic: f64, n1: usize, n2: Option<usize>, pass_threshold: f64) -> Self {
        KsResult {
            statistic,
            n1,
            n2,
            pass_threshold,
            verdict: Verdict::from_bool(statistic < pass_threshold),
        }
    }
}

const KS_MIN_N: usize = 50;

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Insufficient("sample contains NaN".into()));
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(v)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64], pass_threshold: f64) -> Result<KsResult> {
    if a.len() < KS_MIN_N || b.len() < KS_MIN_N {
        return Err(Error::Insufficient(alloc::format!(
            "two-sample KS needs at least {KS_MIN_N} draws per side, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let x = sorted(a)?;
    let y = sorted(b)?;
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        // step through every tie at v on both sides before comparing
        while i < n && x[i] == v {
            i += 1;
        }
        while j < m && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    Ok(KsResult::new(d, n, Some(m), pass_threshold))
}

/// One-sample Kolmogorov-Smirnov distance against a continuous distribution function.
pub fn ks_one_sample<F: Fn(f64) -> f64>(a: &[f64], cdf: F, pass_threshold: f64) -> Result<KsResult> {
    if a.len() < KS_MIN_N {
        return Err(Error::Insufficient(alloc::format!(
            "KS needs at least {KS_MIN_N} draws, got {}",
            a.len()
        )));
    }
    let x = sorted(a)?;
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult::new(d, x.len(), None, pass_threshold))
}

/// Linear-interpolation quantile of an unsorted sample.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let v = sorted(values).expect("quantile of a NaN-free sample");
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MomentEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let nf = n as f64;
        // two-pass with Kahan-compensated sums; order is the input order
        let mean = kahan_sum(values.iter().copied()) / nf;
        let ss = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)));
        let var = if n > 1 { ss / (nf - 1.0) } else { 0.0 };
        MomentEstimate { mean, stderr: (var / nf).sqrt(), n }
    }

    pub fn relative_error(&self, target: f64) -> f64 {
        (self.mean / target - 1.0).abs()
    }

    /// Distance to `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.stderr
    }
}

pub fn kahan_sum<I: Iterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in it {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Empirical characteristic function `(mean cos(t X), mean sin(t X))`.
pub fn empirical_cf(values: &[f64], t: f64) -> (f64, f64) {
    let n = values.len() as f64;
    let re = kahan_sum(values.iter().map(|v| (t * v).cos())) / n;
    let im = kahan_sum(values.iter().map(|v| (t * v).sin())) / n;
    (re, im)
}

/// Sample Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let ma = MomentEstimate::from_values(a).mean;
    let mb = MomentEstimate::from_values(b).mean;
    let cov = kahan_sum(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)));
    let va = kahan_sum(a.iter().map(|x| (x - ma) * (x - ma)));
    let vb = kahan_sum(b.iter().map(|y| (y - mb) * (y - mb)));
    cov / (va * vb).sqrt()
}

/// One point of an exceedance curve `r -> P(event at r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailPoint {
    pub r: f64,
    pub n: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub stderr: f64,
}

impl TailPoint {
    /// Binomial estimate; the standard error uses `p` clamped to
    /// `[1/(2n), 1 - 1/(2n)]` so it stays positive at the extremes.
    pub fn from_counts(r: f64, n: u64, hits: u64) -> Self {
        let nf = n as f64;
        let p = hits as f64 / nf;
        let pc = p.clamp(0.5 / nf, 1.0 - 0.5 / nf);
        TailPoint { r, n, hits, p_hat: p, stderr: (pc * (1.0 - pc) / nf).sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailCurve {
    pub points: Vec<TailPoint>,
}

impl TailCurve {
    pub fn p_hats(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p_hat).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].p_hat < w[0].p_hat)
    }

    /// True when no later point exceeds an earlier one by more than `k`
    /// combined standard errors.
    pub fn decreasing_within(&self, k: f64) -> bool {
        self.points.windows(2).all(|w| {
            let se = (w[0].stderr * w[0].stderr + w[1].stderr * w[1].stderr).sqrt();
            w[1].p_hat <= w[0].p_hat + k * se
        })
    }
}

/// Weighted least-squares fit of `log p` against `log r`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

impl SlopeFit {
    /// Symmetric confidence band `slope +- z * stderr`.
    pub fn band(&self, z: f64) -> (f64, f64) {
        (self.slope - z * self.slope_stderr, self.slope + z * self.slope_stderr)
    }
}

/// Fits the log-log slope of a tail curve.
///
/// Points with `p_hat = 0` are dropped. The weight of a point is
/// `(p_hat / stderr)^2`, the delta-method inverse variance of `log p_hat`, and
/// the reported standard error is the model-based one.
pub fn fit_loglog_slope(curve: &TailCurve) -> Result<SlopeFit> {
    let usable: Vec<&TailPoint> = curve.points.iter().filter(|p| p.p_hat > 0.0).collect();
    if usable.len() < 3 {
        return Err(Error::Insufficient(alloc::format!(
            "slope fit needs at least 3 points with nonzero counts, got {}",
            usable.len()
        )));
    }
    let mut pts = Vec::with_capacity(usable.len());
    let mut w = Vec::with_capacity(usable.len());
    for p in &usable {
        if !(p.r > 0.0) || !(p.stderr > 0.0) {
            return Err(Error::Insufficient(alloc::format!(
                "point at r={} needs r > 0 and a positive standard error",
                p.r
            )));
        }
        pts.push((p.r.ln(), p.p_hat.ln()));
        w.push((p.p_hat / p.stderr).powi(2));
    }
    let sw: f64 = w.iter().sum();
    let mx = pts.iter().zip(&w).map(|(p, w)| w * p.0).sum::<f64>() / sw;
    let my = pts.iter().zip(&w).map(|(p, w)| w * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().zip(&w).map(|(p, w)| w * (p.0 - mx) * (p.0 - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Insufficient("slope fit needs at least two distinct r".into()));
    }
    let sxy: f64 = pts.iter().zip(&w).map(|(p, w)| w * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(SlopeFit {
        intercept: my - slope * mx,
        slope,
        slope_stderr: (1.0 / sxx).sqrt(),
        points: pts,
        weights: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn ks_identical_is_zero() {
        let a: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        assert_eq!(ks_two_sample(&a, &a, 0.1).unwrap().statistic, 0.0);
    }

    #[test]
    fn ks_rejects_tiny_samples() {
        assert!(ks_two_sample(&[1.0; 10], &[1.0; 100], 0.1).is_err());
    }

    #[test]
    fn ks_handles_ties() {
        let a = vec![1.0; 60];
        let mut b = vec![1.0; 30];
        b.extend(vec![2.0; 30]);
        assert!((ks_two_sample(&a, &b, 1.0).unwrap().statistic - 0.5).abs() < 1e-15);
    }

    #[test]
    fn slope_needs_three_points() {
        let c = TailCurve {
            points: vec![TailPoint::from_counts(1.0, 100, 10), TailPoint::from_counts(2.0, 100, 5)],
        };
        assert!(fit_loglog_slope(&c).is_err());
    }

    #[test]
    fn quantile_of_small_sample() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
    }
}
