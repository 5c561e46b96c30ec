//! Exact local-time fields at inverse local times.
//!
//! At `tau(l)` the field `x -> L^x_{tau(l)}`, `x >= 0`, is a BESQ(0) process in
//! the space variable started at `l`. Exact transitions give the field at any
//! finite set of levels; functionals are computed by product integration,
//! treating the field as linear between nodes and integrating the weight
//! exactly.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;


use crate::besq::besq_step_unchecked;
use crate::error::{ensure, Result};
use crate::rng::RngStream;

/// Exact draw of `{L^x_{tau(l)}}` on the uniform levels `0, step, ..., x_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactRKField {
    pub grid_step: f64,
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn sample_rk2_field(ell: f64, x_max: f64, grid_step: f64, rng: &mut RngStream) -> Result<ExactRKField> {
    ensure(ell > 0.0, "ell", "must be > 0")?;
    ensure(grid_step > 0.0 && x_max >= 0.0, "grid_step", "needs grid_step > 0 and x_max >= 0")?;
    let m = (x_max / grid_step).floor() as usize;
    let mut levels = Vec::with_capacity(m + 1);
    let mut values = Vec::with_capacity(m + 1);
    let mut z = ell;
    for k in 0..=m {
        if k > 0 {
            z = besq_step_unchecked(z, 0.0, grid_step, rng);
        }
        levels.push(k as f64 * grid_step);
        values.push(z);
    }
    Ok(ExactRKField { grid_step, levels, values })
}

/// Adaptive level grid for a field started at `l`.
///
/// The step is `rel_step * max(z, floor_frac * l)`, so it shrinks where the
/// field is small and grows with it; when `geometric_start` is set, steps near
/// 0 are also capped by `ratio * x`, starting with a first step `first`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldGrid {
    pub rel_step: f64,
    pub floor_frac: f64,
    pub geometric_start: Option<(f64, f64)>,
}

impl Default for FieldGrid {
    fn default() -> Self {
        FieldGrid { rel_step: 0.01, floor_frac: 0.01, geometric_start: None }
    }
}

impl FieldGrid {
    /// Grid with every step cap halved.
    pub fn refined(self) -> Self {
        FieldGrid {
            rel_step: 0.5 * self.rel_step,
            floor_frac: self.floor_frac,
            geometric_start: self.geometric_start.map(|(f, r)| (0.5 * f, 0.5 * r)),
        }
    }
}

/// Samples the field from `l` at 0 until absorption, writing `(x, z)` nodes
/// into `out`; the last node has `z = 0`.
pub fn sample_field_nodes(ell: f64, grid: FieldGrid, rng: &mut RngStream, out: &mut Vec<(f64, f64)>) {
    out.clear();
    let floor = grid.floor_frac * ell;
    let mut x = 0.0;
    let mut z = ell;
    out.push((x, z));
    while z > 0.0 {
        let mut h = grid.rel_step * z.max(floor);
        if let Some((first, ratio)) = grid.geometric_start {
            h = h.min(if x == 0.0 { first } else { (ratio * x).max(first) });
        }
        z = besq_step_unchecked(z, 0.0, h, rng);
        x += h;
        out.push((x, z));
    }
}

/// `int_a^b x^s dx` for `0 < a < b` (or `a = 0` with `s > -1`).
#[inline]
pub(crate) fn power_integral(s: f64, a: f64, b: f64) -> f64 {
    let e = s + 1.0;
    if a == 0.0 {
        return b.powf(e) / e;
    }
    let l = (b / a).ln();
    if e.abs() < 1e-12 {
        a.powf(e) * l
    } else {
        a.powf(e) * (e * l).exp_m1() / e
    }
}

/// `int_lo^hi x^s Z(x) dx` with `Z` linear between nodes and 0 after the last one.
pub fn power_weight_integral(nodes: &[(f64, f64)], s: f64, lo: f64, hi: f64) -> f64 {
    let mut acc = 0.0;
    for w in nodes.windows(2) {
        let ((x0, z0), (x1, z1)) = (w[0], w[1]);
        let a = x0.max(lo);
        let b = x1.min(hi);
        if !(a < b) {
            continue;
        }
        let m = (z1 - z0) / (x1 - x0);
        // Z = alpha + m x on the segment
        let alpha = z0 - m * x0;
        acc += alpha * power_integral(s, a, b) + m * power_integral(s + 1.0, a, b);
    }
    acc
}

/// `int_0^1 (Z(x) - 1)/x dx + int_1^inf Z(x)/x dx` for a field started at 1.
///
/// On the first segment `(Z - 1)/x` is the constant slope, so the integrand is
/// finite at 0.
pub fn cauchy_functional(nodes: &[(f64, f64)]) -> f64 {
    let mut acc = 0.0;
    for w in nodes.windows(2) {
        let ((x0, z0), (x1, z1)) = (w[0], w[1]);
        let m = (z1 - z0) / (x1 - x0);
        let alpha = z0 - m * x0;
        if x0 < 1.0 {
            let b = x1.min(1.0);
            if x0 == 0.0 {
                acc += m * b;
            } else {
                acc += (alpha - 1.0) * (b / x0).ln() + m * (b - x0);
            }
        }
        if x1 > 1.0 {
            let a = x0.max(1.0);
            acc += alpha * (x1 / a).ln() + m * (x1 - a);
        }
    }
    // after absorption Z = 0, so (Z - 1)/x still contributes up to 1
    let x_end = nodes.last().unwrap().0;
    if x_end < 1.0 {
        acc += x_end.ln();
    }
    acc
}

/// Every other node of `nodes`, keeping the final absorbed node.
pub fn coarsen(nodes: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = nodes.iter().step_by(2).copied().collect();
    let last = *nodes.last().unwrap();
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn field_starts_at_ell() {
        let mut rng = RngStream::new(2, 0);
        let f = sample_rk2_field(1.7, 5.0, 0.1, &mut rng).unwrap();
        assert_eq!(f.values[0], 1.7);
        let first_zero = f.values.iter().position(|&v| v == 0.0);
        if let Some(k) = first_zero {
            assert!(f.values[k..].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn product_integration_is_exact_for_linear_fields() {
        // Z(x) = 2 - x on [0, 2]
        let nodes = vec![(0.0, 2.0), (0.5, 1.5), (1.3, 0.7), (2.0, 0.0)];
        let area = power_weight_integral(&nodes, 0.0, 0.0, f64::INFINITY);
        assert!((area - 2.0).abs() < 1e-14);
        // int_1^2 (2 - x)/x dx = 2 ln 2 - 1
        let v = power_weight_integral(&nodes, -1.0, 1.0, 2.0);
        assert!((v - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn cauchy_functional_of_linear_field() {
        // Z = 1 - x/2 on [0, 2]: int_0^1 (-1/2) dx + int_1^2 (1/x - 1/2) dx = -1 + ln 2
        let nodes = vec![(0.0, 1.0), (0.4, 0.8), (1.6, 0.2), (2.0, 0.0)];
        assert!((cauchy_functional(&nodes) - (-1.0 + 2f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn cauchy_functional_counts_the_absorbed_stretch() {
        // Z = 1 - 4x on [0, 1/4], then 0: -4/4 + int_{1/4}^1 (-1/x) dx = -1 - ln 4
        let nodes = vec![(0.0, 1.0), (0.1, 0.6), (0.25, 0.0)];
        assert!((cauchy_functional(&nodes) - (-1.0 - 4f64.ln())).abs() < 1e-14);
    }
}
