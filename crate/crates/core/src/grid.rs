//! Strictly increasing piecewise-linear maps with exact inverse evaluation.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::error::{domain, ensure, Result};

/// Piecewise-linear interpolant through strictly increasing knots `(x_i, y_i)`.
///
/// Both coordinates increase strictly, so the map is invertible. `eval` and
/// `inverse` return the stored node values exactly at nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GridFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        ensure(xs.len() == ys.len() && xs.len() >= 2, "knots", "need at least two (x, y) pairs")?;
        ensure(xs.windows(2).all(|w| w[0] < w[1]), "xs", "must be strictly increasing")?;
        ensure(ys.windows(2).all(|w| w[0] < w[1]), "ys", "must be strictly increasing")?;
        Ok(GridFunction { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.ys[0], *self.ys.last().unwrap())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        interp(&self.xs, &self.ys, x).ok_or_else(|| domain("GridFunction::eval", "x outside the grid"))
    }

    pub fn inverse(&self, y: f64) -> Result<f64> {
        interp(&self.ys, &self.xs, y).ok_or_else(|| domain("GridFunction::inverse", "y outside the range"))
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let n = xs.len();
    if !(x >= xs[0] && x <= xs[n - 1]) {
        return None;
    }
    // first index with xs[i] >= x
    let i = xs.partition_point(|&v| v < x);
    if xs[i] == x {
        return Some(ys[i]);
    }
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    Some(y0 + (y1 - y0) * ((x - x0) / (x1 - x0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn roundtrip_on_nodes_is_exact() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x: &f64| libm::exp(*x) - 1.0).collect();
        let g = GridFunction::new(xs.clone(), ys).unwrap();
        for &x in &xs {
            assert_eq!(g.inverse(g.eval(x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(GridFunction::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn outside_grid_is_an_error() {
        let g = GridFunction::new(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        assert!(g.eval(1.5).is_err());
        assert_eq!(g.eval(0.25).unwrap(), 0.5);
        assert_eq!(g.inverse(1.0).unwrap(), 0.5);
    }
}
