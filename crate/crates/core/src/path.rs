//! Sampled paths.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;


use crate::error::{ensure, Result};

/// Values of a process on the uniform grid `t0 + i dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessPath {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    /// First time the process reached its absorbing state, if it did.
    pub absorbed_at: Option<f64>,
}

impl ProcessPath {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Self {
        ProcessPath { t0, dt, values, absorbed_at: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.time(i))
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.values.len().saturating_sub(1))
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let s = (t - self.t0) / self.dt;
        if !(s >= 0.0) || s > (self.values.len() - 1) as f64 {
            return None;
        }
        let i = s.floor() as usize;
        if i + 1 >= self.values.len() {
            return Some(self.values[i]);
        }
        let f = s - i as f64;
        Some(self.values[i] + f * (self.values[i + 1] - self.values[i]))
    }
}

/// A process observed along a strictly increasing random clock.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockedPath {
    pub clock: Vec<f64>,
    pub values: Vec<f64>,
}

impl ClockedPath {
    pub fn new(clock: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        ensure(clock.len() == values.len() && !clock.is_empty(), "clock", "needs one value per clock time")?;
        ensure(clock.windows(2).all(|w| w[0] < w[1]), "clock", "must be strictly increasing")?;
        Ok(ClockedPath { clock, values })
    }

    /// Linear interpolation at clock time `u`; `None` outside the observed range.
    pub fn value_at(&self, u: f64) -> Option<f64> {
        let n = self.clock.len();
        if !(u >= self.clock[0] && u <= self.clock[n - 1]) {
            return None;
        }
        let i = self.clock.partition_point(|&c| c < u);
        if self.clock[i] == u {
            return Some(self.values[i]);
        }
        let (c0, c1) = (self.clock[i - 1], self.clock[i]);
        let f = (u - c0) / (c1 - c0);
        Some(self.values[i - 1] + f * (self.values[i] - self.values[i - 1]))
    }

    /// Resamples onto the uniform grid `clock[0] + k du` within the observed range.
    pub fn to_uniform(&self, du: f64) -> ProcessPath {
        let start = self.clock[0];
        let span = self.clock[self.clock.len() - 1] - start;
        let m = (span / du).floor() as usize;
        let values = (0..=m).map(|k| self.value_at(start + k as f64 * du).unwrap()).collect();
        ProcessPath::new(start, du, values)
    }
}
