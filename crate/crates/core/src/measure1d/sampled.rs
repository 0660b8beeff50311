use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A function tabulated on a measure's grid, with derivative samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: Arc<[f64]>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    /// `f'/f` when known in closed form; more accurate than the quotient in
    /// the tails of exponential families.
    pub log_derivs: Option<Vec<f64>>,
}

impl SampledFunction {
    pub fn new(grid: Arc<[f64]>, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() || derivs.len() != grid.len() {
            return Err(Error::Argument("sample arrays must match the grid".into()));
        }
        if values.iter().chain(&derivs).any(|v| !v.is_finite()) {
            return Err(Error::Argument("sampled function has non-finite entries".into()));
        }
        Ok(SampledFunction {
            grid,
            values,
            derivs,
            log_derivs: None,
        })
    }

    /// Derivatives from three-point differences on the (possibly uneven) grid.
    pub fn from_values(grid: Arc<[f64]>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() || grid.len() < 3 {
            return Err(Error::Argument("need at least 3 samples matching the grid".into()));
        }
        let derivs = finite_differences(&grid, &values);
        Self::new(grid, values, derivs)
    }

    pub fn from_fn(
        grid: Arc<[f64]>,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect();
        let derivs = grid.iter().map(|&x| df(x)).collect();
        Self::new(grid, values, derivs)
    }

    pub fn with_log_derivs(mut self, log_derivs: Vec<f64>) -> Result<Self> {
        if log_derivs.len() != self.grid.len() || log_derivs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("log-derivative samples must match the grid".into()));
        }
        self.log_derivs = Some(log_derivs);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `|f'|/|f|` at node `k`.
    pub fn ratio(&self, k: usize) -> f64 {
        match &self.log_derivs {
            Some(l) => l[k].abs(),
            None => (self.derivs[k] / self.values[k]).abs(),
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            derivs: self.derivs.iter().map(|v| c * v).collect(),
            log_derivs: self.log_derivs.clone(),
        }
    }

    pub fn shifted(&self, c: f64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
            derivs: self.derivs.clone(),
            log_derivs: None,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            derivs: self
                .values
                .iter()
                .zip(&self.derivs)
                .map(|(&v, &d)| df(v) * d)
                .collect(),
            log_derivs: None,
        }
    }

    /// Largest mismatch between the cell chord slope and the mean of the
    /// endpoint derivatives, over 10 cells drawn with `seed`, relative to the
    /// derivative scale.
    pub fn derivative_mismatch(&self, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = self.derivs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let k = rng.gen_range(0..self.grid.len() - 1);
            let h = self.grid[k + 1] - self.grid[k];
            let chord = (self.values[k + 1] - self.values[k]) / h;
            let mean = 0.5 * (self.derivs[k] + self.derivs[k + 1]);
            worst = worst.max((chord - mean).abs());
        }
        worst / (1.0 + scale)
    }
}

pub(crate) fn finite_differences(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    d[0] = (y[1] - y[0]) / (x[1] - x[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    for k in 1..n - 1 {
        let (h0, h1) = (x[k] - x[k - 1], x[k + 1] - x[k]);
        d[k] = (h0 * h0 * (y[k + 1] - y[k]) + h1 * h1 * (y[k] - y[k - 1])) / (h0 * h1 * (h0 + h1));
    }
    d
}
