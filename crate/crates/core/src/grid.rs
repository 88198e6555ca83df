//! Uniform time grids and the quadrature used on them.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// `t_m = m * dt` for `m = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        Ok(Self { dt, steps })
    }

    /// Grid reaching at least `horizon` with step `dt` (last point rounded to
    /// the nearest multiple of `dt`).
    pub fn with_horizon(dt: f64, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "horizon must be >= 0, got {horizon}"
            )));
        }
        Self::new(dt, (horizon / dt).round() as usize)
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|m| self.time(m)).collect()
    }
}

/// Checks that `times` starts anywhere and is uniformly spaced; returns the step.
pub fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 samples, got {}",
            times.len()
        )));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::NonUniformGrid(format!(
            "non-increasing times at index 1 (dt = {dt})"
        )));
    }
    let span = times[times.len() - 1] - times[0];
    for (i, w) in times.windows(2).enumerate() {
        let step = w[1] - w[0];
        if (step - dt).abs() > 1e-9 * dt.max(span * 1e-6) {
            return Err(Error::NonUniformGrid(format!(
                "step {step} at index {} differs from {dt}",
                i + 1
            )));
        }
    }
    Ok(dt)
}

/// Cumulative composite trapezoid `int_0^{t_m} f`, starting at zero.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(values.len());
    out
}

/// Terms per chunk in [`ordered_sum`].
const CHUNK: usize = 4096;

/// `sum_{i < n} term(i)` evaluated in parallel with a fixed chunking and a
/// sequential final reduction, so the result does not depend on the number
/// of threads.
pub fn ordered_sum<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            (lo..hi).map(&term).sum()
        })
        .collect();
    partial.iter().fold(0.0, |a, p| a + p)
}
