//! From dephasing rates to echoes, and from echoes to the BLP measure of
//! non-Markovianity `N = sum_n [sqrt(L(t_{n+1})) - sqrt(L(t_n))]`, the sum
//! running over the intervals on which the echo grows.

use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, uniform_step};
use crate::trace::{EchoTrace, Provenance};

/// Default absolute tolerance on echo rises.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// `Gamma(t_m) = -int_0^{t_m} gamma` by the cumulative trapezoid rule.
pub fn integrate_rate(times: &[f64], gamma: &[f64]) -> Result<Vec<f64>> {
    if times.len() != gamma.len() {
        return Err(Error::InvalidParameter(format!(
            "{} times but {} rate samples",
            times.len(),
            gamma.len()
        )));
    }
    let dt = uniform_step(times)?;
    Ok(cumulative_trapezoid(gamma, dt)
        .into_iter()
        .map(|g| -g)
        .collect())
}

/// Echo rebuilt from `Gamma`, plus whether any value exceeded one.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedEcho {
    /// `exp(Gamma)` unclipped.
    pub echo: EchoTrace,
    /// Set when `Gamma > 0` somewhere: second-order perturbation theory has
    /// broken down there.
    pub exceeds_one: bool,
}

impl ReconstructedEcho {
    /// Values clipped to `[0, 1]` for reporting.
    pub fn clipped(&self) -> Vec<f64> {
        self.echo.values.iter().map(|v| v.min(1.0)).collect()
    }
}

pub fn echo_from_gamma(
    times: &[f64],
    big_gamma: &[f64],
    provenance: Provenance,
) -> ReconstructedEcho {
    let values: Vec<f64> = big_gamma.iter().map(|g| g.exp()).collect();
    let exceeds_one = values.iter().any(|&v| v > 1.0);
    ReconstructedEcho {
        echo: EchoTrace {
            times: times.to_vec(),
            values,
            provenance,
        },
        exceeds_one,
    }
}

/// One maximal stretch of strict echo increase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackflowInterval {
    pub start: f64,
    pub end: f64,
    pub start_index: usize,
    pub end_index: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NMReport {
    pub intervals: Vec<BackflowInterval>,
    pub measure: f64,
    pub horizon: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
}

impl NMReport {
    /// The backflow interval with the largest gain.
    pub fn dominant(&self) -> Option<&BackflowInterval> {
        self.intervals
            .iter()
            .max_by(|a, b| a.gain.total_cmp(&b.gain))
    }

    pub fn is_markovian(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// BLP measure of `echo`: sums the gains of the maximal runs of strict
/// increase whose gain exceeds `tol`.
pub fn blp_measure(echo: &EchoTrace, tol: f64) -> Result<NMReport> {
    let v = &echo.values;
    if v.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "BLP measure needs at least 2 samples, got {}",
            v.len()
        )));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    if echo.times.len() != v.len() {
        return Err(Error::InvalidParameter(
            "echo times and values differ in length".into(),
        ));
    }
    let mut intervals = Vec::new();
    let mut i = 0;
    while i + 1 < v.len() {
        if v[i + 1] > v[i] {
            let start = i;
            while i + 1 < v.len() && v[i + 1] > v[i] {
                i += 1;
            }
            let gain = v[i] - v[start];
            if gain > tol {
                intervals.push(BackflowInterval {
                    start: echo.times[start],
                    end: echo.times[i],
                    start_index: start,
                    end_index: i,
                    gain,
                });
            }
        } else {
            i += 1;
        }
    }
    let measure = intervals.iter().map(|r| r.gain).fold(0.0, |a, g| a + g);
    Ok(NMReport {
        intervals,
        measure,
        horizon: *echo.times.last().expect("checked nonempty"),
        tolerance: tol,
        provenance: echo.provenance,
    })
}

/// Time average `1/T int_0^T f` of a sampled trace starting at `t = 0`.
/// A horizon between grid points is handled by linear interpolation.
pub fn average_density_offset(times: &[f64], values: &[f64], horizon: f64) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter(
            "times and values differ in length".into(),
        ));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "averaging horizon must be > 0, got {horizon}"
        )));
    }
    let dt = uniform_step(times)?;
    let last = times[times.len() - 1];
    let slack = 1e-9 * horizon;
    if last + slack < horizon {
        return Err(Error::InsufficientData(format!(
            "trace ends at t = {last}, shorter than the horizon {horizon}"
        )));
    }
    let mut integral = 0.0;
    for m in 0..times.len() - 1 {
        let (a, b) = (times[m], times[m + 1]);
        if a >= horizon - slack {
            break;
        }
        if b <= horizon + slack {
            integral += 0.5 * dt * (values[m] + values[m + 1]);
        } else {
            let h = horizon - a;
            let end = values[m] + (values[m + 1] - values[m]) * h / dt;
            integral += 0.5 * h * (values[m] + end);
        }
    }
    Ok(integral / (horizon - times[0]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub ratio: f64,
    pub measure: f64,
    pub density_offset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub max_measure: f64,
    /// `N / N_max`, or all zeros when every `N` vanishes.
    pub normalized: Vec<f64>,
    pub all_zero: bool,
}

impl SweepResult {
    /// Indices `i` with `0 < i < len - 1` where the normalized curve has a
    /// strict local maximum.
    pub fn interior_maxima(&self) -> Vec<usize> {
        let v = &self.normalized;
        (1..v.len().saturating_sub(1))
            .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1])
            .collect()
    }

    pub fn peak(&self) -> Option<&SweepPoint> {
        if self.all_zero {
            return None;
        }
        self.normalized
            .iter()
            .position(|&x| x == 1.0)
            .map(|i| &self.points[i])
    }
}

/// Normalizes a sweep by its largest measure; points are sorted by `U/J`.
pub fn normalize_sweep(points: &[SweepPoint]) -> Result<SweepResult> {
    if points.is_empty() {
        return Err(Error::InsufficientData("empty sweep".into()));
    }
    if let Some(p) = points.iter().find(|p| !(p.measure >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "measure at U/J = {} is {}, expected >= 0",
            p.ratio, p.measure
        )));
    }
    let mut points = points.to_vec();
    points.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    let max_measure = points.iter().map(|p| p.measure).fold(0.0, f64::max);
    let all_zero = max_measure == 0.0;
    let normalized = points
        .iter()
        .map(|p| {
            if all_zero {
                0.0
            } else {
                p.measure / max_measure
            }
        })
        .collect();
    Ok(SweepResult {
        points,
        max_measure,
        normalized,
        all_zero,
    })
}
