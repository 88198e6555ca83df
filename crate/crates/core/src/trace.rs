//! Time series shared by the exact and analytic routes.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which route produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Ed,
    SfAnalytic,
    MottAnalytic,
    /// Second-order rate built from the exact density correlator.
    EdCorrelation,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Ed => "ed",
            Provenance::SfAnalytic => "sf-analytic",
            Provenance::MottAnalytic => "mott-analytic",
            Provenance::EdCorrelation => "ed-correlation",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ed" => Ok(Provenance::Ed),
            "sf-analytic" => Ok(Provenance::SfAnalytic),
            "mott-analytic" => Ok(Provenance::MottAnalytic),
            "ed-correlation" => Ok(Provenance::EdCorrelation),
            other => Err(Error::InvalidParameter(format!(
                "unknown provenance '{other}'"
            ))),
        }
    }
}

/// Coherence `sqrt(L(t_m)) = |rho_eg(t_m)| / |rho_eg(0)|` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl EchoTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Samples with `t <= horizon` (small slack for rounding).
    pub fn truncated(&self, horizon: f64) -> EchoTrace {
        let keep = self
            .times
            .iter()
            .take_while(|&&t| t <= horizon * (1.0 + 1e-12) + 1e-15)
            .count();
        EchoTrace {
            times: self.times[..keep].to_vec(),
            values: self.values[..keep].to_vec(),
            provenance: self.provenance,
        }
    }

    /// Indices of interior local maxima (`v[i-1] < v[i] >= v[i+1]`).
    pub fn local_maxima(&self) -> Vec<usize> {
        let v = &self.values;
        (1..v.len().saturating_sub(1))
            .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1])
            .collect()
    }
}

/// `gamma(t)`, `Gamma(t) = -int_0^t gamma` and `sqrt(L) = exp(Gamma)` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingTrace {
    pub times: Vec<f64>,
    pub gamma: Vec<f64>,
    pub big_gamma: Vec<f64>,
    pub sqrt_echo: Vec<f64>,
    pub provenance: Provenance,
}

impl DephasingTrace {
    pub fn echo(&self) -> EchoTrace {
        EchoTrace {
            times: self.times.clone(),
            values: self.sqrt_echo.clone(),
            provenance: self.provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
