//! Physical parameters of one impurity-in-lattice scenario.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Open => write!(f, "open"),
            Boundary::Periodic => write!(f, "periodic"),
        }
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary condition '{other}' (expected open|periodic)"
            ))),
        }
    }
}

/// Which impurity branch a Hamiltonian describes: `G` is the bare lattice,
/// `E` adds the impurity shift `U_e * n_{i0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    G,
    E,
}

/// Parameters of the lattice gas and its coupling to the impurity.
///
/// Energies are in units where `hbar = 1`; with `hopping = 1` times are
/// measured in units of `1/J`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub hopping: f64,
    pub interaction: f64,
    pub impurity_coupling: f64,
    pub n_sites: usize,
    pub filling: usize,
    pub n_max: usize,
    pub boundary: Boundary,
    pub impurity_site: usize,
}

impl ModelParams {
    /// Unit-filling parameters with default cutoff `filling + 3`, open
    /// boundaries and the impurity on the central site.
    pub fn new(hopping: f64, interaction: f64, impurity_coupling: f64, n_sites: usize) -> Self {
        let filling = 1;
        Self {
            hopping,
            interaction,
            impurity_coupling,
            n_sites,
            filling,
            n_max: filling + 3,
            boundary: Boundary::Open,
            impurity_site: n_sites / 2,
        }
    }

    pub fn with_filling(mut self, filling: usize) -> Self {
        self.filling = filling;
        self.n_max = filling + 3;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_impurity_site(mut self, site: usize) -> Self {
        self.impurity_site = site;
        self
    }

    pub fn with_impurity_coupling(mut self, impurity_coupling: f64) -> Self {
        self.impurity_coupling = impurity_coupling;
        self
    }

    pub fn with_interaction(mut self, interaction: f64) -> Self {
        self.interaction = interaction;
        self
    }

    /// Total particle number `filling * n_sites`.
    pub fn particles(&self) -> usize {
        self.filling * self.n_sites
    }

    /// `U/J`; infinite in the atomic limit `J = 0`.
    pub fn ratio(&self) -> f64 {
        if self.hopping == 0.0 {
            f64::INFINITY
        } else {
            self.interaction / self.hopping
        }
    }

    /// Site at signed distance `offset` from the impurity ("site 1" is offset 1).
    pub fn site_from_impurity(&self, offset: isize) -> Result<usize> {
        let site = self.impurity_site as isize + offset;
        if site < 0 || site >= self.n_sites as isize {
            return Err(Error::SiteOutOfRange {
                site: site.max(0) as usize,
                n_sites: self.n_sites,
            });
        }
        Ok(site as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |name: &str, v: f64| {
            if !v.is_finite() || v < 0.0 {
                Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )))
            } else {
                Ok(())
            }
        };
        finite_nonneg("J", self.hopping)?;
        finite_nonneg("U", self.interaction)?;
        finite_nonneg("U_e", self.impurity_coupling)?;
        if self.n_sites == 0 {
            return Err(Error::InvalidParameter("N_s must be positive".into()));
        }
        if self.filling == 0 {
            return Err(Error::InvalidParameter("filling must be positive".into()));
        }
        if self.n_max < self.filling + 1 {
            return Err(Error::InvalidParameter(format!(
                "n_max = {} must be at least filling + 1 = {}",
                self.n_max,
                self.filling + 1
            )));
        }
        if self.impurity_site >= self.n_sites {
            return Err(Error::SiteOutOfRange {
                site: self.impurity_site,
                n_sites: self.n_sites,
            });
        }
        Ok(())
    }

    /// Nearest-neighbour bonds `(i, i+1)`. A periodic chain of two sites
    /// still has a single bond.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut bonds: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && n > 2 {
            bonds.push((n - 1, 0));
        }
        bonds
    }
}
