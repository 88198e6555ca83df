//! Superfluid regime: Bogoliubov phonons of the lattice quasi-condensate.
//!
//! With the condensate density `n0` the local density fluctuation is a sum
//! over phonon modes `k != 0` with frequency
//! `omega_k = sqrt(eps_k (eps_k + 2 U n0))`, `eps_k = 4 J sin^2(k/2)`, and
//! spectral weight `|beta_k|^2 / N_s^2 = n0 eps_k / (N_s omega_k)`.
//! The dephasing rate and its integral are finite mode sums:
//!
//! ```text
//! gamma(t) =  U_e^2 sum_k w_k sin(omega_k t) / omega_k
//! Gamma(t) = -U_e^2 sum_k w_k (1 - cos(omega_k t)) / omega_k^2
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::lattice::ModelParams;
use crate::trace::{DephasingTrace, Provenance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub momentum: f64,
    pub frequency: f64,
    /// `|beta_k|^2 / N_s^2`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub modes: Vec<Mode>,
    pub condensate_density: f64,
    pub n_sites: usize,
    pub hopping: f64,
    pub interaction: f64,
}

/// Allowed momenta `2 pi m / N_s` with `m` in `(-N_s/2, N_s/2]`, ascending.
pub fn lattice_momenta(n_sites: usize) -> Vec<f64> {
    let n = n_sites as i64;
    let lo = -(n - 1) / 2;
    let hi = n / 2;
    (lo..=hi).map(|m| 2.0 * PI * m as f64 / n as f64).collect()
}

/// Kinetic energy from the band bottom, `4 J sin^2(k/2)`.
pub fn free_dispersion(hopping: f64, k: f64) -> f64 {
    4.0 * hopping * (0.5 * k).sin().powi(2)
}

/// `omega_k = sqrt(eps_k (eps_k + 2 U n0))`.
pub fn bogoliubov_frequency(hopping: f64, interaction: f64, n0: f64, k: f64) -> f64 {
    let eps = free_dispersion(hopping, k);
    (eps * (eps + 2.0 * interaction * n0)).sqrt()
}

/// `c_s = sqrt(2 J U n0)`.
pub fn sound_velocity(params: &ModelParams) -> f64 {
    (2.0 * params.hopping * params.interaction * params.filling as f64).sqrt()
}

/// Phonon modes of `params` with `n0 = filling` (full condensate fraction).
/// The lattice boundary setting is ignored: momenta are always periodic.
pub fn sf_modes(params: &ModelParams) -> Result<ModeSet> {
    params.validate()?;
    if params.hopping == 0.0 {
        return Err(Error::DegenerateModel(
            "Bogoliubov spectrum needs J > 0 (all frequencies vanish at J = 0)".into(),
        ));
    }
    if params.n_sites < 2 {
        return Err(Error::InvalidParameter(
            "Bogoliubov modes need N_s >= 2".into(),
        ));
    }
    if params.ratio() > 1.0 {
        log::warn!(
            "U/J = {} > 1: Bogoliubov theory is outside its weak-coupling regime",
            params.ratio()
        );
    }
    let n0 = params.filling as f64;
    let ns = params.n_sites as f64;
    let modes = lattice_momenta(params.n_sites)
        .into_iter()
        .filter(|&k| k != 0.0)
        .map(|k| {
            let eps = free_dispersion(params.hopping, k);
            let omega = bogoliubov_frequency(params.hopping, params.interaction, n0, k);
            // (u_k + v_k)^2 = eps_k / omega_k
            let weight = n0 * ns * (eps / omega) / (ns * ns);
            Mode {
                momentum: k,
                frequency: omega,
                weight,
            }
        })
        .collect();
    Ok(ModeSet {
        modes,
        condensate_density: n0,
        n_sites: params.n_sites,
        hopping: params.hopping,
        interaction: params.interaction,
    })
}

pub fn gamma_sf(modes: &ModeSet, impurity_coupling: f64, t: f64) -> f64 {
    let ue2 = impurity_coupling * impurity_coupling;
    ue2 * modes
        .modes
        .iter()
        .map(|m| m.weight * (m.frequency * t).sin() / m.frequency)
        .sum::<f64>()
}

/// Closed-form `Gamma_SF(t) = -int_0^t gamma_SF`.
pub fn big_gamma_sf(modes: &ModeSet, impurity_coupling: f64, t: f64) -> f64 {
    let ue2 = impurity_coupling * impurity_coupling;
    -ue2 * modes
        .modes
        .iter()
        .map(|m| {
            let x = m.frequency * t;
            // 1 - cos x = 2 sin^2(x/2), accurate for small x
            m.weight * 2.0 * (0.5 * x).sin().powi(2) / (m.frequency * m.frequency)
        })
        .sum::<f64>()
}

/// `2 pi / omega` at the smallest nonzero `|k|`.
pub fn recurrence_time(modes: &ModeSet) -> f64 {
    let slowest = modes
        .modes
        .iter()
        .min_by(|a, b| a.momentum.abs().total_cmp(&b.momentum.abs()))
        .expect("mode set is never empty");
    2.0 * PI / slowest.frequency
}

/// `gamma`, closed-form `Gamma` and `sqrt(L) = exp(Gamma)` on `grid`.
pub fn sf_trace(modes: &ModeSet, impurity_coupling: f64, grid: &TimeGrid) -> DephasingTrace {
    let times = grid.times();
    let gamma = times
        .iter()
        .map(|&t| gamma_sf(modes, impurity_coupling, t))
        .collect();
    let big_gamma: Vec<f64> = times
        .iter()
        .map(|&t| big_gamma_sf(modes, impurity_coupling, t))
        .collect();
    let sqrt_echo = big_gamma.iter().map(|g| g.exp()).collect();
    DephasingTrace {
        times,
        gamma,
        big_gamma,
        sqrt_echo,
        provenance: Provenance::SfAnalytic,
    }
}
