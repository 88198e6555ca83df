//! Exact diagonalization oracle for small lattices.
//!
//! The gas starts in the ground state `|phi0>` of `H_g`. Switching on the
//! impurity evolves it with `H_e`, and the coherence is
//! `sqrt(L(t)) = |<phi0| exp(-i H_e t) |phi0>|` (the `exp(+i H_g t)` factor is
//! a global phase on an eigenstate). The same machinery yields the site
//! densities after the quench and the connected ground-state correlator of
//! the impurity-site density.

use num_complex::Complex64;

use crate::basis::FockBasis;
use crate::eigen::{lowest_eigenpair, EigenOptions};
use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, TimeGrid};
use crate::hamiltonian::{build_hamiltonian, number_operator, HamiltonianMatrix};
use crate::lattice::{Branch, ModelParams};
use crate::propagate::{cdot, cnorm, evolve as krylov_evolve, PropagatorOptions};
use crate::trace::{DephasingTrace, EchoTrace, Provenance};

/// Normalized many-body state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn from_real(v: &[f64]) -> Self {
        Self {
            amplitudes: v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        cnorm(&self.amplitudes)
    }

    pub fn overlap(&self, other: &QuantumState) -> Complex64 {
        cdot(&self.amplitudes, &other.amplitudes)
    }

    /// `<psi| diag(d) |psi>`.
    pub fn diagonal_expectation(&self, d: &[f64]) -> f64 {
        self.amplitudes
            .iter()
            .zip(d)
            .map(|(a, x)| a.norm_sqr() * x)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdOptions {
    /// Largest basis dimension accepted.
    pub dim_cap: usize,
    pub eigen: EigenOptions,
    pub propagator: PropagatorOptions,
}

impl Default for EdOptions {
    fn default() -> Self {
        Self {
            dim_cap: 2_000_000,
            eigen: EigenOptions::default(),
            propagator: PropagatorOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: QuantumState,
    pub residual: f64,
    pub norm_estimate: f64,
    pub gap: f64,
}

pub fn ground_state(h: &HamiltonianMatrix, opts: &EigenOptions) -> Result<GroundState> {
    let pair = lowest_eigenpair(&h.matrix, opts)?;
    Ok(GroundState {
        energy: pair.energy,
        state: QuantumState::from_real(&pair.vector),
        residual: pair.residual,
        norm_estimate: pair.norm_estimate,
        gap: pair.gap,
    })
}

/// `exp(-i H t) |state>`.
pub fn evolve(
    h: &HamiltonianMatrix,
    state: &QuantumState,
    t: f64,
    opts: &PropagatorOptions,
) -> Result<QuantumState> {
    Ok(QuantumState {
        amplitudes: krylov_evolve(&h.matrix, &state.amplitudes, t, opts)?,
    })
}

/// Bases, both branch Hamiltonians and the initial ground state of one scenario.
#[derive(Debug, Clone)]
pub struct EdSystem {
    pub params: ModelParams,
    pub basis: FockBasis,
    pub h_g: HamiltonianMatrix,
    pub h_e: HamiltonianMatrix,
    pub ground: GroundState,
    opts: EdOptions,
}

/// Echo and site densities along one quench trajectory.
#[derive(Debug, Clone)]
pub struct QuenchResult {
    pub echo: EchoTrace,
    /// `delta n_site(t)` per requested site, in request order.
    pub densities: Vec<Vec<f64>>,
    /// Largest `| ||psi(t)|| - 1 |` seen along the trajectory.
    pub max_norm_drift: f64,
}

impl EdSystem {
    pub fn new(params: &ModelParams, opts: &EdOptions) -> Result<Self> {
        params.validate()?;
        let basis = FockBasis::new(params.n_sites, params.particles(), params.n_max)?;
        if basis.dim() > opts.dim_cap {
            return Err(Error::DimensionCap {
                dim: basis.dim(),
                cap: opts.dim_cap,
            });
        }
        let h_g = build_hamiltonian(params, &basis, Branch::G)?;
        let h_e = build_hamiltonian(params, &basis, Branch::E)?;
        let ground = ground_state(&h_g, &opts.eigen)?;
        Ok(Self {
            params: params.clone(),
            basis,
            h_g,
            h_e,
            ground,
            opts: *opts,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Ground-state occupation of `site`.
    pub fn ground_density(&self, site: usize) -> Result<f64> {
        let n = number_operator(site, &self.basis)?;
        Ok(self.ground.state.diagonal_expectation(&n))
    }

    /// Evolves `|phi0>` with `H_e` over `grid`, recording the echo and the
    /// density offsets of `sites`.
    pub fn quench(&self, grid: &TimeGrid, sites: &[usize]) -> Result<QuenchResult> {
        let ops: Vec<Vec<f64>> = sites
            .iter()
            .map(|&s| number_operator(s, &self.basis))
            .collect::<Result<_>>()?;
        let phi0 = &self.ground.state;
        let reference: Vec<f64> = ops.iter().map(|n| phi0.diagonal_expectation(n)).collect();

        let mut echo = Vec::with_capacity(grid.len());
        let mut densities: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); sites.len()];
        let mut max_norm_drift: f64 = 0.0;

        let mut psi = phi0.clone();
        for m in 0..grid.len() {
            if m > 0 {
                psi = evolve(&self.h_e, &psi, grid.dt, &self.opts.propagator)?;
                let drift = (psi.norm() - 1.0).abs();
                max_norm_drift = max_norm_drift.max(drift);
                if drift > self.opts.propagator.norm_tol {
                    return Err(Error::NormDrift {
                        drift,
                        tol: self.opts.propagator.norm_tol,
                    });
                }
                echo.push(phi0.overlap(&psi).norm());
            } else {
                echo.push(1.0);
            }
            for ((n, r), out) in ops.iter().zip(&reference).zip(densities.iter_mut()) {
                out.push(psi.diagonal_expectation(n) - r);
            }
        }

        Ok(QuenchResult {
            echo: EchoTrace {
                times: grid.times(),
                values: echo,
                provenance: Provenance::Ed,
            },
            densities,
            max_norm_drift,
        })
    }

    pub fn loschmidt_echo(&self, grid: &TimeGrid) -> Result<EchoTrace> {
        Ok(self.quench(grid, &[])?.echo)
    }

    /// `<n_site(t)> - <n_site>_GS` after the quench.
    pub fn density_trace(&self, site: usize, grid: &TimeGrid) -> Result<Vec<f64>> {
        let mut r = self.quench(grid, &[site])?;
        Ok(r.densities.remove(0))
    }

    /// `|chi> = (n_{i0} - <n_{i0}>) |phi0>`.
    fn fluctuation_vector(&self) -> Result<Vec<Complex64>> {
        let n0 = number_operator(self.params.impurity_site, &self.basis)?;
        let phi0 = &self.ground.state;
        let mean = phi0.diagonal_expectation(&n0);
        Ok(phi0
            .amplitudes
            .iter()
            .zip(&n0)
            .map(|(a, n)| a * (n - mean))
            .collect())
    }

    /// Connected correlator `C(t) = <phi0| dn(t) dn(0) |phi0>` at the
    /// impurity site, `C(t) = exp(i E0 t) <chi| exp(-i H_g t) |chi>`.
    pub fn density_correlation(&self, grid: &TimeGrid) -> Result<Vec<Complex64>> {
        let chi = self.fluctuation_vector()?;
        self.correlation_on(&chi, grid.dt, grid.steps)
    }

    fn correlation_on(&self, chi: &[Complex64], dt: f64, steps: usize) -> Result<Vec<Complex64>> {
        let e0 = self.ground.energy;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(Complex64::new(cdot(chi, chi).re, 0.0));
        let mut state = chi.to_vec();
        for m in 1..=steps {
            state = krylov_evolve(&self.h_g.matrix, &state, dt, &self.opts.propagator)?;
            let phase = Complex64::from_polar(1.0, e0 * m as f64 * dt);
            out.push(phase * cdot(chi, &state));
        }
        Ok(out)
    }

    /// RMS frequency of the correlator, `sqrt(<chi|(H-E0)^2|chi> / <chi|chi>)`.
    fn correlation_frequency(&self, chi: &[Complex64]) -> f64 {
        let norm2 = cdot(chi, chi).re;
        if norm2 == 0.0 {
            return 0.0;
        }
        let mut hchi = vec![Complex64::new(0.0, 0.0); chi.len()];
        self.h_g.matrix.mul_cvec(chi, &mut hchi);
        let e0 = self.ground.energy;
        let shifted: Vec<Complex64> = hchi.iter().zip(chi).map(|(h, c)| h - c * e0).collect();
        (cdot(&shifted, &shifted).re / norm2).sqrt()
    }

    /// Second-order rate `gamma(t) = U_e^2 Re int_0^t C` and
    /// `Gamma(t) = -int_0^t gamma` from the exact correlator.
    ///
    /// Both integrals are cumulative trapezoids on a sub-grid of `grid`
    /// with `refine` points per step; `None` picks the refinement so that
    /// the sub-step resolves the correlator's RMS frequency
    /// (`omega_rms * dt / refine <= 0.01`).
    pub fn correlation_rates(
        &self,
        grid: &TimeGrid,
        refine: Option<usize>,
    ) -> Result<DephasingTrace> {
        let chi = self.fluctuation_vector()?;
        let refine = refine
            .unwrap_or_else(|| (self.correlation_frequency(&chi) * grid.dt / 0.01).ceil() as usize)
            .max(1);
        let h = grid.dt / refine as f64;
        let c = self.correlation_on(&chi, h, grid.steps * refine)?;
        let re_c: Vec<f64> = c.iter().map(|z| z.re).collect();
        let ue2 = self.params.impurity_coupling.powi(2);
        let gamma_fine: Vec<f64> = cumulative_trapezoid(&re_c, h)
            .into_iter()
            .map(|x| ue2 * x)
            .collect();
        let big_fine: Vec<f64> = cumulative_trapezoid(&gamma_fine, h)
            .into_iter()
            .map(|x| -x)
            .collect();

        let gamma: Vec<f64> = gamma_fine.iter().step_by(refine).copied().collect();
        let big_gamma: Vec<f64> = big_fine.iter().step_by(refine).copied().collect();
        let sqrt_echo = big_gamma.iter().map(|g| g.exp()).collect();
        Ok(DephasingTrace {
            times: grid.times(),
            gamma,
            big_gamma,
            sqrt_echo,
            provenance: Provenance::EdCorrelation,
        })
    }
}

/// Exact echo for `params` on `grid`.
pub fn loschmidt_echo(
    params: &ModelParams,
    grid: &TimeGrid,
    opts: &EdOptions,
) -> Result<EchoTrace> {
    EdSystem::new(params, opts)?.loschmidt_echo(grid)
}

/// `delta n_site(t)` after the quench; `site` is an absolute lattice index.
pub fn density_trace(
    params: &ModelParams,
    site: usize,
    grid: &TimeGrid,
    opts: &EdOptions,
) -> Result<Vec<f64>> {
    EdSystem::new(params, opts)?.density_trace(site, grid)
}

pub fn density_correlation(
    params: &ModelParams,
    grid: &TimeGrid,
    opts: &EdOptions,
) -> Result<Vec<Complex64>> {
    EdSystem::new(params, opts)?.density_correlation(grid)
}
