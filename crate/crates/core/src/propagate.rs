//! Real-time propagation `exp(-i H t) |psi>` by short-time Krylov steps.
//!
//! Each step builds an orthonormal Lanczos basis `V_m` from the current
//! state, exponentiates the tridiagonal projection `T_m` exactly and maps
//! back: `exp(-i H tau) psi ~ ||psi|| V_m exp(-i T_m tau) e_1`. The step
//! length is the largest `tau` for which the a-posteriori estimate
//! `beta_m |[exp(-i T_m tau) e_1]_m|` stays below the tolerance.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::eigen::tridiag_eigen;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorOptions {
    /// Largest Krylov dimension per step.
    pub max_krylov: usize,
    /// Local error target per step, relative to the state norm.
    pub step_tol: f64,
    /// Allowed deviation of the norm from its initial value.
    pub norm_tol: f64,
    /// Cap on Krylov steps per call.
    pub max_steps: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self {
            max_krylov: 40,
            step_tol: 1e-13,
            norm_tol: 1e-10,
            max_steps: 100_000,
        }
    }
}

/// Returns `exp(-i H t) psi` for `t >= 0`.
pub fn evolve(
    h: &CsrMatrix,
    psi: &[Complex64],
    t: f64,
    opts: &PropagatorOptions,
) -> Result<Vec<Complex64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "evolution time must be finite and >= 0, got {t}"
        )));
    }
    if psi.len() != h.dim() {
        return Err(Error::InvalidParameter(format!(
            "state length {} does not match matrix dimension {}",
            psi.len(),
            h.dim()
        )));
    }
    let norm0 = cnorm(psi);
    let mut state = psi.to_vec();
    if t == 0.0 || norm0 == 0.0 {
        return Ok(state);
    }

    let mut remaining = t;
    let mut steps = 0;
    while remaining > 0.0 {
        if steps == opts.max_steps {
            return Err(Error::PropagatorNotConverged(format!(
                "{steps} Krylov steps used with {remaining:.3e} of {t:.3e} left"
            )));
        }
        let tau = krylov_step(h, &mut state, remaining, opts)?;
        // snap to the end to avoid a dangling sliver
        remaining = if remaining - tau <= 1e-14 * t {
            0.0
        } else {
            remaining - tau
        };
        steps += 1;
    }

    let drift = (cnorm(&state) - norm0).abs() / norm0;
    if drift > opts.norm_tol {
        return Err(Error::NormDrift {
            drift,
            tol: opts.norm_tol,
        });
    }
    Ok(state)
}

/// Advances `state` by at most `max_tau`; returns the time actually taken.
fn krylov_step(
    h: &CsrMatrix,
    state: &mut [Complex64],
    max_tau: f64,
    opts: &PropagatorOptions,
) -> Result<f64> {
    let n = h.dim();
    let norm = cnorm(state);
    let m_cap = opts.max_krylov.min(n).max(1);
    let tol = opts.step_tol;

    let mut basis: Vec<Vec<Complex64>> = vec![state.iter().map(|z| z / norm).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); n];

    loop {
        let j = alpha.len();
        h.mul_cvec(&basis[j], &mut w);
        let a = cdot(&basis[j], &w).re;
        alpha.push(a);
        caxpy(Complex64::new(-a, 0.0), &basis[j], &mut w);
        if j > 0 {
            caxpy(Complex64::new(-beta[j - 1], 0.0), &basis[j - 1], &mut w);
        }
        for _ in 0..2 {
            for v in &basis {
                let c = cdot(v, &w);
                caxpy(-c, v, &mut w);
            }
        }
        let b = cnorm(&w);
        let m = alpha.len();
        let scale = alpha
            .iter()
            .chain(beta.iter())
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
            .max(1.0);
        let invariant = b <= 1e-14 * scale;

        let (theta, s) = tridiag_eigen(&alpha, &beta);
        let coeffs = |tau: f64| small_expm_e1(&theta, &s, tau);

        if invariant {
            let c = coeffs(max_tau);
            apply_basis(&basis, &c, norm, state);
            return Ok(max_tau);
        }
        let err = |tau: f64| b * coeffs(tau)[m - 1].norm();
        if err(max_tau) <= tol {
            let c = coeffs(max_tau);
            apply_basis(&basis, &c, norm, state);
            return Ok(max_tau);
        }
        if m == m_cap {
            // shrink the step on the fixed subspace
            let mut tau = max_tau;
            for _ in 0..200 {
                tau *= 0.5;
                if err(tau) <= tol {
                    let c = coeffs(tau);
                    apply_basis(&basis, &c, norm, state);
                    return Ok(tau);
                }
            }
            return Err(Error::PropagatorNotConverged(format!(
                "no admissible step with Krylov dimension {m_cap}"
            )));
        }
        beta.push(b);
        basis.push(w.iter().map(|z| z / b).collect());
    }
}

/// `exp(-i T tau) e_1` from the eigen-decomposition `T = S diag(theta) S^T`.
fn small_expm_e1(theta: &[f64], s: &DMatrix<f64>, tau: f64) -> Vec<Complex64> {
    let m = theta.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (k, &th) in theta.iter().enumerate() {
        let phase = Complex64::from_polar(s[(0, k)], -th * tau);
        for r in 0..m {
            out[r] += phase * s[(r, k)];
        }
    }
    out
}

fn apply_basis(basis: &[Vec<Complex64>], c: &[Complex64], norm: f64, state: &mut [Complex64]) {
    state.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    for (v, &ci) in basis.iter().zip(c) {
        caxpy(ci * norm, v, state);
    }
}

/// Reference propagator: full diagonalization of the dense matrix,
/// `exp(-i H t) = V diag(exp(-i lambda t)) V^T`.
pub fn dense_evolve(h: &CsrMatrix, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let eig = SymmetricEigen::new(h.to_dense());
    let v = &eig.eigenvectors;
    let n = h.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let proj: Complex64 = (0..n).map(|i| psi[i] * v[(i, k)]).sum();
        let coeff = proj * Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
        for i in 0..n {
            out[i] += coeff * v[(i, k)];
        }
    }
    out
}

/// `<a|b>`, conjugating `a`.
pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn caxpy(a: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}
