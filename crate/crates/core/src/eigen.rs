//! Lowest eigenpair of a real symmetric sparse matrix.
//!
//! Small problems go through a dense symmetric eigensolver. Larger ones use
//! Lanczos with full reorthogonalization and a thick restart that keeps the
//! lowest Ritz vectors when the Krylov space hits its size cap.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Dimensions up to this size are diagonalized densely.
    pub dense_cutoff: usize,
    /// Krylov space size before a restart.
    pub max_krylov: usize,
    pub max_restarts: usize,
    /// Required `||H v - E v|| / ||H||`.
    pub residual_tol: f64,
    /// Relative gap below which the ground state counts as degenerate.
    pub degeneracy_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_cutoff: 2000,
            max_krylov: 300,
            max_restarts: 20,
            residual_tol: 1e-9,
            degeneracy_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LowestEigenpair {
    pub energy: f64,
    /// Unit-norm real eigenvector.
    pub vector: Vec<f64>,
    /// `||H v - E v||`.
    pub residual: f64,
    /// Spectral-norm estimate used to scale the tolerances.
    pub norm_estimate: f64,
    /// Distance to the next eigenvalue (Ritz estimate for Lanczos).
    pub gap: f64,
    pub iterations: usize,
}

pub fn lowest_eigenpair(h: &CsrMatrix, opts: &EigenOptions) -> Result<LowestEigenpair> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let mut pair = if n <= opts.dense_cutoff {
        dense_lowest(h)
    } else {
        lanczos_lowest(h, opts)?
    };
    fix_sign(&mut pair.vector);

    let target = opts.residual_tol * pair.norm_estimate.max(f64::MIN_POSITIVE);
    if pair.residual > target {
        return Err(Error::EigenNotConverged {
            iterations: pair.iterations,
            residual: pair.residual,
            target,
        });
    }
    if n > 1 && pair.gap < opts.degeneracy_tol * pair.norm_estimate {
        return Err(Error::DegenerateGroundState {
            gap: pair.gap,
            threshold: opts.degeneracy_tol * pair.norm_estimate,
        });
    }
    Ok(pair)
}

fn dense_lowest(h: &CsrMatrix) -> LowestEigenpair {
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lo = order[0];
    let energy = eig.eigenvalues[lo];
    let gap = order
        .get(1)
        .map_or(f64::INFINITY, |&i| eig.eigenvalues[i] - energy);
    let norm_estimate = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut vector: Vec<f64> = eig.eigenvectors.column(lo).iter().copied().collect();
    normalize(&mut vector);
    let residual = residual_norm(h, &vector, energy);
    LowestEigenpair {
        energy,
        vector,
        residual,
        norm_estimate,
        gap,
        iterations: 1,
    }
}

fn lanczos_lowest(h: &CsrMatrix, opts: &EigenOptions) -> Result<LowestEigenpair> {
    let n = h.dim();
    let m_cap = opts.max_krylov.min(n).max(4);
    // Ritz vectors kept across a restart
    let keep = (m_cap / 4).clamp(1, 12);

    // deterministic, generic start vector
    let mut v0: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_7).fract())
        .collect();
    normalize(&mut v0);

    let mut basis: Vec<Vec<f64>> = vec![v0];
    // projected matrix V^T H V, grown column by column
    let mut proj = DMatrix::<f64>::zeros(m_cap + 1, m_cap + 1);
    let mut w = vec![0.0; n];
    let mut iterations = 0;
    let mut restarts = 0;
    let mut last;

    loop {
        let j = basis.len() - 1;
        h.mul_vec(&basis[j], &mut w);
        iterations += 1;
        // two passes of classical Gram-Schmidt; the coefficients are the
        // projections <v_i|H|v_j>
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(&w, v);
                proj[(i, j)] += c;
                axpy(-c, v, &mut w);
            }
        }
        for i in 0..j {
            proj[(j, i)] = proj[(i, j)];
        }
        let b = dot(&w, &w).sqrt();
        let m = basis.len();

        let invariant = b < 1e-13 * proj[(j, j)].abs().max(1.0);
        if !m.is_multiple_of(5) && m < m_cap && !invariant {
            proj[(j + 1, j)] = b;
            basis.push(w.iter().map(|x| x / b).collect());
            continue;
        }

        let (theta, s) = sym_eigen(&proj.view((0, 0), (m, m)).into_owned());
        let norm_estimate = theta.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let target = opts.residual_tol * norm_estimate;
        let estimate = if invariant {
            0.0
        } else {
            b * s[(m - 1, 0)].abs()
        };

        if estimate <= 0.1 * target || m == m_cap || invariant {
            let ritz = combine(&basis, s.column(0).iter().copied());
            let residual = residual_norm(h, &ritz, theta[0]);
            if residual <= target {
                let gap = if m > 1 {
                    theta[1] - theta[0]
                } else {
                    f64::INFINITY
                };
                return Ok(LowestEigenpair {
                    energy: theta[0],
                    vector: ritz,
                    residual,
                    norm_estimate,
                    gap,
                    iterations,
                });
            }
            last = (residual, target);
            if restarts == opts.max_restarts || invariant {
                break;
            }
            restarts += 1;

            // thick restart: lowest Ritz vectors plus the residual direction
            let k = keep.min(m - 1);
            let mut next: Vec<Vec<f64>> = (0..k)
                .map(|c| combine(&basis, s.column(c).iter().copied()))
                .collect();
            proj.fill(0.0);
            for (c, &t) in theta.iter().take(k).enumerate() {
                proj[(c, c)] = t;
            }
            let mut r: Vec<f64> = w.iter().map(|x| x / b).collect();
            // re-orthogonalize against the (renormalized) Ritz vectors
            for y in &next {
                let c = dot(&r, y);
                axpy(-c, y, &mut r);
            }
            normalize(&mut r);
            next.push(r);
            basis = next;
            continue;
        }

        proj[(j + 1, j)] = b;
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::EigenNotConverged {
        iterations,
        residual: last.0,
        target: last.1,
    })
}

fn sym_eigen(t: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let m = t.nrows();
    let eig = SymmetricEigen::new(t.clone());
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigen-decomposition of the symmetric tridiagonal matrix, eigenvalues
/// ascending with matching eigenvector columns.
pub(crate) fn tridiag_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    sym_eigen(&t)
}

fn combine(basis: &[Vec<f64>], coeffs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0; basis[0].len()];
    for (v, c) in basis.iter().zip(coeffs) {
        axpy(c, v, &mut out);
    }
    normalize(&mut out);
    out
}

fn residual_norm(h: &CsrMatrix, v: &[f64], e: f64) -> f64 {
    let mut hv = vec![0.0; v.len()];
    h.mul_vec(v, &mut hv);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - e * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Largest-magnitude component made positive, for reproducible output.
fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, onsite: impl Fn(usize) -> f64) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, onsite(i)));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn free_chain_ground_energy() {
        // open chain: E_k = -2 cos(pi k / (n+1))
        for n in [50, 2500] {
            let h = chain(n, |_| 0.0);
            let gs = lowest_eigenpair(&h, &EigenOptions::default()).unwrap();
            let exact = -2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!(
                (gs.energy - exact).abs() < 1e-9,
                "n={n}: {} vs {exact}",
                gs.energy
            );
            assert!(gs.residual <= 1e-9 * gs.norm_estimate);
        }
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let h = chain(400, |i| ((i * 37) % 11) as f64 * 0.3);
        let dense = lowest_eigenpair(&h, &EigenOptions::default()).unwrap();
        let opts = EigenOptions {
            dense_cutoff: 0,
            max_krylov: 60,
            ..EigenOptions::default()
        };
        let lan = lowest_eigenpair(&h, &opts).unwrap();
        assert!((dense.energy - lan.energy).abs() < 1e-10);
        let overlap = dot(&dense.vector, &lan.vector);
        assert!((overlap - 1.0).abs() < 1e-8, "overlap {overlap}");
    }

    #[test]
    fn degenerate_ground_state_is_rejected() {
        let h = CsrMatrix::from_triplets(3, vec![(0, 0, -1.0), (1, 1, -1.0), (2, 2, 1.0)]);
        assert!(matches!(
            lowest_eigenpair(&h, &EigenOptions::default()),
            Err(Error::DegenerateGroundState { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let h = chain(3000, |i| (i as f64 * 0.001).sin());
        let opts = EigenOptions {
            dense_cutoff: 0,
            max_krylov: 5,
            max_restarts: 1,
            ..EigenOptions::default()
        };
        match lowest_eigenpair(&h, &opts) {
            Err(Error::EigenNotConverged {
                residual, target, ..
            }) => assert!(residual > target),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
