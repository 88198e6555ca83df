//! Bose-Hubbard Hamiltonians for the two impurity branches.

use rayon::prelude::*;

use crate::basis::FockBasis;
use crate::error::{Error, Result};
use crate::lattice::{Branch, ModelParams};
use crate::sparse::CsrMatrix;

/// Real symmetric Hamiltonian over a [`FockBasis`], tagged by branch.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub matrix: CsrMatrix,
    pub branch: Branch,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Builds `H_g = -J sum_<ij> (a_i^+ a_j + h.c.) + U/2 sum_i n_i (n_i - 1)`,
/// or `H_e = H_g + U_e n_{i0}` for [`Branch::E`].
///
/// The impurity level splitting is left out: it only adds a phase to the
/// coherence.
pub fn build_hamiltonian(
    params: &ModelParams,
    basis: &FockBasis,
    branch: Branch,
) -> Result<HamiltonianMatrix> {
    params.validate()?;
    check_basis(params, basis)?;

    let bonds = params.bonds();
    let j = params.hopping;
    let u = params.interaction;
    let shift = match branch {
        Branch::G => 0.0,
        Branch::E => params.impurity_coupling,
    };
    let i0 = params.impurity_site;
    let n_max = basis.n_max() as u8;

    let rows: Vec<Vec<(usize, usize, f64)>> = (0..basis.dim())
        .into_par_iter()
        .map(|b| {
            let occ = basis.state(b);
            let mut entries = Vec::with_capacity(2 * bonds.len() + 1);
            let onsite: f64 = occ
                .iter()
                .map(|&n| 0.5 * u * f64::from(n) * (f64::from(n) - 1.0))
                .sum();
            entries.push((b, b, onsite + shift * f64::from(occ[i0])));
            if j != 0.0 {
                let mut scratch = occ.to_vec();
                for &(p, q) in &bonds {
                    for (to, from) in [(p, q), (q, p)] {
                        if occ[from] == 0 || occ[to] == n_max {
                            continue;
                        }
                        let amp = (f64::from(occ[from]) * (f64::from(occ[to]) + 1.0)).sqrt();
                        scratch[from] -= 1;
                        scratch[to] += 1;
                        let target = basis
                            .index_of(&scratch)
                            .expect("hop stays inside the basis");
                        scratch[from] += 1;
                        scratch[to] -= 1;
                        entries.push((target, b, -j * amp));
                    }
                }
            }
            entries
        })
        .collect();

    let triplets = rows.into_iter().flatten().collect();
    Ok(HamiltonianMatrix {
        matrix: CsrMatrix::from_triplets(basis.dim(), triplets),
        branch,
    })
}

/// Diagonal of `n_site` in the Fock basis.
pub fn number_operator(site: usize, basis: &FockBasis) -> Result<Vec<f64>> {
    if site >= basis.n_sites() {
        return Err(Error::SiteOutOfRange {
            site,
            n_sites: basis.n_sites(),
        });
    }
    Ok(basis.iter().map(|occ| f64::from(occ[site])).collect())
}

pub(crate) fn check_basis(params: &ModelParams, basis: &FockBasis) -> Result<()> {
    if basis.n_sites() != params.n_sites
        || basis.particles() != params.particles()
        || basis.n_max() != params.n_max
    {
        return Err(Error::BasisMismatch(format!(
            "basis (sites {}, particles {}, n_max {}) vs params (sites {}, particles {}, n_max {})",
            basis.n_sites(),
            basis.particles(),
            basis.n_max(),
            params.n_sites,
            params.particles(),
            params.n_max
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;
    use nalgebra::SymmetricEigen;

    fn two_site() -> (ModelParams, FockBasis) {
        let p = ModelParams::new(1.0, 0.0, 0.3, 2).with_n_max(2);
        let b = FockBasis::new(2, 2, 2).unwrap();
        (p, b)
    }

    #[test]
    fn atomic_limit_is_diagonal() {
        let p = ModelParams::new(0.0, 2.5, 0.0, 4).with_filling(2);
        let b = FockBasis::new(4, 8, 5).unwrap();
        let h = build_hamiltonian(&p, &b, Branch::G).unwrap();
        assert_eq!(
            h.matrix.nnz(),
            b.iter().filter(|o| o.iter().any(|&n| n > 1)).count()
        );
        for (i, occ) in b.iter().enumerate() {
            let e: f64 = occ
                .iter()
                .map(|&n| 1.25 * f64::from(n) * (f64::from(n) - 1.0))
                .sum();
            assert_eq!(h.matrix.get(i, i), e);
        }
    }

    #[test]
    fn two_site_hopping_spectrum() {
        let (p, b) = two_site();
        let h = build_hamiltonian(&p, &b, Branch::G).unwrap();
        // (2,0) <-> (1,1) <-> (0,2) with amplitude -sqrt(2)
        let s2 = 2f64.sqrt();
        assert!((h.matrix.get(0, 1) + s2).abs() < 1e-15);
        assert!((h.matrix.get(1, 2) + s2).abs() < 1e-15);
        assert_eq!(h.matrix.get(0, 2), 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(h.matrix.to_dense())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn periodic_two_sites_has_single_bond() {
        let (p, b) = two_site();
        let open = build_hamiltonian(&p, &b, Branch::G).unwrap();
        let per =
            build_hamiltonian(&p.clone().with_boundary(Boundary::Periodic), &b, Branch::G).unwrap();
        assert_eq!(open.matrix, per.matrix);
    }

    #[test]
    fn e_minus_g_is_impurity_number() {
        let p = ModelParams::new(1.0, 3.0, 0.37, 5).with_boundary(Boundary::Periodic);
        let b = FockBasis::new(5, 5, 4).unwrap();
        let g = build_hamiltonian(&p, &b, Branch::G).unwrap();
        let e = build_hamiltonian(&p, &b, Branch::E).unwrap();
        let n0 = number_operator(p.impurity_site, &b).unwrap();
        for r in 0..b.dim() {
            for c in 0..b.dim() {
                let diff = e.matrix.get(r, c) - g.matrix.get(r, c);
                let want = if r == c { 0.37 * n0[r] } else { 0.0 };
                assert!((diff - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hermitian() {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            let p = ModelParams::new(1.0, 4.0, 0.01, 6).with_boundary(boundary);
            let b = FockBasis::new(6, 6, 4).unwrap();
            for branch in [Branch::G, Branch::E] {
                let h = build_hamiltonian(&p, &b, branch).unwrap();
                assert_eq!(h.matrix.max_asymmetry(), 0.0);
            }
        }
    }

    #[test]
    fn number_operator_values() {
        let b = FockBasis::new(2, 2, 2).unwrap();
        assert_eq!(number_operator(0, &b).unwrap(), vec![2.0, 1.0, 0.0]);
        assert!(number_operator(2, &b).is_err());
        let b = FockBasis::new(5, 5, 3).unwrap();
        let ops: Vec<Vec<f64>> = (0..5).map(|s| number_operator(s, &b).unwrap()).collect();
        for i in 0..b.dim() {
            let total: f64 = ops.iter().map(|o| o[i]).sum();
            assert_eq!(total, 5.0);
            assert!(ops
                .iter()
                .all(|o| o[i] >= 0.0 && o[i] <= 3.0 && o[i].fract() == 0.0));
        }
    }

    #[test]
    fn basis_mismatch() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 3);
        let b = FockBasis::new(3, 2, 4).unwrap();
        assert!(matches!(
            build_hamiltonian(&p, &b, Branch::G),
            Err(Error::BasisMismatch(_))
        ));
    }

    #[test]
    fn commutes_with_particle_number() {
        // Hopping never leaves the fixed-N basis, so H N v = N H v for any v.
        let p = ModelParams::new(1.0, 2.0, 0.1, 5);
        let b = FockBasis::new(5, 5, 4).unwrap();
        let h = build_hamiltonian(&p, &b, Branch::E).unwrap();
        let total: Vec<f64> = b
            .iter()
            .map(|o| o.iter().map(|&n| f64::from(n)).sum())
            .collect();
        let v: Vec<f64> = (0..b.dim())
            .map(|i| ((i * 7919) % 13) as f64 - 6.0)
            .collect();
        let nv: Vec<f64> = v.iter().zip(&total).map(|(a, n)| a * n).collect();
        let mut hnv = vec![0.0; b.dim()];
        let mut hv = vec![0.0; b.dim()];
        h.matrix.mul_vec(&nv, &mut hnv);
        h.matrix.mul_vec(&v, &mut hv);
        for i in 0..b.dim() {
            assert!((hnv[i] - total[i] * hv[i]).abs() < 1e-12);
        }
    }
}
