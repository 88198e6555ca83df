//! Fixed-particle-number Fock basis with a local occupation cutoff.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Occupation-number basis `(n_0, ..., n_{N_s-1})` with `sum n_i = N` and
/// `n_i <= n_max`, enumerated in descending lexicographic order.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n_sites: usize,
    particles: usize,
    n_max: usize,
    // row-major, `n_sites` bytes per state
    occupations: Vec<u8>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockBasis {
    pub fn new(n_sites: usize, particles: usize, n_max: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidParameter(
                "basis needs at least one site".into(),
            ));
        }
        if particles > n_sites * n_max {
            return Err(Error::Capacity {
                particles,
                sites: n_sites,
                n_max,
            });
        }
        if n_max > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "n_max = {n_max} exceeds 255"
            )));
        }

        let mut occupations = Vec::new();
        let mut current = vec![0u8; n_sites];
        enumerate(&mut current, 0, particles, n_max, &mut occupations);

        let index = occupations
            .chunks_exact(n_sites)
            .enumerate()
            .map(|(i, occ)| (occ.to_vec(), i))
            .collect();

        Ok(Self {
            n_sites,
            particles,
            n_max,
            occupations,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.occupations.len() / self.n_sites
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Occupation vector of basis state `i`.
    pub fn state(&self, i: usize) -> &[u8] {
        &self.occupations[i * self.n_sites..(i + 1) * self.n_sites]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.occupations.chunks_exact(self.n_sites)
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// One occupation vector per line, space separated.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity(self.occupations.len() * 2);
        for occ in self.iter() {
            for (j, n) in occ.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{n}");
            }
            out.push('\n');
        }
        out
    }
}

fn enumerate(current: &mut [u8], site: usize, remaining: usize, n_max: usize, out: &mut Vec<u8>) {
    let n_sites = current.len();
    if site == n_sites - 1 {
        if remaining <= n_max {
            current[site] = remaining as u8;
            out.extend_from_slice(current);
        }
        return;
    }
    // capacity left for the sites after this one
    let tail = (n_sites - site - 1) * n_max;
    let hi = remaining.min(n_max);
    let lo = remaining.saturating_sub(tail);
    for n in (lo..=hi).rev() {
        current[site] = n as u8;
        enumerate(current, site + 1, remaining - n, n_max, out);
    }
}
