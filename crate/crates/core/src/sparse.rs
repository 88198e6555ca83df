//! Compressed sparse row storage for real Hamiltonians.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// Rows below this count are multiplied serially.
const PAR_ROWS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles an `n x n` matrix from `(row, col, value)` triplets.
    /// Duplicate entries are summed; explicit zeros are dropped.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            data.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self {
            n,
            indptr,
            indices,
            data,
        };
        m.prune();
        m
    }

    fn prune(&mut self) {
        if self.data.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut indptr = vec![0usize; self.n + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                if v != 0.0 {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.data[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(pos) => self.data[span.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// `y = A x` for real vectors.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let row = |(r, out): (usize, &mut f64)| {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        };
        if self.n >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(row);
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }

    /// `y = A x` for complex vectors; `A` stays real.
    pub fn mul_cvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let row = |(r, out): (usize, &mut Complex64)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, v) in self.row(r) {
                acc += x[c] * v;
            }
            *out = acc;
        };
        if self.n >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(row);
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }

    /// Largest `|A_rc - A_cr|` over stored entries; zero for a symmetric matrix.
    pub fn max_asymmetry(&self) -> f64 {
        (0..self.n)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Coordinate list, one `row col re im` entry per line.
    pub fn to_coo_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                let _ = writeln!(out, "{r} {c} {v:.17e} {:.17e}", 0.0);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_prune() {
        let m = CsrMatrix::from_triplets(
            3,
            vec![
                (0, 1, 1.0),
                (0, 1, 2.0),
                (2, 2, 0.0),
                (1, 0, 3.0),
                (2, 0, 1.0),
                (2, 0, -1.0),
            ],
        );
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.max_asymmetry(), 0.0);
    }

    #[test]
    fn matvec_matches_dense() {
        let n = 5000;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, i as f64 * 0.1));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let m = CsrMatrix::from_triplets(n, t);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; n];
        m.mul_vec(&x, &mut y);
        for i in [0, 1, 2500, n - 1] {
            let mut expect = i as f64 * 0.1 * x[i];
            if i > 0 {
                expect -= x[i - 1];
            }
            if i + 1 < n {
                expect -= x[i + 1];
            }
            assert!((y[i] - expect).abs() < 1e-12);
        }
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, -2.0 * v)).collect();
        let mut yc = vec![Complex64::new(0.0, 0.0); n];
        m.mul_cvec(&xc, &mut yc);
        for i in 0..n {
            assert!((yc[i].re - y[i]).abs() < 1e-12);
            assert!((yc[i].im + 2.0 * y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn coo_export() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 1, -1.0), (1, 0, -1.0)]);
        let text = m.to_coo_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let fields: Vec<&str> = lines[0].split_whitespace().collect();
        assert_eq!(fields[0], "0");
        assert_eq!(fields[1], "1");
        assert_eq!(fields[2].parse::<f64>().unwrap(), -1.0);
        assert_eq!(fields[3].parse::<f64>().unwrap(), 0.0);
    }
}
