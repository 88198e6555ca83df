//! Mott regime: doublon and holon quasiparticles.
//!
//! Keeping only the local states `nbar - 1, nbar, nbar + 1`, a site with
//! `nbar + 1` bosons is a doublon and one with `nbar - 1` a holon. Hopping
//! moves doublons with amplitude `J (nbar+1)`, holons with `J nbar`, and
//! creates or destroys a doublon-holon pair on neighbouring sites with
//! amplitude `J sqrt(nbar (nbar+1))`. Treating both as fermions, each
//! momentum sector `(d_k, h^+_{-k})` is a 2x2 Bogoliubov problem
//!
//! ```text
//! [ U/2 - 2J(nbar+1) cos k     2iJ sqrt(nbar(nbar+1)) sin k ]
//! [ -2iJ sqrt(nbar(nbar+1)) sin k     -(U/2 - 2J nbar cos k) ]
//! ```
//!
//! whose eigenvalues give `omega^d_k` and `-omega^h_{-k}` and whose
//! eigenvectors give the mixing angle `theta_k`. The impurity-site density
//! creates pairs with amplitude `sin((theta_k - theta_q)/2)`, so
//!
//! ```text
//! gamma_M(t) = U_e^2 / N^2 sum_{k,q} sin^2((theta_k - theta_q)/2)
//!              sin(Omega_kq t) / Omega_kq,   Omega_kq = omega^d_k + omega^h_q
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bogoliubov::lattice_momenta;
use crate::error::{Error, Result};
use crate::grid::{ordered_sum, TimeGrid};
use crate::lattice::ModelParams;
use crate::trace::{DephasingTrace, Provenance};

/// Default node count for thermodynamic-limit momentum integrals.
pub const DEFAULT_K_COUNT: usize = 1024;

/// Momentum discretization of the pair sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumGrid {
    /// Periodic lattice of `N_s` sites: `k = 2 pi m / N_s`.
    Lattice(usize),
    /// `(1/2pi)^2 int dk dq` by the midpoint rule with this many nodes per axis.
    Thermodynamic(usize),
}

impl MomentumGrid {
    pub fn nodes(&self) -> usize {
        match *self {
            MomentumGrid::Lattice(n) | MomentumGrid::Thermodynamic(n) => n,
        }
    }

    /// Momenta in `(-pi, pi]`, mirror-symmetric: `k[mirror[i]] == -k[i]`
    /// bit for bit (modulo `2 pi` for the zone boundary).
    fn momenta(&self) -> (Vec<f64>, Vec<usize>) {
        match *self {
            MomentumGrid::Lattice(n) => {
                let k = lattice_momenta(n);
                let mirror = (0..n)
                    .map(|i| {
                        let target = -k[i];
                        k.iter()
                            .position(|&x| x == target)
                            // k = pi is its own mirror
                            .unwrap_or(i)
                    })
                    .collect();
                (k, mirror)
            }
            MomentumGrid::Thermodynamic(n) => {
                let h = 2.0 * PI / n as f64;
                let mut k = vec![0.0; n];
                for j in 0..n.div_ceil(2) {
                    let v = -PI + (j as f64 + 0.5) * h;
                    k[j] = v;
                    k[n - 1 - j] = -v;
                }
                // odd n: the middle node is k = 0
                if n % 2 == 1 {
                    k[n / 2] = 0.0;
                }
                let mirror = (0..n).map(|i| n - 1 - i).collect();
                (k, mirror)
            }
        }
    }
}

/// Quasiparticle data of one momentum sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub momentum: f64,
    pub omega_d: f64,
    /// Holon energy at momentum `-k` (equal to that at `k`).
    pub omega_h: f64,
    pub theta: f64,
}

impl Sector {
    /// `omega^d_k + omega^h_{-k}`, the energy of a pair with opposite momenta.
    pub fn pair_energy(&self) -> f64 {
        self.omega_d + self.omega_h
    }
}

#[derive(Debug, Clone)]
pub struct DHModel {
    pub filling: usize,
    pub hopping: f64,
    pub interaction: f64,
    pub grid: MomentumGrid,
    pub sectors: Vec<Sector>,
    mirror: Vec<usize>,
}

/// Builds and diagonalizes the sector Hamiltonian at momentum `k`.
pub fn sector(filling: usize, hopping: f64, interaction: f64, k: f64) -> Sector {
    let nb = filling as f64;
    let doublon = 0.5 * interaction - 2.0 * hopping * (nb + 1.0) * k.cos();
    let holon = 0.5 * interaction - 2.0 * hopping * nb * k.cos();
    let pair = Complex64::new(0.0, 2.0 * hopping * (nb * (nb + 1.0)).sqrt() * k.sin());
    // Nambu matrix [[doublon, pair], [pair*, -holon]]
    let (upper, lower, vector) = hermitian2(doublon, pair, -holon);
    // fix the phase so that u is real and nonnegative, then v = i sin(theta/2)
    let phase = if vector.0.norm() > 0.0 {
        vector.0.conj() / vector.0.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let u = (vector.0 * phase).re;
    let v = vector.1 * phase;
    let theta = 2.0 * v.im.atan2(u);
    Sector {
        momentum: k,
        omega_d: upper,
        omega_h: -lower,
        theta,
    }
}

/// Eigenvalues (upper, lower) and the upper eigenvector of `[[a, z], [z*, d]]`.
fn hermitian2(a: f64, z: Complex64, d: f64) -> (f64, f64, (Complex64, Complex64)) {
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + z.norm_sqr()).sqrt();
    let upper = mean + r;
    let lower = mean - r;
    if r == 0.0 {
        return (
            upper,
            lower,
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        );
    }
    // (r + half, z*) solves the second row; pick the better-conditioned form
    let vec = if half >= 0.0 {
        (Complex64::new(r + half, 0.0), z.conj())
    } else {
        (z, Complex64::new(r - half, 0.0))
    };
    let n = (vec.0.norm_sqr() + vec.1.norm_sqr()).sqrt();
    (upper, lower, (vec.0 / n, vec.1 / n))
}

/// The doublon-holon model on `grid`; requires `U/J >= 4(nbar + 1)`.
pub fn dh_model(params: &ModelParams, grid: MomentumGrid) -> Result<DHModel> {
    params.validate()?;
    let bound = 4.0 * (params.filling as f64 + 1.0);
    let ratio = params.ratio();
    if !(ratio >= bound) {
        return Err(Error::ValidityGate { ratio, bound });
    }
    if grid.nodes() == 0 {
        return Err(Error::InvalidParameter(
            "momentum grid needs at least one node".into(),
        ));
    }
    let (momenta, mirror) = grid.momenta();
    let sectors = momenta
        .iter()
        .map(|&k| sector(params.filling, params.hopping, params.interaction, k))
        .collect();
    Ok(DHModel {
        filling: params.filling,
        hopping: params.hopping,
        interaction: params.interaction,
        grid,
        sectors,
        mirror,
    })
}

impl DHModel {
    /// Flattened `(k, q)` pair table with zero-weight pairs dropped and
    /// mirror pairs `(-k, -q)` merged.
    pub fn pairs(&self) -> PairTable {
        let n = self.sectors.len();
        let norm = 1.0 / (n as f64 * n as f64);
        let mut weight = Vec::new();
        let mut freq = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (mi, mj) = (self.mirror[i], self.mirror[j]);
                let multiplicity = match (i, j).cmp(&(mi, mj)) {
                    std::cmp::Ordering::Less => 2.0,
                    std::cmp::Ordering::Equal => 1.0,
                    std::cmp::Ordering::Greater => continue,
                };
                let s = (0.5 * (self.sectors[i].theta - self.sectors[j].theta)).sin();
                let w = s * s;
                if w == 0.0 {
                    continue;
                }
                weight.push(multiplicity * w * norm);
                freq.push(self.sectors[i].omega_d + self.sectors[j].omega_h);
            }
        }
        PairTable { weight, freq }
    }

    /// `2 pi / (omega^d + omega^h)` at `k = pi/2`.
    pub fn first_revival_time(&self) -> f64 {
        let s = sector(self.filling, self.hopping, self.interaction, 0.5 * PI);
        2.0 * PI / s.pair_energy()
    }
}

/// Pair weights `sin^2((theta_k - theta_q)/2) / N^2` and frequencies.
#[derive(Debug, Clone)]
pub struct PairTable {
    pub weight: Vec<f64>,
    pub freq: Vec<f64>,
}

impl PairTable {
    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    pub fn gamma(&self, impurity_coupling: f64, t: f64) -> f64 {
        let ue2 = impurity_coupling * impurity_coupling;
        ue2 * ordered_sum(self.len(), |p| {
            self.weight[p] * (self.freq[p] * t).sin() / self.freq[p]
        })
    }

    pub fn big_gamma(&self, impurity_coupling: f64, t: f64) -> f64 {
        let ue2 = impurity_coupling * impurity_coupling;
        -ue2 * ordered_sum(self.len(), |p| {
            let f = self.freq[p];
            self.weight[p] * 2.0 * (0.5 * f * t).sin().powi(2) / (f * f)
        })
    }
}

pub fn gamma_m(model: &DHModel, impurity_coupling: f64, t: f64) -> f64 {
    model.pairs().gamma(impurity_coupling, t)
}

/// Closed-form `Gamma_M(t) = -int_0^t gamma_M`.
pub fn big_gamma_m(model: &DHModel, impurity_coupling: f64, t: f64) -> f64 {
    model.pairs().big_gamma(impurity_coupling, t)
}

pub fn first_revival_time(model: &DHModel) -> f64 {
    model.first_revival_time()
}

/// `gamma`, closed-form `Gamma` and `sqrt(L)` on `grid`.
pub fn mott_trace(model: &DHModel, impurity_coupling: f64, grid: &TimeGrid) -> DephasingTrace {
    let pairs = model.pairs();
    let times = grid.times();
    let gamma = times
        .iter()
        .map(|&t| pairs.gamma(impurity_coupling, t))
        .collect();
    let big_gamma: Vec<f64> = times
        .iter()
        .map(|&t| pairs.big_gamma(impurity_coupling, t))
        .collect();
    let sqrt_echo = big_gamma.iter().map(|g| g.exp()).collect();
    DephasingTrace {
        times,
        gamma,
        big_gamma,
        sqrt_echo,
        provenance: Provenance::MottAnalytic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(u: f64) -> ModelParams {
        ModelParams::new(1.0, u, 0.01, 96)
    }

    #[test]
    fn validity_gate() {
        assert!(matches!(
            dh_model(&params(7.9), MomentumGrid::Thermodynamic(64)),
            Err(Error::ValidityGate { .. })
        ));
        assert!(dh_model(&params(8.0), MomentumGrid::Thermodynamic(64)).is_ok());
        let p2 = params(11.0).with_filling(2);
        let err = dh_model(&p2, MomentumGrid::Thermodynamic(64)).unwrap_err();
        assert!(err.to_string().contains("12"), "{err}");
    }

    #[test]
    fn atomic_limit() {
        let p = ModelParams::new(0.0, 10.0, 0.01, 16);
        let m = dh_model(&p, MomentumGrid::Lattice(16)).unwrap();
        for s in &m.sectors {
            assert_eq!(s.pair_energy(), 10.0);
            assert_eq!(s.theta, 0.0);
        }
        assert!(m.pairs().is_empty());
        assert_eq!(gamma_m(&m, 0.01, 1.3), 0.0);
        assert_eq!(first_revival_time(&m), 2.0 * PI / 10.0);
    }

    #[test]
    fn sector_diagonalizes_nambu_matrix() {
        let s = sector(1, 1.0, 12.0, 0.9);
        let nb = 1.0f64;
        let a = 6.0 - 2.0 * (nb + 1.0) * 0.9f64.cos();
        let d = -(6.0 - 2.0 * nb * 0.9f64.cos());
        let z = Complex64::new(0.0, 2.0 * (2.0f64).sqrt() * 0.9f64.sin());
        // eigenvector (cos(theta/2), i sin(theta/2)) for eigenvalue omega_d
        let u = Complex64::new((0.5 * s.theta).cos(), 0.0);
        let v = Complex64::new(0.0, (0.5 * s.theta).sin());
        let r0 = u * a + z * v - u * s.omega_d;
        let r1 = z.conj() * u + v * d - v * s.omega_d;
        assert!(r0.norm() < 1e-13 && r1.norm() < 1e-13);
        // trace and determinant
        assert!((s.omega_d - s.omega_h - (a + d)).abs() < 1e-13);
        assert!((-s.omega_d * s.omega_h - (a * d - z.norm_sqr())).abs() < 1e-12);
    }

    #[test]
    fn theta_is_odd_and_small() {
        let m = dh_model(&params(20.0), MomentumGrid::Lattice(32)).unwrap();
        for (i, s) in m.sectors.iter().enumerate() {
            let mirrored = m.sectors[m.mirror[i]];
            assert_eq!(
                mirrored.momentum,
                if s.momentum == PI { PI } else { -s.momentum }
            );
            assert!((s.theta + mirrored.theta).abs() < 1e-15 || s.momentum == PI);
            assert!(s.theta.abs() < PI / 2.0);
            assert!(s.pair_energy() > 0.0);
        }
    }

    #[test]
    fn constant_theta_shift_is_invisible() {
        let mut m = dh_model(&params(15.0), MomentumGrid::Thermodynamic(64)).unwrap();
        let before: Vec<f64> = (0..20)
            .map(|i| gamma_m(&m, 0.01, 0.05 * i as f64))
            .collect();
        for s in &mut m.sectors {
            s.theta += 0.3;
        }
        for (i, b) in before.iter().enumerate() {
            let after = gamma_m(&m, 0.01, 0.05 * i as f64);
            assert!((after - b).abs() <= 1e-12 * b.abs().max(1e-20));
        }
    }

    #[test]
    fn mirror_merge_matches_full_double_sum() {
        for grid in [
            MomentumGrid::Lattice(24),
            MomentumGrid::Lattice(9),
            MomentumGrid::Thermodynamic(31),
        ] {
            let m = dh_model(&params(12.0), grid).unwrap();
            let n = m.sectors.len() as f64;
            for t in [0.1, 0.77, 2.5] {
                let mut full = 0.0;
                for a in &m.sectors {
                    for b in &m.sectors {
                        let w = (0.5 * (a.theta - b.theta)).sin().powi(2);
                        let f = a.omega_d + b.omega_h;
                        full += w * (f * t).sin() / f;
                    }
                }
                full *= 1e-4 / (n * n);
                let fast = gamma_m(&m, 0.01, t);
                assert!(
                    (fast - full).abs() < 1e-12 * full.abs().max(1e-30),
                    "{grid:?} t={t}"
                );
            }
        }
    }

    #[test]
    fn gamma_zero_at_origin_and_negative_early() {
        let m = dh_model(&params(30.0), MomentumGrid::Thermodynamic(128)).unwrap();
        assert_eq!(gamma_m(&m, 0.01, 0.0), 0.0);
        let p = m.pairs();
        let dip = (1..400)
            .map(|i| p.gamma(0.01, i as f64 * 4.0 * PI / 30.0 / 400.0))
            .fold(f64::INFINITY, f64::min);
        assert!(dip < 0.0);
    }

    #[test]
    fn revival_time_scales_inversely_with_u() {
        let mut last = f64::INFINITY;
        for u in [10.0, 20.0, 40.0, 80.0] {
            let tau = dh_model(&params(u), MomentumGrid::Thermodynamic(16))
                .unwrap()
                .first_revival_time();
            assert!(tau < last);
            // the J^2/U correction shrinks with U
            assert!(
                (tau * u / (2.0 * PI) - 1.0).abs() < 1.5 / u,
                "U={u}: {}",
                tau * u / (2.0 * PI)
            );
            last = tau;
        }
    }
}
