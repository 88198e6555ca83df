use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A model or grid parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Requested particle number does not fit into `n_sites * n_max`.
    #[error("capacity violation: {particles} particles cannot fit into {sites} sites with at most {n_max} per site")]
    Capacity {
        particles: usize,
        sites: usize,
        n_max: usize,
    },

    /// Basis and model disagree on sites, particle number or cutoff.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("site {site} out of range for a lattice of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    /// ED guard: Hilbert space too large for exact methods.
    #[error("basis dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    /// Doublon-holon model requested below its validity bound.
    #[error("doublon-holon model requires U/J >= 4(nbar+1) = {bound}, got U/J = {ratio}")]
    ValidityGate { ratio: f64, bound: f64 },

    /// All Bogoliubov frequencies vanish (J = 0).
    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e}, target {target:.3e})")]
    EigenNotConverged {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("ground state is degenerate: gap {gap:.3e} below {threshold:.3e}")]
    DegenerateGroundState { gap: f64, threshold: f64 },

    #[error("propagator did not converge: {0}")]
    PropagatorNotConverged(String),

    #[error("norm drift {drift:.3e} exceeds tolerance {tol:.1e}")]
    NormDrift { drift: f64, tol: f64 },

    #[error("grid is not uniform: {0}")]
    NonUniformGrid(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
