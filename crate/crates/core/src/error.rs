use thiserror::Error;

/// Errors reported by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The drift has an eigenvalue with positive real part, or a mode heats.
    #[error("dynamically unstable (max Re eig = {max_real_part:.3e})")]
    Unstable { max_real_part: f64 },
    /// A Bogoliubov mode would need `tanh r ≥ 1`: it heats instead of relaxing.
    #[error("dynamically unstable (mode with tanh r = {tanh_r:.6})")]
    Heating { tanh_r: f64 },
    /// The steady state is not unique (degenerate spectrum or undamped mode).
    #[error("steady state is not unique: {0}")]
    NonUnique(String),
    #[error("hopping graph is not bipartite, witness bond ({0}, {1})")]
    NotChiral(usize, usize),
    #[error("sites {0} and {1} lie on different sublattices")]
    MixedSublattice(usize, usize),
    #[error("bracket [{lo}, {hi}] does not straddle the stability boundary")]
    BracketNotStraddling { lo: f64, hi: f64 },
    #[error("Lyapunov residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("unphysical covariance: {0}")]
    Unphysical(String),
    #[error("matrix is in the wrong basis for this operation")]
    WrongBasis,
    #[error("lattice is not mirror symmetric (deviation {0:.3e})")]
    NotMirrorSymmetric(f64),
    #[error("formula domain error: {0}")]
    Domain(String),
}

impl Error {
    /// True for both instability variants.
    pub fn is_unstable(&self) -> bool {
        matches!(self, Error::Unstable { .. } | Error::Heating { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
