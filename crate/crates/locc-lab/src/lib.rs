//! Numerical toolkit for multi-copy LOCC discrimination of orthogonal
//! quantum states.
//!
//! The library covers three connected pieces of machinery:
//!
//! - [`hilbert`]: dense complex linear algebra over bipartite Hilbert
//!   spaces — states, density operators, subspaces, party-grouped tensor
//!   products and partial traces.
//! - [`canonical`] + [`protocol`]: the canonical two-state decomposition
//!   of orthogonal bipartite pure states and the round-by-round local
//!   elimination protocol built on it, which identifies any of `N`
//!   orthogonal pure states with at most `N - 1` copies.
//! - [`upb`] + [`witness`]: unextendible product bases (UPBs), the
//!   sigma/rho ensembles derived from them, and see-saw searches for
//!   product-state witnesses of conclusive local distinguishability.
//!
//! [`reports`] ties everything into machine-readable experiment reports;
//! the `locc-lab` binary is a thin CLI over it.

pub mod canonical;
pub mod hilbert;
pub mod protocol;
pub mod reports;
pub mod upb;
pub mod witness;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("vector is not normalized: |norm - 1| = {0:.3e}")]
    NotNormalized(f64),

    #[error("states are not orthogonal: overlap magnitude {0:.3e}")]
    NotOrthogonal(f64),

    #[error("operator is not Hermitian: max |M - M†| entry = {0:.3e}")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite: min eigenvalue = {0:.3e}")]
    NotPositiveSemidefinite(f64),

    #[error("operator trace deviates from 1 by {0:.3e}")]
    TraceNotOne(f64),

    #[error("matrix is not traceless: |trace| = {0:.3e}")]
    NotTraceless(f64),

    #[error("basis columns are not orthonormal: defect {0:.3e}")]
    NotOrthonormal(f64),

    #[error("subspace is empty")]
    EmptySubspace,

    #[error("{0} did not converge: {1}")]
    NonConvergence(&'static str, String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for validation problems, 3 for
    /// numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(..) => 3,
            _ => 2,
        }
    }
}

/// Numerical tolerances used by constructors and validity checks.
///
/// The defaults are sized for the dimensions this crate targets (local
/// dimensions up to a few tens, total dimension a few hundred), where
/// f64 conditioning is benign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Unit-norm / unit-trace deviation.
    pub norm: f64,
    /// Orthogonality and orthonormality defects.
    pub orth: f64,
    /// Hermiticity defect (entrywise).
    pub herm: f64,
    /// Allowed negative slack on eigenvalues of PSD operators.
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { norm: 1e-9, orth: 1e-9, herm: 1e-9, psd: 1e-9 }
    }
}

pub(crate) const DEFAULT_TOL: Tolerances =
    Tolerances { norm: 1e-9, orth: 1e-9, herm: 1e-9, psd: 1e-9 };

/// Derive an independent sub-seed from a master seed and an index
/// (splitmix64 finalizer). Used so that trials and restarts are
/// reproducible individually, not just as a sequence.
pub(crate) fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
