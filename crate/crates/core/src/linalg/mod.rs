//! Dense and sparse symmetric generalized eigensolvers.

mod dense;
mod lobpcg;
mod sparse;

pub use dense::{eigen_k, GeneralizedEigProblem, Spectrum, ZERO_CLAMP};
pub use lobpcg::{lobpcg, LobpcgOptions, LobpcgOutcome};
pub use sparse::{bandwidth, permute_symmetric, rcm_ordering, shifted, SparseCholesky};
