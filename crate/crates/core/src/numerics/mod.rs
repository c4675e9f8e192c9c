//! Numerical building blocks shared by the pipeline stages: dense matrices,
//! the symmetric eigensolver, quantiles and seeded random streams.

mod eigen;
mod matrix;
mod pca;
pub mod rng;
mod stats;

pub use eigen::{sym_eigen, EigenPairs};
pub(crate) use matrix::{dot, sq_dist};
pub use matrix::{DataMatrix, SymMatrix};
pub use pca::pca;
pub use rng::RngState;
pub use stats::{quantile, quantiles};
