//! Sparse restricted spectral statistics of sample covariance matrices.
//!
//! The crate computes s-sparse restricted eigenvalues and normalized
//! restricted spectral norms, calibrates their laws with the Gaussian
//! multiplier bootstrap, and builds a two-sample test of covariance equality
//! on top (a sparse analogue of Roy's largest root test). A Monte Carlo
//! harness reproduces size/power and density experiments at desk scale.
//!
//! Modules, bottom up:
//!
//! * [`linalg`]: Jacobi eigensolver, Cholesky, pencil whitening.
//! * [`sparse_spectral`]: exact and approximate restricted solvers.
//! * [`stats`]: sample covariance and the one- and two-sample statistics.
//! * [`bootstrap`]: multiplier bootstrap engines, quantiles, test decisions.
//! * [`epsnet`]: ε-nets of sparse spheres and discretization checks.
//! * [`simulate`]: covariance models, generators, size/power and density studies.
//! * [`io`]: dataset readers and artifact writers.
//!
//! Indices are 0-based in memory and 1-based in every serialized format.

pub mod bootstrap;
pub mod epsnet;
pub mod error;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod simulate;
pub mod sparse_spectral;
pub mod stats;
pub mod support;

pub use bootstrap::{BootstrapConfig, EmpiricalDistribution, Multipliers, TestReport};
pub use error::{Error, Result};
pub use linalg::{CholeskyFactor, EigenPair, SymMatrix};
pub use sparse_spectral::{RestrictedEigResult, SolverChoice, SolverOptions};
pub use stats::{Dataset, StatisticKind, StatisticValue};
pub use support::SupportSet;
