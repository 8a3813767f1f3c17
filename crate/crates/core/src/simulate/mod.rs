//! Data generators, the Monte Carlo size/power harness and the eigenvalue
//! density study.

mod baseline;
mod density;
mod harness;
mod models;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{self, SymMatrix};
use crate::rng::stream_rng;
use crate::stats::Dataset;

pub use baseline::{linf_baseline_distribution, linf_baseline_statistic, linf_baseline_test, EntrywiseScale};
pub use density::{
    density_study_spherical, kde_grid, ks_distance, silverman_bandwidth, DensityConfig, DensityRow, DensityTable,
    KDE_GRID_POINTS,
};
pub use harness::{run_methods, run_size_power, Method, ReplicateError, ReplicateOutcome, SimConfig, SimResult};
pub use models::{
    apply_alternative, realize_pair, realize_sigma1, table_constants, AlternativeSpec, CovarianceModel, ModelKind, ScaleMode,
    ALT1_SUPPORT_SIZE,
};

/// Distribution of the standardized coordinates `zᵢ` in `xᵢ = L zᵢ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    #[default]
    Gaussian,
    /// Independent ±1 signs; sub-Gaussian with unit variance.
    Rademacher,
}

/// Row-major `d×d` square root `L` with `L Lᵀ = Σ`: the Cholesky factor, or
/// `V Λ^{1/2}` when `Σ` is only semidefinite.
fn square_root(sigma: &SymMatrix) -> Result<Vec<f64>> {
    if let Ok(ch) = linalg::cholesky(sigma) {
        return Ok(ch.lower().to_vec());
    }
    let d = sigma.dim();
    let eig = linalg::sym_eigen(sigma)?;
    let tol = 1e-10 * sigma.max_abs().max(f64::MIN_POSITIVE);
    if eig.min() < -tol {
        return Err(invalid(format!("covariance is not positive semidefinite (eigenvalue {})", eig.min())));
    }
    let mut l = vec![0.0; d * d];
    for k in 0..d {
        let root = eig.values[k].max(0.0).sqrt();
        let v = eig.vector(k);
        for i in 0..d {
            l[i * d + k] = v[i] * root;
        }
    }
    Ok(l)
}

pub fn sample_with(sigma: &SymMatrix, n: usize, seed: u64, generator: Generator) -> Result<Dataset> {
    let d = sigma.dim();
    let l = square_root(sigma)?;
    let mut rows = Vec::with_capacity(n * d);
    let mut z = vec![0.0; d];
    for i in 0..n {
        let mut rng = stream_rng(seed, "sample-row", i as u64);
        for zj in z.iter_mut() {
            *zj = match generator {
                Generator::Gaussian => rng.sample(StandardNormal),
                Generator::Rademacher => {
                    if rng.gen::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
        }
        rows.extend((0..d).map(|r| linalg::dot(&l[r * d..(r + 1) * d], &z)));
    }
    Dataset::new(n, d, rows)
}

/// `n` draws from `N(0, Σ)`; row `i` uses stream `(seed, i)`.
pub fn gaussian_sample(sigma: &SymMatrix, n: usize, seed: u64) -> Result<Dataset> {
    sample_with(sigma, n, seed, Generator::Gaussian)
}

/// `n` draws of `L z` with Rademacher `z`, so the covariance is still `Σ`.
pub fn rademacher_sample(sigma: &SymMatrix, n: usize, seed: u64) -> Result<Dataset> {
    sample_with(sigma, n, seed, Generator::Rademacher)
}
