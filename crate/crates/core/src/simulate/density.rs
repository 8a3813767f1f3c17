//! Finite-sample law of `λ_max(Σ̂)` under a spherical covariance against two
//! bootstrap approximations: the multiplier (eigenvalue) bootstrap and the
//! ordinary row-resampling bootstrap.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gaussian_sample;
use crate::bootstrap::{eigenvalue_bootstrap_spherical, BootstrapConfig, EmpiricalDistribution, SeedProvenance};
use crate::error::{invalid, Result};
use crate::linalg::SymMatrix;
use crate::rng::{derive_seed, stream_rng};
use crate::stats::{extreme_eigs, Dataset};

pub const KDE_GRID_POINTS: usize = 512;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub sigma2: f64,
    pub boot_reps: usize,
    pub seed: u64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self { sigma2: 1.0, boot_reps: 1000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub x: f64,
    pub exact: f64,
    pub m_boots: f64,
    pub n_boots: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub n: usize,
    pub d: usize,
    pub sigma2: f64,
    /// Monte Carlo law of `λ_max(Σ̂)` over fresh datasets.
    pub exact: EmpiricalDistribution,
    /// Multiplier bootstrap on one dataset, shifted by `σ²`.
    pub m_boots: EmpiricalDistribution,
    /// Row-resampling bootstrap on the same dataset.
    pub n_boots: EmpiricalDistribution,
    pub ks_m_boots: f64,
    pub ks_n_boots: f64,
    /// Bandwidths for exact, m-boots and n-boots, in that order.
    pub bandwidths: [f64; 3],
    pub grid: Vec<DensityRow>,
}

/// Two-sample Kolmogorov–Smirnov distance `sup_t |F_a(t) − F_b(t)|`.
pub fn ks_distance(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (a, b) = (a.samples(), b.samples());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// Linear-interpolation quantile of sorted data.
fn sorted_quantile(x: &[f64], p: f64) -> f64 {
    let h = p * (x.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(x.len() - 1);
    x[lo] + (h - lo as f64) * (x[hi] - x[lo])
}

/// `0.9 · min(sd, IQR/1.34) · N^{-1/5}`, falling back to whichever spread is
/// nonzero for degenerate samples.
pub fn silverman_bandwidth(dist: &EmpiricalDistribution) -> f64 {
    let x = dist.samples();
    let n = x.len() as f64;
    let mean = dist.mean();
    let sd = if x.len() > 1 { (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    let iqr = (sorted_quantile(x, 0.75) - sorted_quantile(x, 0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => 1e-6 * mean.abs().max(1.0),
    };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian-kernel density estimates of several samples on a shared grid of
/// `points` abscissae spanning all samples plus three bandwidths each side.
pub fn kde_grid(sets: &[&EmpiricalDistribution], points: usize) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let hs: Vec<f64> = sets.iter().map(|s| silverman_bandwidth(s)).collect();
    let hmax = hs.iter().copied().fold(0.0, f64::max);
    let lo = sets.iter().map(|s| s.samples()[0]).fold(f64::INFINITY, f64::min) - 3.0 * hmax;
    let hi = sets.iter().map(|s| *s.samples().last().expect("nonempty")).fold(f64::NEG_INFINITY, f64::max) + 3.0 * hmax;
    let step = if points > 1 { (hi - lo) / (points - 1) as f64 } else { 0.0 };
    let xs: Vec<f64> = (0..points).map(|i| lo + i as f64 * step).collect();
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    let dens = sets
        .iter()
        .zip(&hs)
        .map(|(s, &h)| {
            let data = s.samples();
            let c = 1.0 / (data.len() as f64 * h * norm);
            xs.par_iter()
                .map(|&x| c * data.iter().map(|v| (-0.5 * ((x - v) / h).powi(2)).exp()).sum::<f64>())
                .collect()
        })
        .collect();
    (xs, dens, hs)
}

fn lambda_max(x: &Dataset) -> Result<f64> {
    Ok(extreme_eigs(x)?.0)
}

fn cell(n: usize, d: usize, mc_reps: usize, cfg: &DensityConfig) -> Result<DensityTable> {
    let seed = derive_seed(derive_seed(cfg.seed, "density-n", n as u64), "density-d", d as u64);
    let sigma = SymMatrix::identity(d).scaled(cfg.sigma2);
    let exact_seed = derive_seed(seed, "exact", 0);
    let exact: Vec<f64> = (0..mc_reps)
        .into_par_iter()
        .map(|r| lambda_max(&gaussian_sample(&sigma, n, derive_seed(exact_seed, "replicate", r as u64))?))
        .collect::<Result<_>>()?;
    let exact = EmpiricalDistribution::new(exact, SeedProvenance { seed: exact_seed, streams: vec!["exact".into()] })?;

    let fixed = gaussian_sample(&sigma, n, derive_seed(seed, "fixed", 0))?;
    let boot = BootstrapConfig { replicates: cfg.boot_reps, seed: derive_seed(seed, "m-boots", 0), ..Default::default() };
    let m_boots = eigenvalue_bootstrap_spherical(&fixed, cfg.sigma2, &boot)?.0.shifted(cfg.sigma2);

    let nb_seed = derive_seed(seed, "n-boots", 0);
    let n_boots: Vec<f64> = (0..cfg.boot_reps)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(nb_seed, "resample", b as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            lambda_max(&fixed.select_rows(&idx))
        })
        .collect::<Result<_>>()?;
    let n_boots = EmpiricalDistribution::new(n_boots, SeedProvenance { seed: nb_seed, streams: vec!["resample".into()] })?;

    let (xs, dens, hs) = kde_grid(&[&exact, &m_boots, &n_boots], KDE_GRID_POINTS);
    let grid = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| DensityRow { x, exact: dens[0][i], m_boots: dens[1][i], n_boots: dens[2][i] })
        .collect();
    Ok(DensityTable {
        n,
        d,
        sigma2: cfg.sigma2,
        ks_m_boots: ks_distance(&exact, &m_boots),
        ks_n_boots: ks_distance(&exact, &n_boots),
        bandwidths: [hs[0], hs[1], hs[2]],
        exact,
        m_boots,
        n_boots,
        grid,
    })
}

/// One table per `(n, d)` pair, `n` varying slowest.
pub fn density_study_spherical(
    n_list: &[usize],
    d_list: &[usize],
    mc_reps: usize,
    cfg: &DensityConfig,
) -> Result<Vec<DensityTable>> {
    if mc_reps == 0 || cfg.boot_reps == 0 {
        return Err(invalid("mc_reps and boot_reps must be at least 1"));
    }
    if !(cfg.sigma2 > 0.0 && cfg.sigma2.is_finite()) {
        return Err(invalid(format!("sigma2 must be positive, got {}", cfg.sigma2)));
    }
    if n_list.contains(&0) || d_list.contains(&0) {
        return Err(invalid("n and d must be at least 1"));
    }
    let mut out = Vec::with_capacity(n_list.len() * d_list.len());
    for &n in n_list {
        for &d in d_list {
            out.push(cell(n, d, mc_reps, cfg)?);
        }
    }
    Ok(out)
}
