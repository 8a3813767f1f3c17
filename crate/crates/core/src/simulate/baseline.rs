//! Entrywise (L∞) two-sample covariance test, used as the comparator in the
//! size/power tables. The default standardizes every entry before taking
//! the maximum.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{run_test, BootstrapConfig, EmpiricalDistribution, SeedProvenance, TestReport};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::linalg::SymMatrix;
use crate::stats::{sample_covariance, weighted_gram, Dataset, StatisticKind, StatisticValue};
use crate::support::SupportSet;

/// How entry differences are compared across coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntrywiseScale {
    /// Each `|Σ̂₁ − Σ̂₂|_jk` divided by its estimated standard deviation
    /// `√(θ̂₁,jk/n + θ̂₂,jk/m)`, `θ̂_jk` the sample variance of `x_j x_k`.
    #[default]
    Standardized,
    /// `√(nm/(n+m)) |Σ̂₁ − Σ̂₂|_jk` with no per-entry scaling.
    Raw,
}

fn check(x: &Dataset, y: &Dataset) -> Result<()> {
    if x.d() != y.d() {
        return Err(Error::DimensionMismatch { left: x.d(), right: y.d() });
    }
    Ok(())
}

fn scale(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (n * m / (n + m)).sqrt()
}

/// `θ̂_jk = n⁻¹ Σᵢ (x_ij x_ik − σ̂_jk)²`, row-major `d×d`.
fn product_variances(x: &Dataset, sigma: &SymMatrix) -> Vec<f64> {
    let d = x.d();
    let mut t = vec![0.0; d * d];
    for r in x.rows() {
        for j in 0..d {
            for k in j..d {
                let e = r[j] * r[k] - sigma.get(j, k);
                t[j * d + k] += e * e;
            }
        }
    }
    let n = x.n() as f64;
    for j in 0..d {
        for k in j..d {
            t[j * d + k] /= n;
            t[k * d + j] = t[j * d + k];
        }
    }
    t
}

/// Per-entry multipliers turning a difference matrix into the statistic.
/// Entries with zero estimated variance get weight 0.
fn entry_weights(x: &Dataset, y: &Dataset, s1: &SymMatrix, s2: &SymMatrix, how: EntrywiseScale) -> Vec<f64> {
    let (n, m, d) = (x.n(), y.n(), x.d());
    match how {
        EntrywiseScale::Raw => vec![scale(n, m); d * d],
        EntrywiseScale::Standardized => {
            let (t1, t2) = (product_variances(x, s1), product_variances(y, s2));
            t1.iter()
                .zip(&t2)
                .map(|(a, b)| {
                    let v = a / n as f64 + b / m as f64;
                    if v > 0.0 {
                        1.0 / v.sqrt()
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    }
}

/// Largest weighted `|B_jk|` over `j ≤ k` with the first maximizing pair.
fn max_abs_upper(b: &[f64], w: &[f64], d: usize) -> (f64, usize, usize) {
    let mut best = (-1.0, 0, 0);
    for j in 0..d {
        for k in j..d {
            let v = w[j * d + k] * b[j * d + k].abs();
            if v > best.0 {
                best = (v, j, k);
            }
        }
    }
    best
}

/// `max_jk w_jk |Σ̂₁ − Σ̂₂|_jk` with weights set by `how`.
pub fn linf_baseline_statistic(x: &Dataset, y: &Dataset, how: EntrywiseScale) -> Result<StatisticValue> {
    check(x, y)?;
    let (s1, s2) = (sample_covariance(x), sample_covariance(y));
    let w = entry_weights(x, y, &s1, &s2, how);
    let diff = s1.sub(&s2)?;
    let (v, j, k) = max_abs_upper(diff.as_slice(), &w, x.d());
    let (kind, c) = match how {
        EntrywiseScale::Raw => (StatisticKind::EntrywiseMax, scale(x.n(), y.n())),
        EntrywiseScale::Standardized => (StatisticKind::StandardizedEntrywiseMax, 1.0),
    };
    Ok(StatisticValue {
        kind,
        value: v,
        scale_factor: c,
        unscaled: v / c,
        support: SupportSet::from_unsorted(if j == k { vec![j] } else { vec![j, k] })?,
        inner: None,
    })
}

/// Multiplier bootstrap of the entrywise statistic with plug-in centering
/// and the observed-data weights.
pub fn linf_baseline_distribution(
    x: &Dataset,
    y: &Dataset,
    cfg: &BootstrapConfig,
    how: EntrywiseScale,
) -> Result<EmpiricalDistribution> {
    check(x, y)?;
    cfg.validate()?;
    let (n, m, d) = (x.n(), y.n(), x.d());
    let (s1, s2) = (sample_covariance(x), sample_covariance(y));
    let w = entry_weights(x, y, &s1, &s2, how);
    let samples: Vec<f64> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rx = stream_rng(cfg.seed, "linf-xi", b as u64);
            let mut ry = stream_rng(cfg.seed, "linf-eta", b as u64);
            let xi: Vec<f64> = (0..n).map(|_| rx.sample(StandardNormal)).collect();
            let eta: Vec<f64> = (0..m).map(|_| ry.sample(StandardNormal)).collect();
            let (gx, gy) = (weighted_gram(x, &xi), weighted_gram(y, &eta));
            let (sx, sy): (f64, f64) = (xi.iter().sum(), eta.iter().sum());
            let buf: Vec<f64> = gx
                .iter()
                .zip(&gy)
                .zip(s1.as_slice().iter().zip(s2.as_slice()))
                .map(|((a, b), (c1, c2))| (a - sx * c1) / n as f64 - (b - sy * c2) / m as f64)
                .collect();
            max_abs_upper(&buf, &w, d).0
        })
        .collect();
    EmpiricalDistribution::new(
        samples,
        SeedProvenance { seed: cfg.seed, streams: vec!["linf-xi".into(), "linf-eta".into()] },
    )
}

pub fn linf_baseline_test(x: &Dataset, y: &Dataset, cfg: &BootstrapConfig, how: EntrywiseScale) -> Result<TestReport> {
    let statistic = linf_baseline_statistic(x, y, how)?;
    let dist = linf_baseline_distribution(x, y, cfg, how)?;
    let mut report = run_test(statistic, dist, cfg.alpha);
    report.config = Some(cfg.clone());
    Ok(report)
}
