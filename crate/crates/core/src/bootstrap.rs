//! Gaussian multiplier bootstrap for the restricted statistics.
//!
//! Each replicate draws its multipliers from its own stream
//! `(seed, label, replicate)`, so replicates are computed in parallel and
//! gathered by index. The resulting distribution does not depend on the
//! number of worker threads.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::rng::stream_rng;
use crate::sparse_spectral::{RestrictedPencil, SolverChoice, SolverOptions};
use crate::stats::{self, weighted_gram, Dataset, StatisticValue, TwoSampleMoments};
use crate::support::SupportSet;

const ONE_SAMPLE_STREAM: &str = "one-sample";
const XI_STREAM: &str = "two-sample-xi";
const ETA_STREAM: &str = "two-sample-eta";
const SPHERICAL_STREAM: &str = "spherical";

/// How bootstrap multipliers are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multipliers {
    /// Independent standard normal multipliers.
    #[default]
    Gaussian,
    /// All multipliers zero. Degenerate; for testing.
    Zero,
    /// Two-sample only: `ηᵢ` reuses the `ξᵢ` stream. For testing.
    Paired,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub solver: SolverChoice,
    pub alpha: f64,
    #[serde(default)]
    pub multipliers: Multipliers,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { replicates: 1000, seed: 0, solver: SolverChoice::BruteForce, alpha: 0.05, multipliers: Multipliers::Gaussian }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(invalid("bootstrap replicates must be at least 1"));
        }
        check_alpha(self.alpha)
    }

    fn draw(&self, label: &str, replicate: usize, count: usize) -> Vec<f64> {
        match self.multipliers {
            Multipliers::Zero => vec![0.0; count],
            Multipliers::Gaussian | Multipliers::Paired => {
                let label = if self.multipliers == Multipliers::Paired && label == ETA_STREAM { XI_STREAM } else { label };
                let mut rng = stream_rng(self.seed, label, replicate as u64);
                (0..count).map(|_| rng.sample(StandardNormal)).collect()
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedProvenance {
    pub seed: u64,
    pub streams: Vec<String>,
}

/// Sorted bootstrap or Monte Carlo sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr")]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    provenance: SeedProvenance,
}

#[derive(Deserialize)]
struct DistributionRepr {
    samples: Vec<f64>,
    provenance: SeedProvenance,
}

impl TryFrom<DistributionRepr> for EmpiricalDistribution {
    type Error = Error;

    fn try_from(r: DistributionRepr) -> Result<Self> {
        Self::new(r.samples, r.provenance)
    }
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>, provenance: SeedProvenance) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Invariant("empirical distribution needs at least one sample (N >= 1)".into()));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invariant("empirical distribution has a non-finite sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples, provenance })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn provenance(&self) -> &SeedProvenance {
        &self.provenance
    }

    /// Order statistic at 1-based position `⌈p N⌉`, clamped to `[1, N]`.
    pub fn order_quantile(&self, p: f64) -> f64 {
        let n = self.samples.len();
        // guard against (1 - α) N landing a rounding error above an integer
        let k = ((p * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
        self.samples[k - 1]
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Number of samples `>= t`.
    pub fn count_at_least(&self, t: f64) -> usize {
        self.samples.len() - self.samples.partition_point(|&x| x < t)
    }

    /// Empirical CDF at `t`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.samples.partition_point(|&x| x <= t) as f64 / self.samples.len() as f64
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self { samples: self.samples.iter().map(|x| x + c).collect(), provenance: self.provenance.clone() }
    }
}

/// `(1 − α)` quantile: the `⌈(1 − α) N⌉`-th order statistic.
pub fn empirical_quantile(dist: &EmpiricalDistribution, alpha: f64) -> f64 {
    dist.order_quantile(1.0 - alpha)
}

/// Outcome of a bootstrap-calibrated test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: StatisticValue,
    pub q_alpha: f64,
    pub reject: bool,
    pub p_value_estimate: f64,
    pub support: SupportSet,
    pub alpha: f64,
    pub config: Option<BootstrapConfig>,
    pub distribution: EmpiricalDistribution,
}

/// Rejects when the statistic reaches the `(1 − α)` bootstrap quantile.
pub fn run_test(statistic: StatisticValue, dist: EmpiricalDistribution, alpha: f64) -> TestReport {
    let q_alpha = empirical_quantile(&dist, alpha);
    let exceed = dist.count_at_least(statistic.value);
    TestReport {
        reject: statistic.value >= q_alpha,
        p_value_estimate: (1 + exceed) as f64 / (dist.len() + 1) as f64,
        q_alpha,
        support: statistic.support.clone(),
        alpha,
        config: None,
        statistic,
        distribution: dist,
    }
}

fn collect_samples<F>(cfg: &BootstrapConfig, streams: &[&str], f: F) -> Result<EmpiricalDistribution>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    let samples: Vec<f64> = (0..cfg.replicates).into_par_iter().map(f).collect::<Result<_>>()?;
    EmpiricalDistribution::new(
        samples,
        SeedProvenance { seed: cfg.seed, streams: streams.iter().map(|s| s.to_string()).collect() },
    )
}

/// `(1/√n) Σ ξᵢ (xᵢxᵢᵀ − C)` for a centering matrix `C`.
fn one_sample_numerator(x: &Dataset, center: &SymMatrix, xi: &[f64]) -> SymMatrix {
    let mut g = weighted_gram(x, xi);
    let total: f64 = xi.iter().sum();
    for (gij, cij) in g.iter_mut().zip(center.as_slice()) {
        *gij -= total * cij;
    }
    let scale = 1.0 / (x.n() as f64).sqrt();
    g.iter_mut().for_each(|v| *v *= scale);
    SymMatrix::symmetrized(x.d(), g)
}

/// Bootstrap law of `B̂_max` (normalized) or `B̃_max` (plain), centered at `Σ`.
pub fn multiplier_bootstrap_one_sample(
    x: &Dataset,
    sigma: &SymMatrix,
    s: usize,
    cfg: &BootstrapConfig,
    normalized: bool,
) -> Result<EmpiricalDistribution> {
    cfg.validate()?;
    if x.d() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: x.d(), right: sigma.dim() });
    }
    let denom = if normalized { sigma.clone() } else { SymMatrix::identity(x.d()) };
    let pencil = RestrictedPencil::new(&denom, s, cfg.solver, SolverOptions::default())?;
    collect_samples(cfg, &[ONE_SAMPLE_STREAM], |b| {
        let xi = cfg.draw(ONE_SAMPLE_STREAM, b, x.n());
        pencil.sup_value(&one_sample_numerator(x, sigma, &xi))
    })
}

/// Data-only variant: centers and normalizes with `Σ̂` in place of `Σ`.
pub fn multiplier_bootstrap_one_sample_plugin(
    x: &Dataset,
    s: usize,
    cfg: &BootstrapConfig,
    normalized: bool,
) -> Result<EmpiricalDistribution> {
    multiplier_bootstrap_one_sample(x, &stats::sample_covariance(x), s, cfg, normalized)
}

/// One-sample test of `H₀: Cov = Σ` with the statistic and bootstrap sharing
/// the same solver.
pub fn one_sample_test(
    x: &Dataset,
    sigma: &SymMatrix,
    s: usize,
    cfg: &BootstrapConfig,
    normalized: bool,
) -> Result<TestReport> {
    let statistic = if normalized {
        stats::q_hat_max(x, sigma, s, cfg.solver)?
    } else {
        stats::q_tilde_max(x, sigma, s, cfg.solver)?
    };
    let dist = multiplier_bootstrap_one_sample(x, sigma, s, cfg, normalized)?;
    let mut report = run_test(statistic, dist, cfg.alpha);
    report.config = Some(cfg.clone());
    Ok(report)
}

fn two_sample_numerator(x: &Dataset, y: &Dataset, mo: &TwoSampleMoments, xi: &[f64], eta: &[f64]) -> SymMatrix {
    let gx = weighted_gram(x, xi);
    let gy = weighted_gram(y, eta);
    let (sx, sy): (f64, f64) = (xi.iter().sum(), eta.iter().sum());
    let (n, m) = (mo.n as f64, mo.m as f64);
    let data = gx
        .iter()
        .zip(&gy)
        .zip(mo.sigma1.as_slice().iter().zip(mo.sigma2.as_slice()))
        .map(|((a, b), (c1, c2))| (a - sx * c1) / n - (b - sy * c2) / m)
        .collect();
    SymMatrix::symmetrized(x.d(), data)
}

pub(crate) fn two_sample_distribution(
    x: &Dataset,
    y: &Dataset,
    mo: &TwoSampleMoments,
    pencil: &RestrictedPencil,
    cfg: &BootstrapConfig,
) -> Result<EmpiricalDistribution> {
    let streams: &[&str] = if cfg.multipliers == Multipliers::Paired { &[XI_STREAM] } else { &[XI_STREAM, ETA_STREAM] };
    collect_samples(cfg, streams, |b| {
        let xi = cfg.draw(XI_STREAM, b, mo.n);
        let eta = cfg.draw(ETA_STREAM, b, mo.m);
        Ok(mo.scale * pencil.sup_value(&two_sample_numerator(x, y, mo, &xi, &eta))?)
    })
}

/// Bootstrap law of the two-sample statistic `ℬ̂_max` (plug-in centering at
/// `Σ̂₁`, `Σ̂₂`; fixed denominator `Σ̂₁/n + Σ̂₂/m`).
pub fn multiplier_bootstrap_two_sample(
    x: &Dataset,
    y: &Dataset,
    s: usize,
    cfg: &BootstrapConfig,
) -> Result<EmpiricalDistribution> {
    cfg.validate()?;
    let mo = TwoSampleMoments::new(x, y)?;
    let pencil = RestrictedPencil::new(&mo.denom, s, cfg.solver, SolverOptions::default())?;
    two_sample_distribution(x, y, &mo, &pencil, cfg)
}

/// Two-sample covariance equality test at level `cfg.alpha`.
pub fn two_sample_test(x: &Dataset, y: &Dataset, s: usize, cfg: &BootstrapConfig) -> Result<TestReport> {
    cfg.validate()?;
    let mo = TwoSampleMoments::new(x, y)?;
    let pencil = RestrictedPencil::new(&mo.denom, s, cfg.solver, SolverOptions::default())?;
    let statistic = mo.statistic(&pencil)?;
    let dist = two_sample_distribution(x, y, &mo, &pencil, cfg)?;
    let mut report = run_test(statistic, dist, cfg.alpha);
    report.config = Some(cfg.clone());
    Ok(report)
}

/// Bootstrap laws of `λ_max` and `λ_min` of `n⁻¹ Σ ξᵢ (xᵢxᵢᵀ − σ² I)`.
pub fn eigenvalue_bootstrap_spherical(
    x: &Dataset,
    sigma2: f64,
    cfg: &BootstrapConfig,
) -> Result<(EmpiricalDistribution, EmpiricalDistribution)> {
    cfg.validate()?;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(invalid(format!("sigma2 must be positive, got {sigma2}")));
    }
    let (n, d) = (x.n(), x.d());
    let pairs: Vec<(f64, f64)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let xi = cfg.draw(SPHERICAL_STREAM, b, n);
            let mut g = weighted_gram(x, &xi);
            let total: f64 = xi.iter().sum();
            for i in 0..d {
                g[i * d + i] -= total * sigma2;
            }
            g.iter_mut().for_each(|v| *v /= n as f64);
            linalg::extreme_eigenvalues_in_place(&mut g, d)
        })
        .collect::<Result<_>>()?;
    let prov = SeedProvenance { seed: cfg.seed, streams: vec![SPHERICAL_STREAM.into()] };
    let (hi, lo): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok((EmpiricalDistribution::new(hi, prov.clone())?, EmpiricalDistribution::new(lo, prov)?))
}

/// Two-sided bootstrap interval for one extreme eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenInterval {
    /// Observed eigenvalue of `Σ̂`.
    pub observed: f64,
    /// Range the eigenvalue should fall in when the covariance is `σ² I`.
    pub band: (f64, f64),
    /// Confidence interval for `σ²` implied by the observed eigenvalue.
    pub sigma2_interval: (f64, f64),
    pub contains_sigma2: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalReport {
    pub sigma2: f64,
    pub alpha: f64,
    pub lambda_max: EigenInterval,
    pub lambda_min: EigenInterval,
    pub config: BootstrapConfig,
    pub max_distribution: EmpiricalDistribution,
    pub min_distribution: EmpiricalDistribution,
}

/// Simultaneous (Bonferroni, `α/2` each) intervals for `λ_max(Σ̂)` and `λ_min(Σ̂)`
/// under a hypothesized spherical covariance `σ² I`.
pub fn spherical_intervals(x: &Dataset, sigma2: f64, cfg: &BootstrapConfig) -> Result<SphericalReport> {
    let (max_dist, min_dist) = eigenvalue_bootstrap_spherical(x, sigma2, cfg)?;
    let (hi, lo) = stats::extreme_eigs(x)?;
    let tail = cfg.alpha / 4.0;
    let interval = |observed: f64, dist: &EmpiricalDistribution| {
        let (q_lo, q_hi) = (dist.order_quantile(tail), dist.order_quantile(1.0 - tail));
        let band = (sigma2 + q_lo, sigma2 + q_hi);
        EigenInterval {
            observed,
            band,
            sigma2_interval: (observed - q_hi, observed - q_lo),
            contains_sigma2: observed >= band.0 && observed <= band.1,
        }
    };
    Ok(SphericalReport {
        sigma2,
        alpha: cfg.alpha,
        lambda_max: interval(hi, &max_dist),
        lambda_min: interval(lo, &min_dist),
        config: cfg.clone(),
        max_distribution: max_dist,
        min_distribution: min_dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::gaussian_sample;
    use crate::stats::{two_sample_q_max, StatisticKind};
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn prov() -> SeedProvenance {
        SeedProvenance { seed: 0, streams: vec![] }
    }

    fn stat(value: f64) -> StatisticValue {
        StatisticValue {
            kind: StatisticKind::TwoSample,
            value,
            scale_factor: 1.0,
            unscaled: value,
            support: SupportSet::new(vec![0]).unwrap(),
            inner: None,
        }
    }

    fn cfg(replicates: usize, seed: u64) -> BootstrapConfig {
        BootstrapConfig { replicates, seed, ..Default::default() }
    }

    #[test]
    fn quantile_examples() {
        let d = EmpiricalDistribution::new((1..=100).map(f64::from).collect(), prov()).unwrap();
        assert_eq!(empirical_quantile(&d, 0.05), 95.0);
        let c = EmpiricalDistribution::new(vec![2.5; 17], prov()).unwrap();
        for a in [0.01, 0.3, 0.9] {
            assert_eq!(empirical_quantile(&c, a), 2.5);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let u = EmpiricalDistribution::new((0..1000).map(|_| rng.gen::<f64>()).collect(), prov()).unwrap();
        assert!((empirical_quantile(&u, 0.05) - 0.95).abs() < 0.03);
    }

    #[test]
    fn empty_distribution_is_refused() {
        assert!(matches!(EmpiricalDistribution::new(vec![], prov()), Err(Error::Invariant(_))));
    }

    #[test]
    fn test_decision_examples() {
        let d = EmpiricalDistribution::new((0..100).map(|i| 5.0 * i as f64 / 99.0).collect(), prov()).unwrap();
        let r = run_test(stat(10.0), d.clone(), 0.05);
        assert!(r.reject);
        assert_relative_eq!(r.p_value_estimate, 1.0 / 101.0);

        let pos = EmpiricalDistribution::new((1..=100).map(f64::from).collect(), prov()).unwrap();
        let r = run_test(stat(0.0), pos.clone(), 0.05);
        assert!(!r.reject);
        assert_eq!(r.p_value_estimate, 1.0);

        // boundary: statistic equal to the ⌈0.95 N⌉-th order statistic rejects
        let r = run_test(stat(95.0), pos, 0.05);
        assert!(r.reject);
        assert_eq!(r.q_alpha, 95.0);
    }

    #[test]
    fn zero_multipliers_give_zero_samples() {
        let x = gaussian_sample(&SymMatrix::identity(3), 20, 1).unwrap();
        let y = gaussian_sample(&SymMatrix::identity(3), 25, 2).unwrap();
        let c = BootstrapConfig { multipliers: Multipliers::Zero, ..cfg(20, 3) };
        let one = multiplier_bootstrap_one_sample(&x, &SymMatrix::identity(3), 2, &c, true).unwrap();
        assert!(one.samples().iter().all(|&v| v == 0.0));
        let two = multiplier_bootstrap_two_sample(&x, &y, 2, &c).unwrap();
        assert!(two.samples().iter().all(|&v| v == 0.0));
        let (hi, lo) = eigenvalue_bootstrap_spherical(&x, 1.0, &c).unwrap();
        assert!(hi.samples().iter().chain(lo.samples()).all(|&v| v == 0.0));
    }

    #[test]
    fn paired_multipliers_cancel_on_identical_samples() {
        let x = gaussian_sample(&SymMatrix::identity(4), 30, 9).unwrap();
        let c = BootstrapConfig { multipliers: Multipliers::Paired, ..cfg(50, 1) };
        let dist = multiplier_bootstrap_two_sample(&x, &x, 2, &c).unwrap();
        assert!(dist.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_one_sample_reduction() {
        let x = Dataset::new(1, 1, vec![1.7]).unwrap();
        let sigma = SymMatrix::diagonal(&[0.8]);
        let c = cfg(64, 12);
        let dist = multiplier_bootstrap_one_sample(&x, &sigma, 1, &c, true).unwrap();
        let mut expected: Vec<f64> = (0..64)
            .map(|b| {
                let xi = c.draw(ONE_SAMPLE_STREAM, b, 1)[0];
                xi.abs() * (1.7f64 * 1.7 - 0.8).abs() / 0.8
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in dist.samples().iter().zip(&expected) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
    }

    #[test]
    fn spherical_scalar_max_equals_min() {
        let x = gaussian_sample(&SymMatrix::identity(1), 15, 4).unwrap();
        let (hi, lo) = eigenvalue_bootstrap_spherical(&x, 1.0, &cfg(40, 2)).unwrap();
        assert_eq!(hi.samples(), lo.samples());
    }

    #[test]
    fn bootstrap_quantile_is_stable_across_seeds() {
        let x = gaussian_sample(&SymMatrix::identity(6), 100, 21).unwrap();
        let id = SymMatrix::identity(6);
        let a = multiplier_bootstrap_one_sample(&x, &id, 2, &cfg(2000, 1), true).unwrap();
        let b = multiplier_bootstrap_one_sample(&x, &id, 2, &cfg(2000, 2), true).unwrap();
        let (qa, qb) = (empirical_quantile(&a, 0.05), empirical_quantile(&b, 0.05));
        assert!((qa - qb).abs() / qa < 0.10, "{qa} vs {qb}");
    }

    #[test]
    fn observed_statistic_is_not_extreme_under_null() {
        let id = SymMatrix::identity(6);
        for seed in 0..20u64 {
            let x = gaussian_sample(&id, 100, 1000 + 2 * seed).unwrap();
            let y = gaussian_sample(&id, 100, 1001 + 2 * seed).unwrap();
            let t = two_sample_q_max(&x, &y, 2, SolverChoice::BruteForce).unwrap();
            let dist = multiplier_bootstrap_two_sample(&x, &y, 2, &cfg(1000, seed)).unwrap();
            let frac = dist.count_at_least(t.value) as f64 / dist.len() as f64;
            assert!(frac > 0.01 && frac < 0.99, "seed {seed}: {frac}");
        }
    }

    #[test]
    fn scaling_invariance_of_normalized_samples() {
        let sigma = SymMatrix::from_upper_fn(4, |i, j| if i == j { 1.0 } else { 0.2 });
        let x = gaussian_sample(&sigma, 40, 8).unwrap();
        let c = cfg(30, 5);
        let a = multiplier_bootstrap_one_sample(&x, &sigma, 2, &c, true).unwrap();
        let b = multiplier_bootstrap_one_sample(&x.scaled(3.0), &sigma.scaled(9.0), 2, &c, true).unwrap();
        for (u, v) in a.samples().iter().zip(b.samples()) {
            assert_relative_eq!(*u, *v, max_relative = 1e-9);
        }
        let p = multiplier_bootstrap_one_sample(&x, &sigma, 2, &c, false).unwrap();
        let q = multiplier_bootstrap_one_sample(&x.scaled(3.0), &sigma.scaled(9.0), 2, &c, false).unwrap();
        for (u, v) in p.samples().iter().zip(q.samples()) {
            assert_relative_eq!(9.0 * u, *v, max_relative = 1e-9);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let x = gaussian_sample(&SymMatrix::identity(5), 50, 1).unwrap();
        let y = gaussian_sample(&SymMatrix::identity(5), 60, 2).unwrap();
        let c = cfg(64, 77);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| multiplier_bootstrap_two_sample(&x, &y, 2, &c).unwrap())
        };
        let a = run(1);
        assert_eq!(a, run(2));
        assert_eq!(a, run(4));
    }

    #[test]
    fn rejects_bad_config() {
        let x = gaussian_sample(&SymMatrix::identity(2), 5, 1).unwrap();
        let bad = BootstrapConfig { alpha: 1.0, ..Default::default() };
        assert!(multiplier_bootstrap_two_sample(&x, &x, 1, &bad).is_err());
        let bad = BootstrapConfig { replicates: 0, ..Default::default() };
        assert!(multiplier_bootstrap_two_sample(&x, &x, 1, &bad).is_err());
    }
}
