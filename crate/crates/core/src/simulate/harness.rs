//! Monte Carlo size/power harness.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baseline::{linf_baseline_test, EntrywiseScale};
use super::models::{realize_pair, AlternativeSpec, CovarianceModel};
use super::{sample_with, Generator};
use crate::bootstrap::{two_sample_test, BootstrapConfig, Multipliers, TestReport};
use crate::error::{invalid, Result};
use crate::rng::derive_seed;
use crate::sparse_spectral::SolverChoice;
use crate::stats::Dataset;
use crate::support::SupportSet;

/// Test applied to each simulated pair of samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "test")]
pub enum Method {
    /// The restricted two-sample test at sparsity `s`.
    Sparse { s: usize, solver: SolverChoice },
    /// The standardized entrywise maximum baseline.
    Linf,
    /// The entrywise maximum without per-entry standardization.
    LinfRaw,
}

impl Method {
    /// Sparse test with the default solver for `(d, s)`.
    pub fn sparse(d: usize, s: usize) -> Self {
        Method::Sparse { s, solver: SolverChoice::auto(d, s) }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Sparse { s, .. } => write!(f, "sparse_s{s}"),
            Method::Linf => f.write_str("linf"),
            Method::LinfRaw => f.write_str("linf_raw"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: CovarianceModel,
    pub alternative: AlternativeSpec,
    pub n: usize,
    pub m: usize,
    pub method: Method,
    pub alpha: f64,
    pub boot_reps: usize,
    pub mc_reps: usize,
    pub seed: u64,
    /// Draw the scaling `O` once per run instead of once per replicate.
    #[serde(default)]
    pub fix_scale: bool,
    #[serde(default)]
    pub generator: Generator,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(invalid("sample sizes n and m must be at least 1"));
        }
        if self.mc_reps == 0 {
            return Err(invalid("mc_reps must be at least 1"));
        }
        if let Method::Sparse { s, .. } = self.method {
            if s == 0 || s > self.model.d {
                return Err(invalid(format!("sparsity s must satisfy 1 <= s <= d (s = {s}, d = {})", self.model.d)));
            }
        }
        self.bootstrap(0).validate()
    }

    fn bootstrap(&self, seed: u64) -> BootstrapConfig {
        let solver = match self.method {
            Method::Sparse { solver, .. } => solver,
            Method::Linf | Method::LinfRaw => SolverChoice::BruteForce,
        };
        BootstrapConfig { replicates: self.boot_reps, seed, solver, alpha: self.alpha, multipliers: Multipliers::Gaussian }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub statistic: f64,
    pub q_alpha: f64,
    pub p_value: f64,
    pub reject: bool,
    pub support: SupportSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateError {
    pub replicate: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    /// Share of successful replicates that rejected.
    pub rejection_rate: f64,
    pub decisions: Vec<ReplicateOutcome>,
    pub errors: Vec<ReplicateError>,
    /// Elapsed seconds; not serialized so artifacts stay reproducible.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl SimResult {
    pub fn rejections(&self) -> usize {
        self.decisions.iter().filter(|d| d.reject).count()
    }

    /// Binomial standard error of the rejection rate.
    pub fn standard_error(&self) -> f64 {
        let k = self.decisions.len().max(1) as f64;
        (self.rejection_rate * (1.0 - self.rejection_rate) / k).sqrt()
    }
}

struct ReplicateData {
    x: Dataset,
    y: Dataset,
    boot_seed: u64,
}

fn replicate_data(cfg: &SimConfig, r: usize) -> Result<ReplicateData> {
    let rs = derive_seed(cfg.seed, "mc-replicate", r as u64);
    let scale_seed = if cfg.fix_scale { derive_seed(cfg.seed, "scale", 0) } else { derive_seed(rs, "scale", 0) };
    let (sigma1, sigma2) = realize_pair(&cfg.model, &cfg.alternative, scale_seed, derive_seed(rs, "alternative", 0))?;
    Ok(ReplicateData {
        x: sample_with(&sigma1, cfg.n, derive_seed(rs, "x", 0), cfg.generator)?,
        y: sample_with(&sigma2, cfg.m, derive_seed(rs, "y", 0), cfg.generator)?,
        boot_seed: derive_seed(rs, "bootstrap", 0),
    })
}

fn apply_method(method: Method, data: &ReplicateData, boot: &BootstrapConfig) -> Result<TestReport> {
    match method {
        Method::Sparse { s, .. } => two_sample_test(&data.x, &data.y, s, boot),
        Method::Linf => linf_baseline_test(&data.x, &data.y, boot, EntrywiseScale::Standardized),
        Method::LinfRaw => linf_baseline_test(&data.x, &data.y, boot, EntrywiseScale::Raw),
    }
}

/// Runs several tests on the same simulated samples. `base.method` is
/// ignored; result `i` belongs to `methods[i]`.
pub fn run_methods(base: &SimConfig, methods: &[Method]) -> Result<Vec<SimResult>> {
    let configs: Vec<SimConfig> = methods.iter().map(|&method| SimConfig { method, ..base.clone() }).collect();
    for c in &configs {
        c.validate()?;
    }
    let start = Instant::now();
    let per_rep: Vec<Vec<std::result::Result<ReplicateOutcome, ReplicateError>>> = (0..base.mc_reps)
        .into_par_iter()
        .map(|r| {
            let fail = |e: crate::Error| ReplicateError { replicate: r, message: e.to_string() };
            match replicate_data(base, r) {
                Err(e) => {
                    let err = fail(e);
                    configs.iter().map(|_| Err(err.clone())).collect()
                }
                Ok(data) => configs
                    .iter()
                    .map(|c| {
                        apply_method(c.method, &data, &c.bootstrap(data.boot_seed))
                            .map(|t| ReplicateOutcome {
                                replicate: r,
                                statistic: t.statistic.value,
                                q_alpha: t.q_alpha,
                                p_value: t.p_value_estimate,
                                reject: t.reject,
                                support: t.support,
                            })
                            .map_err(fail)
                    })
                    .collect(),
            }
        })
        .collect();
    let wall = start.elapsed().as_secs_f64();
    Ok(configs
        .into_iter()
        .enumerate()
        .map(|(i, config)| {
            let (mut decisions, mut errors) = (Vec::new(), Vec::new());
            for rep in &per_rep {
                match &rep[i] {
                    Ok(o) => decisions.push(o.clone()),
                    Err(e) => errors.push(e.clone()),
                }
            }
            let rate = if decisions.is_empty() {
                0.0
            } else {
                decisions.iter().filter(|d| d.reject).count() as f64 / decisions.len() as f64
            };
            SimResult { config, rejection_rate: rate, decisions, errors, wall_time_secs: wall }
        })
        .collect())
}

/// Empirical size (under the null) or power (under an alternative).
pub fn run_size_power(cfg: &SimConfig) -> Result<SimResult> {
    Ok(run_methods(cfg, &[cfg.method])?.pop().expect("one method"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{ModelKind, ScaleMode};

    fn config(alt: AlternativeSpec, d: usize, n: usize, mc: usize) -> SimConfig {
        SimConfig {
            model: CovarianceModel::new(ModelKind::Isotropic, d).unwrap(),
            alternative: alt,
            n,
            m: n,
            method: Method::sparse(d, 2),
            alpha: 0.05,
            boot_reps: 200,
            mc_reps: mc,
            seed: 42,
            fix_scale: false,
            generator: Generator::Gaussian,
        }
    }

    #[test]
    fn rate_is_mean_of_decisions_and_deterministic() {
        let cfg = config(AlternativeSpec::Null, 6, 60, 12);
        let a = run_size_power(&cfg).unwrap();
        assert_eq!(a.decisions.len(), 12);
        assert!(a.errors.is_empty());
        assert_eq!(a.rejection_rate, a.rejections() as f64 / 12.0);
        assert!((0.0..=1.0).contains(&a.rejection_rate));
        let b = run_size_power(&cfg).unwrap();
        assert_eq!(a.decisions, b.decisions);
    }

    #[test]
    fn huge_alternative_is_always_rejected() {
        let cfg = SimConfig {
            method: Method::sparse(20, 3),
            boot_reps: 100,
            ..config(AlternativeSpec::Alt1 { c1: 50.0, support: None }, 20, 100, 20)
        };
        let r = run_size_power(&cfg).unwrap();
        assert_eq!(r.rejection_rate, 1.0);
    }

    #[test]
    fn shared_data_across_methods() {
        let cfg = config(AlternativeSpec::Alt2 { c2: 0.3 }, 6, 80, 6);
        let both = run_methods(&cfg, &[Method::sparse(6, 2), Method::Linf]).unwrap();
        let alone = run_size_power(&SimConfig { method: Method::Linf, ..cfg.clone() }).unwrap();
        assert_eq!(both[1].decisions, alone.decisions);
        assert_eq!(both[0].config.method, Method::sparse(6, 2));
    }

    #[test]
    fn failing_replicates_are_reported() {
        // alternative 1 needs d >= 5
        let mut cfg = config(AlternativeSpec::Alt1 { c1: 1.0, support: None }, 4, 30, 3);
        cfg.model = cfg.model.with_scale(ScaleMode::Identity);
        let r = run_size_power(&cfg).unwrap();
        assert_eq!(r.errors.len(), 3);
        assert!(r.decisions.is_empty());
        assert!(r.errors[0].message.contains("d >= 5"));
    }

    #[test]
    fn invalid_config_is_refused() {
        let mut cfg = config(AlternativeSpec::Null, 6, 30, 3);
        cfg.method = Method::Sparse { s: 7, solver: SolverChoice::BruteForce };
        assert!(run_size_power(&cfg).is_err());
        cfg.method = Method::Linf;
        cfg.alpha = 0.0;
        assert!(run_size_power(&cfg).is_err());
    }
}
