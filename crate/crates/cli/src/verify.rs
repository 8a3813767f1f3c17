//! Verification suites: discretization bounds, net sizes and solver agreement.

use clap::{Args, ValueEnum};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sparsecov::epsnet::{build_net, check_discretization_sandwich, check_lipschitz_bound, net_oracle_normalized_sup};
use sparsecov::io::{Artifact, ArtifactKind};
use sparsecov::rng::{derive_seed, stream_rng};
use sparsecov::simulate::gaussian_sample;
use sparsecov::sparse_spectral::restricted_normalized_sup;
use sparsecov::{SolverChoice, SymMatrix};

use crate::{parse_count, Format, Output, EXIT_ACCEPT, EXIT_ERROR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Same-support Lipschitz bound of the normalized quadratic form.
    Lipschitz,
    /// Net maximum versus the exact sup, with net sizes.
    Sandwich,
    /// Constructed net sizes against the covering budget.
    Netsize,
    /// Exact solver against a direct net evaluation.
    Oracle,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Trials, instances or datasets, depending on the suite.
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The measured quantity the check is decided on.
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Artifact for VerifyReport {
    const KIND: ArtifactKind = ArtifactKind::VerifyReport;
}

/// Seeded SPD matrix `BBᵀ/d + 0.5 I`.
pub fn random_spd(d: usize, seed: u64) -> SymMatrix {
    let mut rng = stream_rng(seed, "verify-spd", 0);
    let b: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    SymMatrix::from_upper_fn(d, |i, j| {
        (0..d).map(|k| b[i * d + k] * b[j * d + k]).sum::<f64>() / d as f64 + if i == j { 0.5 } else { 0.0 }
    })
}

/// Seeded symmetric matrix with standard normal upper triangle.
pub fn random_sym(d: usize, seed: u64) -> SymMatrix {
    let mut rng = stream_rng(seed, "verify-sym", 0);
    let vals: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    SymMatrix::from_upper_fn(d, |i, j| vals[i * d + j])
}

pub fn lipschitz_suite(trials: usize, seed: u64) -> sparsecov::Result<Vec<Check>> {
    let m = random_sym(6, derive_seed(seed, "lipschitz-m", 0));
    let sigma = random_spd(6, derive_seed(seed, "lipschitz-sigma", 0));
    let r = check_lipschitz_bound(&m, &sigma, 2, trials, derive_seed(seed, "lipschitz-pairs", 0))?;
    Ok(vec![
        Check { name: "violations".into(), passed: r.passed(), value: r.violations as f64, limit: 0.0 },
        Check { name: "max_excess".into(), passed: r.max_excess <= 1e-9, value: r.max_excess, limit: 1e-9 },
    ])
}

/// `datasets` seeded draws at `d = 4, s = 2, ε = 0.01`.
pub fn sandwich_suite(datasets: usize, seed: u64) -> sparsecov::Result<Vec<Check>> {
    (0..datasets)
        .into_par_iter()
        .map(|k| {
            let ks = derive_seed(seed, "sandwich", k as u64);
            let sigma = random_spd(4, derive_seed(ks, "sigma", 0));
            let x = gaussian_sample(&sigma, 50, derive_seed(ks, "x", 0))?;
            let r = check_discretization_sandwich(&x, &sigma, 2, 0.01)?;
            Ok(Check {
                name: format!("dataset_{k}"),
                passed: r.passed(),
                value: r.q_hat - r.net_max,
                limit: r.upper_bound - r.net_max,
            })
        })
        .collect()
}

/// Net sizes over a small `(d, s, ε)` grid; `value` is `log |net|`.
pub fn netsize_suite() -> sparsecov::Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in 1..=8 {
        for s in 1..=d.min(3) {
            for eps in [0.5, 0.25, 0.1, 0.05] {
                let net = build_net(d, s, eps)?;
                checks.push(Check {
                    name: format!("d{d}_s{s}_eps{eps}"),
                    passed: net.within_budget(),
                    value: (net.cardinality() as f64).ln(),
                    limit: net.log_size_budget(),
                });
            }
        }
    }
    Ok(checks)
}

/// Exact normalized sup against the net oracle on seeded `(A, Σ)` with
/// `d ≤ 10`, `s ≤ 3`. `value` is the relative gap.
pub fn oracle_suite(instances: usize, seed: u64) -> sparsecov::Result<Vec<Check>> {
    (0..instances)
        .map(|k| {
            let ks = derive_seed(seed, "oracle", k as u64);
            let mut rng = stream_rng(ks, "shape", 0);
            let d = rng.gen_range(2..=10);
            let s = rng.gen_range(1..=d.min(3));
            let a = random_sym(d, derive_seed(ks, "a", 0));
            let sigma = random_spd(d, derive_seed(ks, "sigma", 0));
            let exact = restricted_normalized_sup(&a, &sigma, s, SolverChoice::BruteForce)?;
            let oracle = net_oracle_normalized_sup(&a, &sigma, s, 1e-3, 1e-2)?;
            let gap = (exact.value - oracle.value).abs() / exact.value.abs().max(f64::MIN_POSITIVE);
            let reproduced = exact.ratio_error(&a, &sigma);
            Ok(Check {
                name: format!("instance_{k}_d{d}_s{s}"),
                passed: gap <= 5e-3 && reproduced <= 1e-8,
                value: gap,
                limit: 5e-3,
            })
        })
        .collect()
}

pub fn run_suite(suite: Suite, trials: Option<usize>, seed: u64) -> sparsecov::Result<VerifyReport> {
    let (trials, checks) = match suite {
        Suite::Lipschitz => {
            let t = trials.unwrap_or(10_000);
            (t, lipschitz_suite(t, seed)?)
        }
        Suite::Sandwich => {
            let t = trials.unwrap_or(50);
            (t, sandwich_suite(t, seed)?)
        }
        Suite::Netsize => {
            let checks = netsize_suite()?;
            (checks.len(), checks)
        }
        Suite::Oracle => {
            let t = trials.unwrap_or(50);
            (t, oracle_suite(t, seed)?)
        }
    };
    Ok(VerifyReport { suite, trials, passed: checks.iter().all(|c| c.passed), checks })
}

pub(crate) fn verify(args: &VerifyArgs, out: &Output) -> anyhow::Result<u8> {
    let report = run_suite(args.suite, args.trials.map(|t| t as usize), out.seed)?;
    let failed: Vec<&Check> = report.checks.iter().filter(|c| !c.passed).collect();
    for c in &failed {
        eprintln!("FAIL {}: {} (limit {})", c.name, c.value, c.limit);
    }
    eprintln!(
        "{:?}: {} of {} checks passed",
        report.suite,
        report.checks.len() - failed.len(),
        report.checks.len()
    );
    let code = if report.passed { EXIT_ACCEPT } else { EXIT_ERROR };
    let text = match out.format {
        Format::Json => out.artifact(report, &(("command", "verify"), args))?,
        Format::Csv => {
            let mut s = String::from("name,passed,value,limit\n");
            for c in &report.checks {
                s.push_str(&format!("{},{},{},{}\n", c.name, c.passed as u8, c.value, c.limit));
            }
            s
        }
    };
    out.emit(&text)?;
    Ok(code)
}
