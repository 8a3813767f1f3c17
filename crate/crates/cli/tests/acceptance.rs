//! Acceptance suite. Each test prints one `criterion N ...: PASS|FAIL` line to
//! stderr (uncaptured) and then asserts.
//!
//! Criteria 4 to 7 are Monte Carlo runs at desk scale and take several
//! minutes each on one core.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use sparsecov::bootstrap::{empirical_quantile, EmpiricalDistribution, SeedProvenance};
use sparsecov::epsnet::{check_discretization_sandwich, check_lipschitz_bound, net_oracle_normalized_sup};
use sparsecov::linalg::sym_eigenvalues;
use sparsecov::simulate::{
    density_study_spherical, gaussian_sample, run_methods, AlternativeSpec, CovarianceModel, DensityConfig, Method,
    ModelKind, SimConfig, SimResult,
};
use sparsecov::sparse_spectral::{restricted_max_eig, restricted_min_eig, restricted_normalized_sup};
use sparsecov::stats::two_sample_q_max;
use sparsecov::{Dataset, SolverChoice, SymMatrix};

fn report(n: u32, name: &str, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n} [{name}]: {verdict} ({detail})");
}

// Generators here use `StdRng`, independent of the library's seeded streams.

fn spd(rng: &mut StdRng, d: usize) -> SymMatrix {
    let b: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    SymMatrix::from_upper_fn(d, |i, j| {
        (0..d).map(|k| b[i * d + k] * b[j * d + k]).sum::<f64>() / d as f64 + if i == j { 0.3 } else { 0.0 }
    })
}

fn sym(rng: &mut StdRng, d: usize) -> SymMatrix {
    let v: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    SymMatrix::from_upper_fn(d, |i, j| v[i * d + j])
}

fn quad(m: &SymMatrix, v: &[f64]) -> f64 {
    let d = v.len();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += v[i] * m.get(i, j) * v[j];
        }
    }
    acc
}

#[test]
fn criterion_1_solver_oracle_equivalence() {
    let mut worst_gap = 0.0f64;
    let mut worst_repro = 0.0f64;
    let mut failures = Vec::new();
    for k in 0..200u64 {
        let mut rng = StdRng::seed_from_u64(1_000 + k);
        let d = rng.gen_range(2..=10);
        let s = rng.gen_range(1..=d.min(3));
        let sigma = spd(&mut rng, d);
        let a = sym(&mut rng, d);
        let exact = restricted_normalized_sup(&a, &sigma, s, SolverChoice::BruteForce).unwrap();
        let net = net_oracle_normalized_sup(&a, &sigma, s, 1e-3, 1e-2).unwrap();
        let gap = (exact.value - net.value).abs() / exact.value.abs();
        let v = &exact.vector;
        let nnz = v.iter().filter(|x| **x != 0.0).count();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let repro = ((quad(&a, v).abs() / quad(&sigma, v)) - exact.value).abs() / exact.value.abs();
        worst_gap = worst_gap.max(gap);
        worst_repro = worst_repro.max(repro);
        if gap > 5e-3 || repro > 1e-8 || nnz > s || (norm - 1.0).abs() > 1e-10 || net.value > exact.value * (1.0 + 1e-9) {
            failures.push(format!("instance {k} (d={d}, s={s}): gap {gap:e}, repro {repro:e}"));
        }
    }
    let passed = failures.is_empty();
    report(
        1,
        "solver oracle equivalence",
        passed,
        &format!("200 instances, max relative gap {worst_gap:.2e}, max reproduction error {worst_repro:.2e}"),
    );
    assert!(passed, "{failures:?}");
}

#[test]
fn criterion_2_lipschitz_bound() {
    let (mut violations, mut worst) = (0usize, f64::NEG_INFINITY);
    for k in 0..10u64 {
        let mut rng = StdRng::seed_from_u64(2_000 + k);
        let sigma = spd(&mut rng, 6);
        let m = sym(&mut rng, 6);
        let r = check_lipschitz_bound(&m, &sigma, 2, 1_000, 2_000 + k).unwrap();
        violations += r.violations;
        worst = worst.max(r.max_excess);
    }
    let passed = violations == 0;
    report(2, "Lipschitz bound", passed, &format!("10000 pairs, {violations} violations, max excess {worst:.3e}"));
    assert!(passed);
}

#[test]
fn criterion_3_sandwich_and_net_size() {
    let mut failures = Vec::new();
    let mut net_size = 0;
    for k in 0..50u64 {
        let mut rng = StdRng::seed_from_u64(3_000 + k);
        let sigma = spd(&mut rng, 4);
        let x = gaussian_sample(&sigma, 60, 3_000 + k).unwrap();
        let r = check_discretization_sandwich(&x, &sigma, 2, 1e-2).unwrap();
        net_size = r.net_size;
        // restate the inequalities here rather than trusting the report flags
        let lower = r.net_max <= r.q_hat + 1e-9;
        let upper = r.q_hat <= r.net_max / (1.0 - 2.0 * r.gamma_s * 1e-2) + 1e-9;
        let budget = 6f64.ln() + 2.0 * (1.0 + 2.0 / 1e-2f64).ln();
        let size = (r.net_size as f64).ln() <= budget;
        if !(lower && upper && size && r.passed()) {
            failures.push(format!("dataset {k}: {r:?}"));
        }
    }
    let passed = failures.is_empty();
    report(3, "sandwich and net size", passed, &format!("50 datasets, net size {net_size}, {} failures", failures.len()));
    assert!(passed, "{failures:?}");
}

fn sim(model: CovarianceModel, alternative: AlternativeSpec, n: usize, methods: &[Method], mc: usize, seed: u64) -> Vec<SimResult> {
    let base = SimConfig {
        model,
        alternative,
        n,
        m: n,
        method: methods[0],
        alpha: 0.05,
        boot_reps: 500,
        mc_reps: mc,
        seed,
        fix_scale: false,
        generator: Default::default(),
    };
    let results = run_methods(&base, methods).unwrap();
    for r in &results {
        assert!(r.errors.is_empty(), "failed replicates: {:?}", r.errors);
    }
    results
}

#[test]
fn criterion_4_null_size() {
    let model = CovarianceModel::new(ModelKind::Isotropic, 20).unwrap();
    let r = sim(model, AlternativeSpec::Null, 200, &[Method::Sparse { s: 3, solver: SolverChoice::BruteForce }], 400, 4);
    let rate = r[0].rejection_rate;
    let passed = (0.01..=0.10).contains(&rate);
    report(4, "null size", passed, &format!("rejection rate {rate:.4} over 400 replicates, band [0.01, 0.10]"));
    assert!(passed);
}

#[test]
fn criterion_5_power_alternative_1() {
    let model = CovarianceModel::new(ModelKind::Isotropic, 40).unwrap();
    let r = sim(model, AlternativeSpec::Alt1 { c1: 0.8, support: None }, 1000, &[Method::sparse(40, 5)], 200, 5);
    let rate = r[0].rejection_rate;
    let passed = rate >= 0.8;
    report(5, "power under alternative 1", passed, &format!("rejection rate {rate:.4} over 200 replicates, need >= 0.8"));
    assert!(passed);
}

#[test]
fn criterion_6_baseline_dominance_reversal() {
    let model = CovarianceModel::new(ModelKind::LongRange, 40).unwrap();
    let methods = [Method::sparse(40, 5), Method::Linf];
    let margin = |a: &SimResult, b: &SimResult| {
        let se = (a.standard_error().powi(2) + b.standard_error().powi(2)).sqrt();
        (a.rejection_rate - b.rejection_rate, 2.0 * se)
    };
    let alt2 = sim(model.clone(), AlternativeSpec::Alt2 { c2: 0.35 }, 1000, &methods, 200, 62);
    let alt1 = sim(model, AlternativeSpec::Alt1 { c1: 0.9, support: None }, 1000, &methods, 200, 61);
    let (d2, need2) = margin(&alt2[1], &alt2[0]);
    let (d1, need1) = margin(&alt1[0], &alt1[1]);
    let passed = d2 > need2 && d1 > need1;
    report(
        6,
        "baseline dominance reversal",
        passed,
        &format!(
            "alt2: linf {:.3} vs sparse {:.3} (margin {d2:.3}, need {need2:.3}); alt1: sparse {:.3} vs linf {:.3} (margin {d1:.3}, need {need1:.3})",
            alt2[1].rejection_rate, alt2[0].rejection_rate, alt1[0].rejection_rate, alt1[1].rejection_rate
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_7_density_study() {
    let cfg = DensityConfig { sigma2: 1.0, boot_reps: 2000, seed: 0 };
    let tables = density_study_spherical(&[200, 500], &[10], 2000, &cfg).unwrap();
    let t200 = tables.iter().find(|t| t.n == 200).unwrap();
    let t500 = tables.iter().find(|t| t.n == 500).unwrap();
    let passed = t500.ks_m_boots <= 0.1 && t200.ks_m_boots < t200.ks_n_boots;
    report(
        7,
        "density study",
        passed,
        &format!(
            "n=500: KS m-boots {:.4} (need <= 0.1); n=200: KS m-boots {:.4} vs n-boots {:.4}",
            t500.ks_m_boots, t200.ks_m_boots, t200.ks_n_boots
        ),
    );
    assert!(passed);
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for e in fs::read_dir(&p).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// Exit code, stdout and every file written under `--out`.
type Run = (i32, Vec<u8>, Vec<(PathBuf, Vec<u8>)>);

fn run_cli(args: &[String], threads: usize, out_dir: Option<&Path>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sparsecov"));
    cmd.args(["--threads", &threads.to_string()]);
    if let Some(dir) = out_dir {
        cmd.arg("--out").arg(dir);
    }
    let out = cmd.args(args).output().unwrap();
    let files = out_dir.map(read_tree).unwrap_or_default();
    (out.status.code().unwrap_or(-1), out.stdout, files)
}

#[test]
fn criterion_8_determinism_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let sigma = tmp.path().join("identity8.csv");
    let eye: String = (0..8)
        .map(|i| (0..8).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(&sigma, eye).unwrap();
    let grid = tmp.path().join("grid.json");
    fs::write(
        &grid,
        r#"{"model": {"kind": "short_range", "d": 8}, "sizes": [40], "alternatives": [{"kind": "null"}, {"kind": "alt1", "c1": 2.0}],
            "methods": [{"test": "sparse", "s": 2, "solver": "brute_force"}, {"test": "sparse", "s": 3, "solver": "greedy"}, {"test": "linf"}],
            "mc_reps": 6, "boot_reps": 40}"#,
    )
    .unwrap();
    let (x, y, sigma, grid) = (fixture("null_x.csv"), fixture("null_y.csv"), sigma.display().to_string(), grid.display().to_string());

    let s = |v: &[&str]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>();
    // (args, uses --out)
    let cases: Vec<(Vec<String>, bool)> = vec![
        (s(&["--seed", "7", "two-sample", "--x", &x, "--y", &y, "--s", "3", "--boot", "200"]), false),
        (s(&["--seed", "7", "two-sample", "--x", &x, "--y", &y, "--s", "3", "--boot", "200", "--solver", "tpm"]), false),
        (s(&["--seed", "7", "--format", "csv", "two-sample", "--x", &x, "--y", &y, "--s", "2", "--boot", "200"]), false),
        (s(&["--seed", "7", "one-sample", "--x", &x, "--sigma", &sigma, "--s", "2", "--boot", "200"]), false),
        (s(&["--seed", "7", "one-sample", "--x", &x, "--sigma", &sigma, "--s", "2", "--boot", "200", "--plain"]), false),
        (s(&["--seed", "7", "one-sample", "--x", &x, "--spherical", "1", "--boot", "200"]), false),
        (s(&["--seed", "7", "simulate", "--custom", &grid]), true),
        (s(&["--seed", "7", "density", "--n", "30,60", "--d", "3", "--mc", "50", "--boot", "50"]), true),
        (s(&["--seed", "7", "verify", "--suite", "lipschitz", "--trials", "500"]), false),
        (s(&["--seed", "7", "verify", "--suite", "sandwich", "--trials", "3"]), false),
        (s(&["--seed", "7", "verify", "--suite", "netsize"]), false),
        (s(&["--seed", "7", "verify", "--suite", "oracle", "--trials", "3"]), false),
    ];

    let mut mismatches = Vec::new();
    for (k, (args, uses_out)) in cases.iter().enumerate() {
        let mut runs = Vec::new();
        for threads in [1, 2, 8] {
            let dir = tmp.path().join(format!("case{k}_t{threads}"));
            let run = run_cli(args, threads, uses_out.then_some(dir.as_path()));
            assert!(run.0 == 0 || run.0 == 3, "{args:?} exited with {}", run.0);
            assert!(!run.1.is_empty() || !run.2.is_empty(), "{args:?} produced no artifact");
            runs.push(run);
        }
        if runs.iter().any(|r| r != &runs[0]) {
            mismatches.push(args.join(" "));
        }
    }
    let passed = mismatches.is_empty();
    report(8, "determinism", passed, &format!("{} commands at 1, 2 and 8 threads, {} mismatches", cases.len(), mismatches.len()));
    assert!(passed, "{mismatches:?}");
}

fn square(d: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2usize..=6).prop_flat_map(move |dd| {
        let dd = dd.min(d);
        (Just(dd), vec(-3.0..3.0f64, dd * dd))
    })
}

fn sym_from(d: usize, v: &[f64]) -> SymMatrix {
    SymMatrix::from_upper_fn(d, |i, j| v[i * d + j])
}

fn spd_from(d: usize, v: &[f64]) -> SymMatrix {
    SymMatrix::from_upper_fn(d, |i, j| {
        (0..d).map(|k| v[i * d + k] * v[j * d + k]).sum::<f64>() / d as f64 + if i == j { 0.2 } else { 0.0 }
    })
}

fn close(a: f64, b: f64, tol: f64) -> Result<(), TestCaseError> {
    prop_assert!((a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0), "{a} vs {b}");
    Ok(())
}

fn property(name: &str, cases: u32, test: impl Fn(&mut TestRunner) -> Result<(), String>) -> Option<String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    test(&mut runner).err().map(|e| format!("{name}: {e}"))
}

#[test]
fn criterion_9_algebraic_invariants() {
    const BF: SolverChoice = SolverChoice::BruteForce;
    let mut failures = Vec::new();

    failures.extend(property("sandwich and monotonicity", 128, |r| {
        r.run(&square(6), |(d, v)| {
            let m = sym_from(d, &v);
            let eig = sym_eigenvalues(&m).unwrap();
            let (lo, hi) = (eig.iter().copied().fold(f64::INFINITY, f64::min), eig.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            let diag_max = (0..d).map(|i| m.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
            let diag_min = (0..d).map(|i| m.get(i, i)).fold(f64::INFINITY, f64::min);
            let tol = 1e-10 * (1.0 + hi.abs().max(lo.abs()));
            let mut prev_max = f64::NEG_INFINITY;
            let mut prev_min = f64::INFINITY;
            for s in 1..=d {
                let mx = restricted_max_eig(&m, s, BF).unwrap().value;
                let mn = restricted_min_eig(&m, s, BF).unwrap().value;
                prop_assert!(lo - tol <= mn && mn <= mx + tol && mx <= hi + tol);
                prop_assert!(mx >= prev_max - tol && mn <= prev_min + tol);
                prev_max = mx;
                prev_min = mn;
            }
            close(restricted_max_eig(&m, 1, BF).unwrap().value, diag_max, 1e-12)?;
            close(restricted_min_eig(&m, 1, BF).unwrap().value, diag_min, 1e-12)?;
            close(prev_max, hi, 1e-9)?;
            close(prev_min, lo, 1e-9)?;
            Ok(())
        })
        .map_err(|e| e.to_string())
    }));

    failures.extend(property("scale equivariance and denominator invariance", 128, |r| {
        r.run(&(square(6), square(6), 1usize..=3, 0.01..50.0f64), |((d, va), (d2, vs), s, c)| {
            let d = d.min(d2);
            let a = sym_from(d, &va);
            let sigma = spd_from(d, &vs);
            let s = s.min(d);
            let base = restricted_normalized_sup(&a, &sigma, s, BF).unwrap().value;
            close(restricted_normalized_sup(&a.scaled(c), &sigma, s, BF).unwrap().value, c * base, 1e-9)?;
            close(restricted_normalized_sup(&a.scaled(-c), &sigma, s, BF).unwrap().value, c * base, 1e-9)?;
            close(restricted_normalized_sup(&a.scaled(c), &sigma.scaled(c), s, BF).unwrap().value, base, 1e-9)?;
            Ok(())
        })
        .map_err(|e| e.to_string())
    }));

    failures.extend(property("two-sample symmetry at n = m", 64, |r| {
        r.run(&((2usize..=5), 1usize..=3, vec(-3.0..3.0f64, 2 * 25 * 5)), |(d, s, v)| {
            let n = 25;
            let x = Dataset::new(n, d, v[..n * d].to_vec()).unwrap();
            let y = Dataset::new(n, d, v[n * 5..n * 5 + n * d].to_vec()).unwrap();
            let s = s.min(d);
            let xy = two_sample_q_max(&x, &y, s, BF).unwrap();
            let yx = two_sample_q_max(&y, &x, s, BF).unwrap();
            close(xy.value, yx.value, 1e-10)?;
            prop_assert_eq!(xy.support, yx.support);
            Ok(())
        })
        .map_err(|e| e.to_string())
    }));

    failures.extend(property("quantile monotonicity", 256, |r| {
        r.run(&(vec(-100.0..100.0f64, 1..200), 0.0..1.0f64, 0.0..1.0f64), |(samples, p, q)| {
            let dist = EmpiricalDistribution::new(samples, SeedProvenance { seed: 0, streams: vec![] }).unwrap();
            let (p, q) = if p <= q { (p, q) } else { (q, p) };
            prop_assert!(dist.order_quantile(p) <= dist.order_quantile(q));
            if p > 0.0 && q < 1.0 {
                // larger α, smaller critical value
                prop_assert!(empirical_quantile(&dist, q) <= empirical_quantile(&dist, p));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    }));

    failures.extend(property("negation identity", 128, |r| {
        r.run(&(square(6), 1usize..=6), |((d, v), s)| {
            let m = sym_from(d, &v);
            let s = s.min(d);
            let min = restricted_min_eig(&m, s, BF).unwrap().value;
            let neg = restricted_max_eig(&m.scaled(-1.0), s, BF).unwrap().value;
            close(min, -neg, 1e-12)?;
            Ok(())
        })
        .map_err(|e| e.to_string())
    }));

    let passed = failures.is_empty();
    report(9, "algebraic invariants", passed, &format!("5 properties, {} failing", failures.len()));
    assert!(passed, "{failures:#?}");
}
