//! Restricted (s-sparse) eigenvalue problems.
//!
//! `λ_max,s(M)` is the largest `vᵀMv` over unit vectors with at most `s`
//! nonzero coordinates. For a fixed support `I` the feasible vectors are the
//! unit sphere of `R^I`, so the restricted optimum is the best top eigenvalue
//! over `s×s` principal submatrices (eigenvalues interlace, so supports of size
//! exactly `s` suffice). The normalized sup `|vᵀAv| / vᵀΣv` reduces the same
//! way, support by support, to the whitened pencil `L_I⁻¹ A_II L_I⁻ᵀ`.
//!
//! Brute force enumerates every support and is exact. Greedy and truncated
//! power return feasible lower bounds and are flagged as uncertified.

mod greedy;
mod pencil;
mod tpm;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, SymMatrix};
pub use crate::support::SupportSet;
use crate::support::{binomial, binomial_u64, next_combination, unrank_combination};

pub use greedy::greedy_support_search;
pub(crate) use greedy::greedy_search_fallible;
pub use pencil::RestrictedPencil;
pub use tpm::{truncated_power_max, truncated_power_max_seeded};

/// Default cap on the number of supports brute force may enumerate.
pub const DEFAULT_ENUMERATION_CAP: f64 = 2.0e6;
/// Supports per parallel work unit in brute-force scans.
const CHUNK: u64 = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    BruteForce,
    Greedy,
    TruncatedPower,
}

impl SolverChoice {
    /// Brute force when it is cheap (at most 10⁴ supports), greedy otherwise.
    pub fn auto(d: usize, s: usize) -> Self {
        if binomial(d, s.min(d)) <= 1.0e4 {
            SolverChoice::BruteForce
        } else {
            SolverChoice::Greedy
        }
    }

    pub fn is_exact(self) -> bool {
        self == SolverChoice::BruteForce
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverChoice::BruteForce => "brute",
            SolverChoice::Greedy => "greedy",
            SolverChoice::TruncatedPower => "tpm",
        })
    }
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "brute" | "brute_force" | "bruteforce" => Ok(SolverChoice::BruteForce),
            "greedy" => Ok(SolverChoice::Greedy),
            "tpm" | "truncated_power" => Ok(SolverChoice::TruncatedPower),
            other => Err(invalid(format!("unknown solver '{other}' (expected brute, greedy or tpm)"))),
        }
    }
}

/// Tuning knobs shared by the restricted solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub enumeration_cap: f64,
    pub tpm_restarts: usize,
    pub tpm_iter_cap: usize,
    pub tpm_seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { enumeration_cap: DEFAULT_ENUMERATION_CAP, tpm_restarts: 10, tpm_iter_cap: 200, tpm_seed: 0 }
    }
}

/// Optimal (or best found) value of a restricted problem with its witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedEigResult {
    pub value: f64,
    pub support: SupportSet,
    /// Unit vector in all `d` coordinates, zero off the support.
    pub vector: Vec<f64>,
    pub solver: SolverChoice,
    pub certified_exact: bool,
}

impl RestrictedEigResult {
    pub fn sparsity(&self) -> usize {
        self.vector.iter().filter(|x| **x != 0.0).count()
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.vector.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `|vᵀMv - value| / max(|value|, tiny)`.
    pub fn quadratic_form_error(&self, m: &SymMatrix) -> f64 {
        let q = m.quad_form(&self.vector);
        (q - self.value).abs() / self.value.abs().max(1e-300)
    }

    /// Relative error of `|vᵀAv| / vᵀΣv` against `value`.
    pub fn ratio_error(&self, a: &SymMatrix, sigma: &SymMatrix) -> f64 {
        let r = a.quad_form(&self.vector).abs() / sigma.quad_form(&self.vector);
        (r - self.value).abs() / self.value.abs().max(1e-300)
    }

    fn negated(mut self) -> Self {
        self.value = -self.value;
        self
    }
}

pub(crate) fn check_sparsity(d: usize, s: usize) -> Result<()> {
    if s == 0 || s > d {
        return Err(invalid(format!("sparsity s must satisfy 1 <= s <= d (s = {s}, d = {d})")));
    }
    Ok(())
}

pub(crate) fn check_cap(d: usize, s: usize, cap: f64) -> Result<()> {
    let count = binomial(d, s);
    if count > cap {
        return Err(Error::CapExceeded { what: "brute-force support count C(d, s)", count, cap });
    }
    Ok(())
}

/// Embeds a support-local vector into `d` coordinates with unit norm.
pub(crate) fn embed_unit(d: usize, support: &[usize], local: &[f64]) -> Vec<f64> {
    let norm = local.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v = vec![0.0; d];
    for (&i, &x) in support.iter().zip(local) {
        v[i] = x / norm;
    }
    v
}

/// Scans every size-`s` support of `0..d` in lexicographic order and returns
/// the best value with its rank. Ties go to the smallest rank, independent of
/// how chunks are scheduled.
pub(crate) fn scan_supports<S, F>(d: usize, s: usize, make_scratch: impl Fn() -> S + Sync, eval: F) -> Result<(f64, u64)>
where
    F: Fn(&[usize], u64, &mut S) -> Result<f64> + Sync,
{
    let total = binomial_u64(d, s).ok_or_else(|| invalid("support count overflows u64"))?;
    let chunks = total.div_ceil(CHUNK);
    let per_chunk = |c: u64| -> Result<(f64, u64)> {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(total);
        let mut idx = unrank_combination(start, d, s);
        let mut scratch = make_scratch();
        let mut best = (f64::NEG_INFINITY, start);
        for rank in start..end {
            let v = eval(&idx, rank, &mut scratch)?;
            if v > best.0 {
                best = (v, rank);
            }
            if rank + 1 < end {
                next_combination(&mut idx, d);
            }
        }
        Ok(best)
    };
    let partial: Vec<Result<(f64, u64)>> = if chunks > 1 {
        (0..chunks).into_par_iter().map(per_chunk).collect()
    } else {
        (0..chunks).map(per_chunk).collect()
    };
    let mut best = (f64::NEG_INFINITY, 0);
    for p in partial {
        let p = p?;
        if p.0 > best.0 {
            best = p;
        }
    }
    Ok(best)
}

fn brute_force_max(m: &SymMatrix, s: usize) -> Result<RestrictedEigResult> {
    let d = m.dim();
    let (_, rank) = scan_supports(
        d,
        s,
        || vec![0.0; s * s],
        |idx, _, buf| {
            m.gather_into(idx, buf);
            Ok(linalg::extreme_eigenvalues_in_place(buf, s)?.0)
        },
    )?;
    let support = SupportSet::new(unrank_combination(rank, d, s))?;
    top_eigen_on_support(m, support, SolverChoice::BruteForce, true)
}

/// Top eigenpair of `M[I, I]`, embedded back into `d` coordinates.
pub(crate) fn top_eigen_on_support(
    m: &SymMatrix,
    support: SupportSet,
    solver: SolverChoice,
    certified_exact: bool,
) -> Result<RestrictedEigResult> {
    let sub = linalg::submatrix(m, &support)?;
    let eig = linalg::sym_eigen(&sub)?;
    let vector = embed_unit(m.dim(), support.indices(), &eig.vector(0));
    Ok(RestrictedEigResult { value: eig.max(), support, vector, solver, certified_exact })
}

pub fn restricted_max_eig(m: &SymMatrix, s: usize, solver: SolverChoice) -> Result<RestrictedEigResult> {
    restricted_max_eig_with(m, s, solver, &SolverOptions::default())
}

pub fn restricted_max_eig_with(
    m: &SymMatrix,
    s: usize,
    solver: SolverChoice,
    opts: &SolverOptions,
) -> Result<RestrictedEigResult> {
    let d = m.dim();
    check_sparsity(d, s)?;
    if s == d {
        return top_eigen_on_support(m, SupportSet::full(d), solver, true);
    }
    match solver {
        SolverChoice::BruteForce => {
            check_cap(d, s, opts.enumeration_cap)?;
            brute_force_max(m, s)
        }
        SolverChoice::Greedy => {
            let mut buf = vec![0.0; s * s];
            let support = greedy_search_fallible(d, s, |idx| {
                let k = idx.len();
                m.gather_into(idx, &mut buf[..k * k]);
                Ok(linalg::extreme_eigenvalues_in_place(&mut buf[..k * k], k)?.0)
            })?;
            top_eigen_on_support(m, support, SolverChoice::Greedy, false)
        }
        SolverChoice::TruncatedPower => {
            truncated_power_max_seeded(m, s, opts.tpm_restarts, opts.tpm_iter_cap, opts.tpm_seed)
        }
    }
}

/// `λ_min,s(M) = -λ_max,s(-M)`.
pub fn restricted_min_eig(m: &SymMatrix, s: usize, solver: SolverChoice) -> Result<RestrictedEigResult> {
    restricted_min_eig_with(m, s, solver, &SolverOptions::default())
}

pub fn restricted_min_eig_with(
    m: &SymMatrix,
    s: usize,
    solver: SolverChoice,
    opts: &SolverOptions,
) -> Result<RestrictedEigResult> {
    Ok(restricted_max_eig_with(&m.scaled(-1.0), s, solver, opts)?.negated())
}

/// Restricted condition number `sqrt(λ_max,s / λ_min,s)`, computed exactly.
pub fn gamma_s(sigma: &SymMatrix, s: usize) -> Result<f64> {
    let hi = restricted_max_eig(sigma, s, SolverChoice::BruteForce)?;
    let lo = restricted_min_eig(sigma, s, SolverChoice::BruteForce)?;
    if lo.value.is_nan() || lo.value <= 0.0 {
        return Err(Error::NotPositiveDefinite { pivot: lo.support.indices()[0], value: lo.value });
    }
    Ok((hi.value / lo.value).sqrt())
}

/// `sup |vᵀAv| / vᵀΣv` over s-sparse unit vectors.
pub fn restricted_normalized_sup(
    a: &SymMatrix,
    sigma: &SymMatrix,
    s: usize,
    solver: SolverChoice,
) -> Result<RestrictedEigResult> {
    restricted_normalized_sup_with(a, sigma, s, solver, &SolverOptions::default())
}

pub fn restricted_normalized_sup_with(
    a: &SymMatrix,
    sigma: &SymMatrix,
    s: usize,
    solver: SolverChoice,
    opts: &SolverOptions,
) -> Result<RestrictedEigResult> {
    if a.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: sigma.dim() });
    }
    RestrictedPencil::new(sigma, s, solver, opts.clone())?.sup(a)
}
