//! Restricted normalized sup `sup_v |vᵀAv| / vᵀDv` with a fixed denominator.
//!
//! The denominator is fixed across many numerators in the bootstrap, so the
//! per-support inverse Cholesky factors are computed once here and reused.

use rayon::prelude::*;

use super::{
    check_cap, check_sparsity, embed_unit, greedy_search_fallible, scan_supports, truncated_power_max_seeded,
    RestrictedEigResult, SolverChoice, SolverOptions, CHUNK,
};
use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::support::{binomial_u64, next_combination, unrank_combination, SupportSet};

/// Largest number of cached factor entries (packed lower triangles).
const FACTOR_CACHE_BUDGET: u64 = 1 << 24;

struct Scratch {
    l: Vec<f64>,
    g: Vec<f64>,
    a: Vec<f64>,
    tmp: Vec<f64>,
    w: Vec<f64>,
}

impl Scratch {
    fn new(s: usize) -> Self {
        let n = s * s;
        Self { l: vec![0.0; n], g: vec![0.0; n], a: vec![0.0; n], tmp: vec![0.0; n], w: vec![0.0; n] }
    }
}

/// Solver for `sup |vᵀAv| / vᵀDv` over s-sparse unit vectors for a fixed `D`.
pub struct RestrictedPencil {
    denom: SymMatrix,
    s: usize,
    solver: SolverChoice,
    opts: SolverOptions,
    /// Packed `L_I⁻¹` per support, in lexicographic rank order.
    factors: Option<Vec<f64>>,
    inv_sqrt_diag: Vec<f64>,
}

impl RestrictedPencil {
    pub fn new(denom: &SymMatrix, s: usize, solver: SolverChoice, opts: SolverOptions) -> Result<Self> {
        let d = denom.dim();
        check_sparsity(d, s)?;
        let solver = if s == d { SolverChoice::BruteForce } else { solver };
        let mut inv_sqrt_diag = Vec::with_capacity(d);
        for (i, x) in denom.diag().into_iter().enumerate() {
            if x.is_nan() || x <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: i, value: x });
            }
            inv_sqrt_diag.push(1.0 / x.sqrt());
        }
        let mut out = Self { denom: denom.clone(), s, solver, opts, factors: None, inv_sqrt_diag };
        if solver == SolverChoice::BruteForce {
            check_cap(d, s, out.opts.enumeration_cap)?;
            let total = binomial_u64(d, s).expect("within cap");
            let tri = (s * (s + 1) / 2) as u64;
            if total * tri <= FACTOR_CACHE_BUDGET {
                out.factors = Some(out.build_factor_cache(total)?);
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.denom.dim()
    }

    pub fn sparsity(&self) -> usize {
        self.s
    }

    pub fn solver(&self) -> SolverChoice {
        self.solver
    }

    pub fn denominator(&self) -> &SymMatrix {
        &self.denom
    }

    fn build_factor_cache(&self, total: u64) -> Result<Vec<f64>> {
        let (d, s) = (self.dim(), self.s);
        let tri = s * (s + 1) / 2;
        let chunks = total.div_ceil(CHUNK);
        let parts: Vec<Result<Vec<f64>>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(total);
                let mut idx = unrank_combination(start, d, s);
                let mut scratch = Scratch::new(s);
                let mut packed = Vec::with_capacity((end - start) as usize * tri);
                for rank in start..end {
                    self.factor_inverse(&idx, &mut scratch)?;
                    for i in 0..s {
                        packed.extend_from_slice(&scratch.g[i * s..i * s + i + 1]);
                    }
                    if rank + 1 < end {
                        next_combination(&mut idx, d);
                    }
                }
                Ok(packed)
            })
            .collect();
        let mut all = Vec::with_capacity(total as usize * tri);
        for p in parts {
            all.extend(p?);
        }
        Ok(all)
    }

    /// Writes `L_I⁻¹` for the support into `scratch.g`.
    fn factor_inverse(&self, idx: &[usize], scratch: &mut Scratch) -> Result<()> {
        let k = idx.len();
        let l = &mut scratch.l[..k * k];
        self.denom.gather_into(idx, l);
        linalg::cholesky_in_place(l, k).map_err(|e| match e {
            Error::NotPositiveDefinite { pivot, value } => Error::NotPositiveDefinite { pivot: idx[pivot], value },
            other => other,
        })?;
        linalg::lower_inverse_into(l, k, &mut scratch.g[..k * k]);
        Ok(())
    }

    /// Restricted whitened spectral norm on one support; `scratch.g` must hold `L_I⁻¹`.
    fn whitened_norm(a: &SymMatrix, idx: &[usize], scratch: &mut Scratch) -> Result<f64> {
        let k = idx.len();
        a.gather_into(idx, &mut scratch.a[..k * k]);
        linalg::congruence_lower(
            &scratch.g[..k * k],
            &scratch.a[..k * k],
            k,
            &mut scratch.tmp[..k * k],
            &mut scratch.w[..k * k],
        );
        let (hi, lo) = linalg::extreme_eigenvalues_in_place(&mut scratch.w[..k * k], k)?;
        Ok(hi.abs().max(lo.abs()))
    }

    fn support_value(&self, a: &SymMatrix, idx: &[usize], scratch: &mut Scratch) -> Result<f64> {
        self.factor_inverse(idx, scratch)?;
        Self::whitened_norm(a, idx, scratch)
    }

    fn cached_value(&self, factors: &[f64], a: &SymMatrix, idx: &[usize], rank: u64, scratch: &mut Scratch) -> Result<f64> {
        let s = self.s;
        let tri = s * (s + 1) / 2;
        let packed = &factors[rank as usize * tri..(rank as usize + 1) * tri];
        let mut p = 0;
        for i in 0..s {
            for j in 0..s {
                scratch.g[i * s + j] = if j <= i {
                    p += 1;
                    packed[p - 1]
                } else {
                    0.0
                };
            }
        }
        Self::whitened_norm(a, idx, scratch)
    }

    fn best_support(&self, a: &SymMatrix) -> Result<(SupportSet, f64)> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: a.dim(), right: self.dim() });
        }
        let (d, s) = (self.dim(), self.s);
        match self.solver {
            SolverChoice::BruteForce => {
                let (value, rank) = match &self.factors {
                    Some(f) => scan_supports(d, s, || Scratch::new(s), |idx, rank, sc| self.cached_value(f, a, idx, rank, sc))?,
                    None => scan_supports(d, s, || Scratch::new(s), |idx, _, sc| self.support_value(a, idx, sc))?,
                };
                Ok((SupportSet::new(unrank_combination(rank, d, s))?, value))
            }
            SolverChoice::Greedy => {
                let mut scratch = Scratch::new(s);
                let support = greedy_search_fallible(d, s, |idx| self.support_value(a, idx, &mut scratch))?;
                let value = self.support_value(a, support.indices(), &mut scratch)?;
                Ok((support, value))
            }
            SolverChoice::TruncatedPower => {
                // candidate supports from the diagonally scaled numerator, then exact pencil values
                let scaled = SymMatrix::from_upper_fn(d, |i, j| a.get(i, j) * self.inv_sqrt_diag[i] * self.inv_sqrt_diag[j]);
                let mut scratch = Scratch::new(s);
                let mut best: Option<(SupportSet, f64)> = None;
                for sign in [1.0, -1.0] {
                    let m = if sign > 0.0 { scaled.clone() } else { scaled.scaled(-1.0) };
                    let r = truncated_power_max_seeded(&m, s, self.opts.tpm_restarts, self.opts.tpm_iter_cap, self.opts.tpm_seed)?;
                    let v = self.support_value(a, r.support.indices(), &mut scratch)?;
                    let better = match &best {
                        None => true,
                        Some((bs, bv)) => v > *bv || (v == *bv && r.support < *bs),
                    };
                    if better {
                        best = Some((r.support, v));
                    }
                }
                Ok(best.expect("two candidates"))
            }
        }
    }

    /// Value of the restricted sup only.
    pub fn sup_value(&self, a: &SymMatrix) -> Result<f64> {
        Ok(self.best_support(a)?.1)
    }

    /// Restricted sup with its attaining support and direction.
    pub fn sup(&self, a: &SymMatrix) -> Result<RestrictedEigResult> {
        let (support, _) = self.best_support(a)?;
        self.witness(a, support)
    }

    /// Exact pencil optimum on a given support, with the direction mapped back
    /// to `d` coordinates. For `W u = λ u`, `v = L⁻ᵀ u` attains `λ`.
    pub fn witness(&self, a: &SymMatrix, support: SupportSet) -> Result<RestrictedEigResult> {
        let a_sub = linalg::submatrix(a, &support)?;
        let d_sub = linalg::submatrix(&self.denom, &support)?;
        let chol = linalg::cholesky(&d_sub).map_err(|e| match e {
            Error::NotPositiveDefinite { pivot, value } => {
                Error::NotPositiveDefinite { pivot: support.indices()[pivot], value }
            }
            other => other,
        })?;
        let w = linalg::whiten_pencil(&a_sub, &d_sub)?;
        let eig = linalg::sym_eigen(&w)?;
        let k = support.len();
        let pick = if eig.max().abs() >= eig.min().abs() { 0 } else { k - 1 };
        let mut local = eig.vector(pick);
        chol.solve_upper(&mut local);
        let vector = embed_unit(self.dim(), support.indices(), &local);
        Ok(RestrictedEigResult {
            value: eig.values[pick].abs(),
            support,
            vector,
            solver: self.solver,
            certified_exact: self.solver.is_exact(),
        })
    }
}
