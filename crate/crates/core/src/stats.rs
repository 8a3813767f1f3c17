//! Sample covariance and the restricted spectral statistics built on it.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::sparse_spectral::{RestrictedEigResult, RestrictedPencil, SolverChoice, SolverOptions};
use crate::support::SupportSet;

/// `n×d` observation matrix, one observation per row.
///
/// Rows are used as given: the second-moment form `n⁻¹ Σ xᵢxᵢᵀ` treats them
/// as mean-zero. [`Dataset::centered`] subtracts column means explicitly and
/// records them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr", into = "DatasetRepr")]
pub struct Dataset {
    n: usize,
    d: usize,
    rows: Vec<f64>,
    centered: bool,
    column_means: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct DatasetRepr {
    n: usize,
    d: usize,
    rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    column_means: Option<Vec<f64>>,
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = Error;

    fn try_from(r: DatasetRepr) -> Result<Self> {
        if r.rows.len() != r.n {
            return Err(invalid(format!("dataset declares n = {} but has {} rows", r.n, r.rows.len())));
        }
        let mut ds = Dataset::from_rows(&r.rows)?;
        if ds.d != r.d {
            return Err(invalid(format!("dataset declares d = {} but rows have length {}", r.d, ds.d)));
        }
        if let Some(means) = r.column_means {
            ds.centered = true;
            ds.column_means = Some(means);
        }
        Ok(ds)
    }
}

impl From<Dataset> for DatasetRepr {
    fn from(ds: Dataset) -> Self {
        DatasetRepr { n: ds.n, d: ds.d, rows: ds.rows().map(<[f64]>::to_vec).collect(), column_means: ds.column_means }
    }
}

impl Dataset {
    pub fn new(n: usize, d: usize, rows: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("dataset needs at least one row and one column"));
        }
        if rows.len() != n * d {
            return Err(Error::DimensionMismatch { left: n * d, right: rows.len() });
        }
        if let Some(p) = rows.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!("non-finite value at row {}, column {}", p / d + 1, p % d + 1)));
        }
        Ok(Self { n, d, rows, centered: false, column_means: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::Parse {
                    line: i + 1,
                    column: None,
                    message: format!("expected {d} values, found {}", r.len()),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::new(rows.len(), d, flat)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn column_means(&self) -> Option<&[f64]> {
        self.column_means.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rows
    }

    /// Copy with column means subtracted; the means are kept as metadata.
    pub fn centered(&self) -> Self {
        let mut means = vec![0.0; self.d];
        for r in self.rows() {
            for (m, x) in means.iter_mut().zip(r) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= self.n as f64);
        let rows = self.rows().flat_map(|r| r.iter().zip(&means).map(|(x, m)| x - m)).collect();
        Self { n: self.n, d: self.d, rows, centered: true, column_means: Some(means) }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { rows: self.rows.iter().map(|x| c * x).collect(), ..self.clone() }
    }

    /// Reorders columns so that new column `j` is old column `perm[j]`.
    pub fn permuted_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.d);
        let rows = self.rows().flat_map(|r| perm.iter().map(move |&p| r[p])).collect();
        Self { rows, ..self.clone() }
    }

    /// Maps every row `x` to `Q x` for a row-major `d×d` matrix `Q`.
    pub fn transformed(&self, q: &[f64]) -> Self {
        let d = self.d;
        assert_eq!(q.len(), d * d);
        let rows = self.rows().flat_map(|r| (0..d).map(move |i| linalg::dot(&q[i * d..(i + 1) * d], r))).collect();
        Self { rows, ..self.clone() }
    }

    /// Selects rows by index (with repetition), as in a nonparametric resample.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let rows = idx.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Self { n: idx.len(), d: self.d, rows, centered: self.centered, column_means: self.column_means.clone() }
    }
}

/// `Σ wᵢ xᵢxᵢᵀ` as a full row-major buffer.
pub(crate) fn weighted_gram(x: &Dataset, weights: &[f64]) -> Vec<f64> {
    let d = x.d;
    let mut g = vec![0.0; d * d];
    for (r, &w) in x.rows().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for j in 0..d {
            let wj = w * r[j];
            let row = &mut g[j * d..(j + 1) * d];
            for k in j..d {
                row[k] += wj * r[k];
            }
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            g[k * d + j] = g[j * d + k];
        }
    }
    g
}

/// `n⁻¹ Σ xᵢxᵢᵀ` (second-moment form, divisor `n`, no centering).
pub fn sample_covariance(x: &Dataset) -> SymMatrix {
    let g = weighted_gram(x, &vec![1.0 / x.n as f64; x.n]);
    SymMatrix::symmetrized(x.d, g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    NormalizedOneSample,
    PlainOneSample,
    TwoSample,
    EntrywiseMax,
    StandardizedEntrywiseMax,
}

/// A scaled restricted statistic together with the witness that attains it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticValue {
    pub kind: StatisticKind,
    pub value: f64,
    pub scale_factor: f64,
    /// The sup before scaling; `value == scale_factor * unscaled`.
    pub unscaled: f64,
    pub support: SupportSet,
    /// Restricted optimum for spectral statistics; absent for entrywise ones.
    pub inner: Option<RestrictedEigResult>,
}

impl StatisticValue {
    pub(crate) fn from_inner(kind: StatisticKind, scale_factor: f64, inner: RestrictedEigResult) -> Self {
        Self {
            kind,
            value: scale_factor * inner.value,
            scale_factor,
            unscaled: inner.value,
            support: inner.support.clone(),
            inner: Some(inner),
        }
    }
}

fn check_dims(x: &Dataset, sigma: &SymMatrix) -> Result<()> {
    if x.d != sigma.dim() {
        return Err(Error::DimensionMismatch { left: x.d, right: sigma.dim() });
    }
    Ok(())
}

/// `√n sup |vᵀ(Σ̂ − Σ)v| / vᵀΣv`.
pub fn q_hat_max(x: &Dataset, sigma: &SymMatrix, s: usize, solver: SolverChoice) -> Result<StatisticValue> {
    check_dims(x, sigma)?;
    let diff = sample_covariance(x).sub(sigma)?;
    let pencil = RestrictedPencil::new(sigma, s, solver, SolverOptions::default())?;
    Ok(StatisticValue::from_inner(StatisticKind::NormalizedOneSample, (x.n as f64).sqrt(), pencil.sup(&diff)?))
}

/// `√n sup |vᵀ(Σ̂ − Σ)v|`.
pub fn q_tilde_max(x: &Dataset, sigma: &SymMatrix, s: usize, solver: SolverChoice) -> Result<StatisticValue> {
    check_dims(x, sigma)?;
    let diff = sample_covariance(x).sub(sigma)?;
    let pencil = RestrictedPencil::new(&SymMatrix::identity(x.d), s, solver, SolverOptions::default())?;
    Ok(StatisticValue::from_inner(StatisticKind::PlainOneSample, (x.n as f64).sqrt(), pencil.sup(&diff)?))
}

/// Second moments shared by the two-sample statistic and its bootstrap.
#[derive(Clone, Debug)]
pub struct TwoSampleMoments {
    pub n: usize,
    pub m: usize,
    pub sigma1: SymMatrix,
    pub sigma2: SymMatrix,
    /// `Σ̂₁/n + Σ̂₂/m`.
    pub denom: SymMatrix,
    /// `√((n+m)/(nm))`.
    pub scale: f64,
}

impl TwoSampleMoments {
    pub fn new(x: &Dataset, y: &Dataset) -> Result<Self> {
        if x.d != y.d {
            return Err(Error::DimensionMismatch { left: x.d, right: y.d });
        }
        let (n, m) = (x.n, y.n);
        let sigma1 = sample_covariance(x);
        let sigma2 = sample_covariance(y);
        let denom = sigma1.lin_comb(1.0 / n as f64, &sigma2, 1.0 / m as f64)?;
        let (nf, mf) = (n as f64, m as f64);
        Ok(Self { n, m, sigma1, sigma2, denom, scale: ((nf + mf) / (nf * mf)).sqrt() })
    }

    pub fn difference(&self) -> SymMatrix {
        self.sigma1.sub(&self.sigma2).expect("same dimension")
    }

    pub fn statistic(&self, pencil: &RestrictedPencil) -> Result<StatisticValue> {
        Ok(StatisticValue::from_inner(StatisticKind::TwoSample, self.scale, pencil.sup(&self.difference())?))
    }
}

/// `√((n+m)/(nm)) sup |vᵀ(Σ̂₁ − Σ̂₂)v| / vᵀ(Σ̂₁/n + Σ̂₂/m)v`.
pub fn two_sample_q_max(x: &Dataset, y: &Dataset, s: usize, solver: SolverChoice) -> Result<StatisticValue> {
    let mo = TwoSampleMoments::new(x, y)?;
    let pencil = RestrictedPencil::new(&mo.denom, s, solver, SolverOptions::default())?;
    mo.statistic(&pencil)
}

/// `(λ_max(Σ̂), λ_min(Σ̂))`.
pub fn extreme_eigs(x: &Dataset) -> Result<(f64, f64)> {
    let vals = linalg::sym_eigenvalues(&sample_covariance(x))?;
    Ok((vals[0], vals[vals.len() - 1]))
}

/// Warning text when `s` is not below `min(n, m)/10`.
pub fn sparsity_warning(n: usize, m: usize, s: usize) -> Option<String> {
    let limit = n.min(m) as f64 / 10.0;
    ((s as f64) >= limit).then(|| {
        format!("s = {s} is not below min(n, m)/10 = {limit}; bootstrap calibration may be unreliable")
    })
}
