//! Dense symmetric linear algebra: Jacobi eigensolver, Cholesky factorization,
//! pencil whitening and principal submatrix extraction.
//!
//! Everything here works on small-to-moderate dense matrices stored row-major.
//! Besides the owning [`SymMatrix`] API there are slice-level kernels
//! (`*_in_place`) used by the per-support hot loops of the restricted solvers,
//! which evaluate millions of tiny pencils and cannot afford allocation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::support::SupportSet;

/// Cap on the number of cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius norm, relative to the input norm, at which Jacobi stops.
pub const JACOBI_REL_TOL: f64 = 1e-12;
/// A Cholesky pivot must exceed this fraction of the largest diagonal entry.
pub const PIVOT_REL_TOL: f64 = 1e-12;

/// Dense symmetric matrix, row-major, exactly symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    d: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<MatrixRepr> for SymMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        if r.entries.len() != r.d {
            return Err(Error::DimensionMismatch { left: r.d, right: r.entries.len() });
        }
        SymMatrix::from_rows(&r.entries)
    }
}

impl From<SymMatrix> for MatrixRepr {
    fn from(m: SymMatrix) -> Self {
        MatrixRepr { d: m.dim, entries: m.to_rows() }
    }
}

impl SymMatrix {
    /// Builds a matrix from row-major entries. The input must be symmetric up
    /// to a relative tolerance of 1e-10; the stored matrix is `(A + Aᵀ)/2`.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: dim * dim, right: data.len() });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!("non-finite matrix entry at ({}, {})", pos / dim + 1, pos % dim + 1)));
        }
        let scale = data.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (data[i * dim + j], data[j * dim + i]);
                if (a - b).abs() > 1e-10 * scale {
                    return Err(invalid(format!(
                        "matrix is not symmetric at ({}, {}): {a} vs {b}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self::symmetrized(dim, data))
    }

    /// Builds `(A + Aᵀ)/2` without checking how asymmetric `A` was.
    pub fn symmetrized(dim: usize, mut data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim, "data length must be dim²");
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg;
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Entry `(i, j)` is `f(i, j)` for `i <= j`, mirrored below the diagonal.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * dim + i] = v;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|x| c * x).collect() }
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: f64, other: &SymMatrix, beta: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| alpha * a + beta * b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn add(&self, other: &SymMatrix) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|i| dot(self.row(i), v)).collect()
    }

    /// `vᵀ A v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim);
        let mut acc = 0.0;
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                acc += vi * dot(self.row(i), v);
            }
        }
        acc
    }

    /// Applies `P A Pᵀ` where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim);
        Self::from_upper_fn(self.dim, |i, j| self.get(perm[i], perm[j]))
    }

    /// Copies the principal block indexed by `idx` into `out` (row-major, `k×k`).
    #[inline]
    pub fn gather_into(&self, idx: &[usize], out: &mut [f64]) {
        let k = idx.len();
        for (a, &i) in idx.iter().enumerate() {
            let row = self.row(i);
            for (b, &j) in idx.iter().enumerate() {
                out[a * k + b] = row[j];
            }
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Full symmetric eigendecomposition with eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub values: Vec<f64>,
    /// Row-major `d×d`; column `k` is the eigenvector for `values[k]`.
    pub vectors: Vec<f64>,
    dim: usize,
}

impl EigenPair {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.vectors[i * self.dim + k]).collect()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        self.values[self.dim - 1]
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let d = self.dim;
        SymMatrix::from_upper_fn(d, |i, j| {
            (0..d).map(|k| self.vectors[i * d + k] * self.values[k] * self.vectors[j * d + k]).sum()
        })
    }
}

/// Cyclic Jacobi with threshold sweeps on a row-major symmetric `n×n` buffer.
///
/// On return the diagonal of `a` holds the eigenvalues (unsorted). When `v` is
/// given it must hold the identity on entry and receives the eigenvectors as
/// columns.
pub fn jacobi_in_place(a: &mut [f64], n: usize, mut v: Option<&mut [f64]>) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = JACOBI_REL_TOL * norm;
    let off_norm = |a: &[f64]| {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    for sweep in 0..JACOBI_MAX_SWEEPS {
        let off = off_norm(a);
        if off <= tol {
            return Ok(());
        }
        let thresh = if sweep < 3 {
            let sum_abs: f64 = (0..n).flat_map(|p| ((p + 1)..n).map(move |q| (p, q))).map(|(p, q)| a[p * n + q].abs()).sum();
            0.2 * sum_abs / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = 100.0 * apq.abs();
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh || apq == 0.0 {
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp - s * (akq + akp * tau);
                    let new_kq = akq + s * (akp - akq * tau);
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp - s * (vkq + vkp * tau);
                        v[k * n + q] = vkq + s * (vkp - vkq * tau);
                    }
                }
            }
        }
    }
    let residual = off_norm(a);
    if residual <= tol {
        Ok(())
    } else {
        Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS, residual })
    }
}

/// Extreme eigenvalues `(max, min)` of a small symmetric buffer; `a` is clobbered.
pub fn extreme_eigenvalues_in_place(a: &mut [f64], n: usize) -> Result<(f64, f64)> {
    match n {
        1 => Ok((a[0], a[0])),
        2 => {
            let (x, y, z) = (a[0], a[1], a[3]);
            let mid = 0.5 * (x + z);
            let rad = (0.5 * (x - z)).hypot(y);
            Ok((mid + rad, mid - rad))
        }
        _ => {
            jacobi_in_place(a, n, None)?;
            let mut hi = f64::NEG_INFINITY;
            let mut lo = f64::INFINITY;
            for i in 0..n {
                hi = hi.max(a[i * n + i]);
                lo = lo.min(a[i * n + i]);
            }
            Ok((hi, lo))
        }
    }
}

/// Full spectral decomposition, eigenvalues descending.
pub fn sym_eigen(a: &SymMatrix) -> Result<EigenPair> {
    let n = a.dim;
    let mut work = a.data.clone();
    let mut vecs = vec![0.0; n * n];
    for i in 0..n {
        vecs[i * n + i] = 1.0;
    }
    jacobi_in_place(&mut work, n, Some(&mut vecs))?;
    let raw: Vec<f64> = (0..n).map(|i| work[i * n + i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep Jacobi output order
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
    let values = order.iter().map(|&k| raw[k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + new_k] = vecs[i * n + old_k];
        }
    }
    Ok(EigenPair { values, vectors, dim: n })
}

/// Eigenvalues only, descending.
pub fn sym_eigenvalues(a: &SymMatrix) -> Result<Vec<f64>> {
    let n = a.dim;
    let mut work = a.data.clone();
    jacobi_in_place(&mut work, n, None)?;
    let mut values: Vec<f64> = (0..n).map(|i| work[i * n + i]).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = A`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    dim: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major `d×d`, zeros above the diagonal.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn reconstruct(&self) -> SymMatrix {
        let d = self.dim;
        let l = &self.lower;
        SymMatrix::from_upper_fn(d, |i, j| (0..=i.min(j)).map(|k| l[i * d + k] * l[j * d + k]).sum())
    }

    /// Solves `L x = b` in place.
    pub fn solve_lower(&self, b: &mut [f64]) {
        forward_substitute(&self.lower, self.dim, b);
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn solve_upper(&self, b: &mut [f64]) {
        back_substitute_transposed(&self.lower, self.dim, b);
    }
}

/// In-place Cholesky of a row-major SPD buffer; the lower triangle receives
/// `L` and the strict upper triangle is zeroed.
pub fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<()> {
    let max_diag = (0..n).map(|i| a[i * n + i]).fold(f64::NEG_INFINITY, f64::max);
    let floor = PIVOT_REL_TOL * max_diag.max(0.0);
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if diag.is_nan() || diag <= floor || max_diag <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: j, value: diag });
        }
        let ljj = diag.sqrt();
        a[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / ljj;
        }
        for i in (j + 1)..n {
            a[j * n + i] = 0.0;
        }
    }
    Ok(())
}

pub fn cholesky(a: &SymMatrix) -> Result<CholeskyFactor> {
    let mut lower = a.data.clone();
    cholesky_in_place(&mut lower, a.dim)?;
    Ok(CholeskyFactor { dim: a.dim, lower })
}

#[inline]
pub(crate) fn forward_substitute(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

#[inline]
pub(crate) fn back_substitute_transposed(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Inverts a lower-triangular row-major `n×n` factor into `out`.
pub(crate) fn lower_inverse_into(l: &[f64], n: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for j in 0..n {
        out[j * n + j] = 1.0 / l[j * n + j];
        for i in (j + 1)..n {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i * n + k] * out[k * n + j];
            }
            out[i * n + j] = s / l[i * n + i];
        }
    }
}

/// `W = G A Gᵀ` for lower-triangular `G` (typically `L⁻¹`), all `n×n` row-major.
/// `tmp` is scratch of the same size.
#[inline]
pub(crate) fn congruence_lower(g: &[f64], a: &[f64], n: usize, tmp: &mut [f64], out: &mut [f64]) {
    // tmp = G A
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..=i {
                s += g[i * n + k] * a[k * n + j];
            }
            tmp[i * n + j] = s;
        }
    }
    // out = tmp Gᵀ, symmetric so fill the upper triangle and mirror
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..=j {
                s += tmp[i * n + k] * g[j * n + k];
            }
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
}

/// Reduces the pencil `(A, D)` to the ordinary symmetric matrix `L⁻¹ A L⁻ᵀ`
/// where `D = L Lᵀ`. Its eigenvalues are the generalized eigenvalues of `(A, D)`.
pub fn whiten_pencil(a: &SymMatrix, d: &SymMatrix) -> Result<SymMatrix> {
    if a.dim != d.dim {
        return Err(Error::DimensionMismatch { left: a.dim, right: d.dim });
    }
    let n = a.dim;
    let chol = cholesky(d)?;
    let mut ginv = vec![0.0; n * n];
    lower_inverse_into(&chol.lower, n, &mut ginv);
    let mut tmp = vec![0.0; n * n];
    let mut out = vec![0.0; n * n];
    congruence_lower(&ginv, &a.data, n, &mut tmp, &mut out);
    Ok(SymMatrix::symmetrized(n, out))
}

/// Principal submatrix `A[I, I]`.
pub fn submatrix(a: &SymMatrix, support: &SupportSet) -> Result<SymMatrix> {
    let idx = support.indices();
    if let Some(&bad) = idx.iter().find(|&&i| i >= a.dim) {
        return Err(Error::IndexOutOfRange { index: bad + 1, dim: a.dim });
    }
    let k = idx.len();
    let mut data = vec![0.0; k * k];
    a.gather_into(idx, &mut data);
    Ok(SymMatrix { dim: k, data })
}
