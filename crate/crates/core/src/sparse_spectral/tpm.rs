//! Truncated power iteration for the restricted top eigenvalue.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{embed_unit, top_eigen_on_support, RestrictedEigResult, SolverChoice};
use crate::error::Result;
use crate::linalg::{self, SymMatrix};
use crate::rng::stream_rng;
use crate::support::SupportSet;

/// Truncated power method with the default restart seed.
pub fn truncated_power_max(m: &SymMatrix, s: usize, restarts: usize, iter_cap: usize) -> Result<RestrictedEigResult> {
    truncated_power_max_seeded(m, s, restarts, iter_cap, 0)
}

/// Iterates `v <- truncate_s((M + σI) v) / ‖·‖` from several starts.
///
/// `σ = max(0, maxᵢ(Σⱼ≠ᵢ |Mᵢⱼ| - Mᵢᵢ))` makes `M + σI` positive semidefinite
/// by Gershgorin, so the Rayleigh quotient ascends monotonically. The first
/// starts are the canonical vectors of the largest diagonal entries; the rest
/// are random `s`-sparse directions. Each run keeps `2s` coordinates at
/// first and tightens to `s`; the final support of the best run is
/// polished to its exact top eigenpair, which can only raise the value.
pub fn truncated_power_max_seeded(
    m: &SymMatrix,
    s: usize,
    restarts: usize,
    iter_cap: usize,
    seed: u64,
) -> Result<RestrictedEigResult> {
    let d = m.dim();
    super::check_sparsity(d, s)?;
    let restarts = restarts.max(1);
    let shift = (0..d)
        .map(|i| {
            let row = m.row(i);
            let off: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.abs()).sum();
            off - row[i]
        })
        .fold(0.0f64, f64::max);

    let mut by_diag: Vec<usize> = (0..d).collect();
    by_diag.sort_by(|&i, &j| m.get(j, j).total_cmp(&m.get(i, i)));

    let mut best: Option<RestrictedEigResult> = None;
    let mut y = vec![0.0; d];
    let mut order: Vec<usize> = (0..d).collect();
    for r in 0..restarts {
        let v = if r < s.min(d) {
            unit(d, by_diag[r])
        } else {
            let mut rng = stream_rng(seed, "tpm-start", r as u64);
            let idx = sample(&mut rng, d, s);
            let local: Vec<f64> = (0..s).map(|_| rng.sample(StandardNormal)).collect();
            let mut sorted: Vec<usize> = idx.into_vec();
            sorted.sort_unstable();
            embed_unit(d, &sorted, &local)
        };
        let mut v = v;

        // Truncation starts at 2s coordinates and tightens by one every few
        // steps; the looser early iterates escape poor starting supports.
        let mut level = d.min(2 * s);
        let stride = (iter_cap / (2 * (level - s).max(1))).clamp(1, 5);
        for it in 0..iter_cap {
            if it > 0 && it % stride == 0 && level > s {
                level -= 1;
            }
            for i in 0..d {
                y[i] = linalg::dot(m.row(i), &v) + shift * v[i];
            }
            let next = truncate(&y, level, &mut order);
            if next.iter().all(|x| *x == 0.0) {
                break;
            }
            let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            v = next;
            if delta <= 1e-12 && level == s {
                break;
            }
        }
        let v = truncate(&v, s, &mut order);
        let mut kept: Vec<usize> = (0..d).filter(|&i| v[i] != 0.0).collect();
        if kept.is_empty() {
            kept = by_diag[..s].to_vec();
        }
        kept.sort_unstable();
        let cand = top_eigen_on_support(m, SupportSet::new(kept)?, SolverChoice::TruncatedPower, false)?;
        let better = match &best {
            None => true,
            Some(b) => cand.value > b.value || (cand.value == b.value && cand.support < b.support),
        };
        if better {
            best = Some(cand);
        }
    }
    let mut out = best.expect("at least one restart");
    out.certified_exact = s == d;
    Ok(out)
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

/// Keeps the `s` largest-magnitude entries of `x` and normalizes.
fn truncate(x: &[f64], s: usize, order: &mut [usize]) -> Vec<f64> {
    order.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    let mut v = vec![0.0; x.len()];
    for &i in &order[..s] {
        v[i] = x[i];
    }
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|a| *a /= norm);
    }
    v
}
