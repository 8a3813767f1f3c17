//! ε-nets of the sparse unit sphere and checks of the discretization bounds.
//!
//! A net of `𝕍(s,d)` is the union over size-`s` supports `I` of a net of the
//! unit sphere of `R^I`. The sphere net is a recursive spherical-coordinate
//! lattice: a point is `(cos θ, sin θ · w)` with `θ` on a grid of latitude
//! rings and `w` drawn from a net of the next lower sphere. Splitting the
//! radius budget evenly between the ring spacing and the sub-net keeps every
//! point of the sphere within chord distance `ε` of the lattice.

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::rng::stream_rng;
use crate::sparse_spectral::{gamma_s, restricted_normalized_sup, SolverChoice};
use crate::stats::{self, Dataset};
use crate::support::{binomial, Combinations, SupportSet};

/// Default cap on the number of points a materialized net may hold.
pub const DEFAULT_NET_CAP: f64 = 1.0e7;

/// Angular half-width of a ring cell whose chord budget is `a`.
fn half_angle(a: f64) -> f64 {
    2.0 * (a / 2.0).min(1.0).asin()
}

fn ring_count(eps: f64, half: bool) -> usize {
    let span = if half { PI / 2.0 } else { PI };
    (span / (2.0 * half_angle(eps / 2.0))).ceil().max(1.0) as usize
}

fn ring_angle(j: usize, rings: usize, half: bool) -> f64 {
    let span = if half { PI / 2.0 } else { PI };
    (j as f64 + 0.5) * span / rings as f64
}

fn circle_count(eps: f64, half: bool) -> usize {
    let alpha = half_angle(eps);
    let m = if half { PI / (2.0 * alpha) } else { PI / alpha };
    m.ceil().max(if half { 1.0 } else { 2.0 }) as usize
}

/// Radius left for the sub-net on ring angle `theta`.
fn sub_eps(eps: f64, theta: f64) -> f64 {
    (eps - eps / 2.0) / theta.sin()
}

/// Number of lattice points on `S^{k-1}`, stopping early once past `limit`.
fn sphere_count(k: usize, eps: f64, half: bool, limit: f64) -> f64 {
    match k {
        1 => {
            if half {
                1.0
            } else {
                2.0
            }
        }
        2 => circle_count(eps, half) as f64,
        _ => {
            let rings = ring_count(eps, half);
            let mut total = 0.0;
            for j in 0..rings {
                let theta = ring_angle(j, rings, half);
                let e = sub_eps(eps, theta);
                total += if e >= 2.0 { 1.0 } else { sphere_count(k - 1, e, false, limit - total) };
                if total > limit {
                    return total;
                }
            }
            total
        }
    }
}

/// Visits every lattice point of `S^{k-1}` scaled by `scale`, appended to
/// `prefix`. With `half`, only one of each antipodal pair is produced.
fn visit_sphere(k: usize, eps: f64, half: bool, scale: f64, prefix: &mut Vec<f64>, f: &mut dyn FnMut(&[f64])) {
    match k {
        1 => {
            prefix.push(scale);
            f(prefix);
            if !half {
                *prefix.last_mut().expect("pushed") = -scale;
                f(prefix);
            }
            prefix.pop();
        }
        2 => {
            let m = circle_count(eps, half);
            let step = if half { PI / m as f64 } else { 2.0 * PI / m as f64 };
            for j in 0..m {
                let phi = (j as f64 + 0.5) * step;
                prefix.push(scale * phi.cos());
                prefix.push(scale * phi.sin());
                f(prefix);
                prefix.truncate(prefix.len() - 2);
            }
        }
        _ => {
            let rings = ring_count(eps, half);
            for j in 0..rings {
                let theta = ring_angle(j, rings, half);
                let e = sub_eps(eps, theta);
                prefix.push(scale * theta.cos());
                let r = scale * theta.sin();
                if e >= 2.0 {
                    let base = prefix.len();
                    prefix.push(r);
                    prefix.resize(base + k - 1, 0.0);
                    f(prefix);
                    prefix.truncate(base);
                } else {
                    visit_sphere(k - 1, e, false, r, prefix, f);
                }
                prefix.pop();
            }
        }
    }
}

/// Lattice points of an ε-net of `S^{k-1}`, `k` coordinates per point.
pub fn sphere_net(k: usize, eps: f64) -> Vec<f64> {
    let mut out = Vec::new();
    visit_sphere(k, eps, false, 1.0, &mut Vec::with_capacity(k), &mut |p| out.extend_from_slice(p));
    out
}

/// Number of points [`sphere_net`] produces.
pub fn sphere_net_size(k: usize, eps: f64) -> f64 {
    sphere_count(k, eps, false, f64::INFINITY)
}

/// Net points on a single support, in support-local coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetGroup {
    pub support: SupportSet,
    pub points: Vec<f64>,
}

impl NetGroup {
    pub fn len(&self) -> usize {
        self.points.len() / self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn local_points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.support.len())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsNet {
    pub epsilon: f64,
    pub d: usize,
    pub s: usize,
    groups: Vec<NetGroup>,
}

fn check_net_args(d: usize, s: usize, eps: f64) -> Result<()> {
    if s == 0 || s > d {
        return Err(invalid(format!("sparsity s must satisfy 1 <= s <= d (s = {s}, d = {d})")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

pub fn build_net(d: usize, s: usize, eps: f64) -> Result<EpsNet> {
    build_net_with_cap(d, s, eps, DEFAULT_NET_CAP)
}

/// Union over size-`s` supports of the sphere lattice. Refuses to build more
/// than `cap` points.
pub fn build_net_with_cap(d: usize, s: usize, eps: f64, cap: f64) -> Result<EpsNet> {
    check_net_args(d, s, eps)?;
    let per_support = sphere_count(s, eps, false, cap);
    let count = binomial(d, s) * per_support;
    if count > cap {
        return Err(Error::CapExceeded { what: "epsilon-net points C(d, s) x sphere lattice size", count, cap });
    }
    let local = sphere_net(s, eps);
    let groups = Combinations::new(d, s)
        .map(|idx| NetGroup { support: SupportSet::new(idx).expect("valid combination"), points: local.clone() })
        .collect();
    Ok(EpsNet { epsilon: eps, d, s, groups })
}

impl EpsNet {
    pub fn groups(&self) -> &[NetGroup] {
        &self.groups
    }

    pub fn cardinality(&self) -> usize {
        self.groups.iter().map(NetGroup::len).sum()
    }

    /// Net points embedded into `d` coordinates.
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.groups.iter().flat_map(move |g| {
            g.local_points().map(move |p| {
                let mut v = vec![0.0; self.d];
                for (&i, &x) in g.support.indices().iter().zip(p) {
                    v[i] = x;
                }
                v
            })
        })
    }

    /// `log C(d,s) + s log(1 + 2/ε)`, the covering-number budget.
    pub fn log_size_budget(&self) -> f64 {
        binomial(self.d, self.s).ln() + self.s as f64 * (1.0 + 2.0 / self.epsilon).ln()
    }

    pub fn within_budget(&self) -> bool {
        (self.cardinality() as f64).ln() <= self.log_size_budget()
    }

    /// Largest distance from `probes` random points of `𝕍(s,d)` to the net,
    /// searching the probe's own support.
    pub fn coverage_probe(&self, probes: usize, seed: u64) -> f64 {
        let by_support: std::collections::HashMap<&[usize], &NetGroup> =
            self.groups.iter().map(|g| (g.support.indices(), g)).collect();
        (0..probes)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(seed, "net-probe", t as u64);
                let mut idx = sample(&mut rng, self.d, self.s).into_vec();
                idx.sort_unstable();
                let u = random_unit(&mut rng, self.s);
                let g = by_support[idx.as_slice()];
                g.local_points()
                    .map(|p| p.iter().zip(&u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
                    .sqrt()
            })
            .reduce(|| 0.0, f64::max)
    }
}

fn random_unit(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let norm = linalg::dot(&v, &v).sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `|vᵀAv| / vᵀΣv` in support-local coordinates (`a`, `sigma` are `k×k`).
fn local_ratio(a: &[f64], sigma: &[f64], v: &[f64]) -> f64 {
    let k = v.len();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..k {
        let (mut ra, mut rs) = (0.0, 0.0);
        for j in 0..k {
            ra += a[i * k + j] * v[j];
            rs += sigma[i * k + j] * v[j];
        }
        num += v[i] * ra;
        den += v[i] * rs;
    }
    num.abs() / den
}

/// Largest `|vᵀAv| / vᵀΣv` over the net, with a maximizing point (first wins ties).
pub fn net_max_ratio(net: &EpsNet, a: &SymMatrix, sigma: &SymMatrix) -> Result<(f64, Vec<f64>)> {
    for m in [a, sigma] {
        if m.dim() != net.d {
            return Err(Error::DimensionMismatch { left: m.dim(), right: net.d });
        }
    }
    let s = net.s;
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    let (mut la, mut ls) = (vec![0.0; s * s], vec![0.0; s * s]);
    for (gi, g) in net.groups.iter().enumerate() {
        a.gather_into(g.support.indices(), &mut la);
        sigma.gather_into(g.support.indices(), &mut ls);
        for (pi, p) in g.local_points().enumerate() {
            let r = local_ratio(&la, &ls, p);
            if r > best.0 {
                best = (r, gi, pi);
            }
        }
    }
    let g = &net.groups[best.1];
    let mut v = vec![0.0; net.d];
    for (&i, &x) in g.support.indices().iter().zip(g.local_points().nth(best.2).expect("index in range")) {
        v[i] = x;
    }
    Ok((best.0, v))
}

/// Net-based reference value for the restricted normalized sup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetOracle {
    /// Best ratio found over all evaluated net points (a lower bound on the sup).
    pub value: f64,
    /// Upper bound on the sup implied by the coarse pass.
    pub upper_bound: f64,
    pub epsilon: f64,
    pub coarse_epsilon: f64,
    pub refined_supports: usize,
    pub total_supports: usize,
    pub points_evaluated: f64,
}

/// Sup of `|vᵀAv| / vᵀΣv` over `𝕍(s,d)` by direct evaluation on nets.
///
/// Every support is scanned with a `coarse_eps` lattice. On a support `I`
/// with restricted condition number `γ_I`, the lattice max `m_I` bounds the
/// support's sup by `m_I / (1 − 2γ_I ε)`; supports whose bound cannot beat the
/// best coarse value are skipped and the rest are rescanned at `eps`. `γ_I`
/// is bounded from the coarse lattice itself (row sums above, lattice minimum
/// minus the lattice error below), so no eigen-solver is involved. Lattices
/// are taken modulo `v ↦ −v`, which leaves the ratio unchanged.
pub fn net_oracle_normalized_sup(a: &SymMatrix, sigma: &SymMatrix, s: usize, eps: f64, coarse_eps: f64) -> Result<NetOracle> {
    let d = a.dim();
    if sigma.dim() != d {
        return Err(Error::DimensionMismatch { left: d, right: sigma.dim() });
    }
    check_net_args(d, s, eps)?;
    check_net_args(d, s, coarse_eps)?;
    let supports: Vec<Vec<usize>> = Combinations::new(d, s).collect();

    struct Coarse {
        max: f64,
        bound: f64,
        points: f64,
    }
    let coarse: Vec<Coarse> = supports
        .par_iter()
        .map(|idx| {
            let (mut la, mut ls) = (vec![0.0; s * s], vec![0.0; s * s]);
            a.gather_into(idx, &mut la);
            sigma.gather_into(idx, &mut ls);
            let (mut max, mut min_den, mut points) = (0.0f64, f64::INFINITY, 0.0);
            visit_sphere(s, coarse_eps, true, 1.0, &mut Vec::with_capacity(s), &mut |p| {
                max = max.max(local_ratio(&la, &ls, p));
                min_den = min_den.min(linalg::dot(p, &mat_vec(&ls, p)));
                points += 1.0;
            });
            let row_bound = (0..s).map(|i| ls[i * s..(i + 1) * s].iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
            // |uᵀΣu − wᵀΣw| ≤ 2‖Σ‖ ε for ‖u − w‖ ≤ ε
            let lo = min_den - 2.0 * row_bound * coarse_eps;
            let bound = if lo > 0.0 {
                let gamma = (row_bound / lo).sqrt();
                let shrink = 1.0 - 2.0 * gamma * coarse_eps;
                if shrink > 0.0 {
                    max / shrink
                } else {
                    f64::INFINITY
                }
            } else {
                f64::INFINITY
            };
            Coarse { max, bound, points }
        })
        .collect();
    let coarse_best = coarse.iter().map(|c| c.max).fold(0.0, f64::max);
    let upper_bound = coarse.iter().map(|c| c.bound).fold(0.0, f64::max);
    let refine: Vec<&Vec<usize>> = supports.iter().zip(&coarse).filter(|(_, c)| c.bound >= coarse_best).map(|(i, _)| i).collect();
    let fine: Vec<(f64, f64)> = refine
        .par_iter()
        .map(|idx| {
            let (mut la, mut ls) = (vec![0.0; s * s], vec![0.0; s * s]);
            a.gather_into(idx, &mut la);
            sigma.gather_into(idx, &mut ls);
            let (mut max, mut points) = (0.0f64, 0.0);
            visit_sphere(s, eps, true, 1.0, &mut Vec::with_capacity(s), &mut |p| {
                max = max.max(local_ratio(&la, &ls, p));
                points += 1.0;
            });
            (max, points)
        })
        .collect();
    let value = fine.iter().map(|f| f.0).fold(coarse_best, f64::max);
    Ok(NetOracle {
        value,
        upper_bound,
        epsilon: eps,
        coarse_epsilon: coarse_eps,
        refined_supports: refine.len(),
        total_supports: supports.len(),
        points_evaluated: coarse.iter().map(|c| c.points).sum::<f64>() + fine.iter().map(|f| f.1).sum::<f64>(),
    })
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let k = v.len();
    (0..k).map(|i| linalg::dot(&m[i * k..(i + 1) * k], v)).collect()
}

/// Outcome of the same-support Lipschitz check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `LHS − RHS` seen (negative when every trial holds with room).
    pub max_excess: f64,
    pub gamma_s: f64,
    pub sup: f64,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `||f(v)| − |f(ṽ)|| ≤ 2γ_s ‖v − ṽ‖ sup |f|` with
/// `f(v) = vᵀMv / vᵀΣv` on seeded random pairs sharing a support.
pub fn check_lipschitz_bound(m: &SymMatrix, sigma: &SymMatrix, s: usize, trials: usize, seed: u64) -> Result<LipschitzReport> {
    let d = m.dim();
    if sigma.dim() != d {
        return Err(Error::DimensionMismatch { left: d, right: sigma.dim() });
    }
    let gamma = gamma_s(sigma, s)?;
    let sup = restricted_normalized_sup(m, sigma, s, SolverChoice::BruteForce)?.value;
    let ratio = |v: &[f64]| m.quad_form(v).abs() / sigma.quad_form(v);
    let excess: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, "lipschitz-pair", t as u64);
            let size = rng.gen_range(1..=s);
            let idx = sample(&mut rng, d, size).into_vec();
            let u = random_unit(&mut rng, size);
            // perturbation size spread over several decades
            let delta = 10f64.powf(rng.gen_range(-4.0..0.3));
            let w: Vec<f64> = u.iter().map(|x| x + delta * rng.sample::<f64, _>(StandardNormal)).collect();
            let wn = linalg::dot(&w, &w).sqrt();
            let (mut v, mut vt) = (vec![0.0; d], vec![0.0; d]);
            for (k, &i) in idx.iter().enumerate() {
                v[i] = u[k];
                vt[i] = w[k] / wn;
            }
            let dist = v.iter().zip(&vt).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            (ratio(&v) - ratio(&vt)).abs() - 2.0 * gamma * dist * sup
        })
        .collect();
    Ok(LipschitzReport {
        trials,
        violations: excess.iter().filter(|&&e| e > 1e-9).count(),
        max_excess: excess.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        gamma_s: gamma,
        sup,
    })
}

/// Outcome of the sup-versus-net sandwich check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub q_hat: f64,
    pub net_max: f64,
    pub upper_bound: f64,
    pub gamma_s: f64,
    pub epsilon: f64,
    pub net_size: usize,
    pub log_size_budget: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub size_within_budget: bool,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.lower_holds && self.upper_holds && self.size_within_budget
    }
}

/// Checks `M_max,ε ≤ Q̂_max ≤ M_max,ε / (1 − 2γ_s ε)` where `M_max,ε` is the
/// net maximum of `√n |vᵀ(Σ̂ − Σ)v| / vᵀΣv`.
pub fn check_discretization_sandwich(x: &Dataset, sigma: &SymMatrix, s: usize, eps: f64) -> Result<SandwichReport> {
    let q_hat = stats::q_hat_max(x, sigma, s, SolverChoice::BruteForce)?.value;
    let gamma = gamma_s(sigma, s)?;
    let net = build_net(x.d(), s, eps)?;
    let diff = stats::sample_covariance(x).sub(sigma)?;
    let net_max = (x.n() as f64).sqrt() * net_max_ratio(&net, &diff, sigma)?.0;
    let shrink = 1.0 - 2.0 * gamma * eps;
    let upper_bound = if shrink > 0.0 { net_max / shrink } else { f64::INFINITY };
    Ok(SandwichReport {
        q_hat,
        net_max,
        upper_bound,
        gamma_s: gamma,
        epsilon: eps,
        net_size: net.cardinality(),
        log_size_budget: net.log_size_budget(),
        lower_holds: net_max <= q_hat * (1.0 + 1e-12) + 1e-12,
        upper_holds: q_hat <= upper_bound + 1e-9,
        size_within_budget: net.within_budget(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::gaussian_sample;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_spd(d: usize, seed: u64) -> SymMatrix {
        let mut rng = stream_rng(seed, "test-spd", 0);
        let b: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
        SymMatrix::from_upper_fn(d, |i, j| {
            (0..d).map(|k| b[i * d + k] * b[j * d + k]).sum::<f64>() / d as f64 + if i == j { 0.5 } else { 0.0 }
        })
    }

    fn random_sym(d: usize, seed: u64) -> SymMatrix {
        let mut rng = stream_rng(seed, "test-sym", 0);
        let vals: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
        SymMatrix::from_upper_fn(d, |i, j| vals[i * d + j])
    }

    #[test]
    fn zero_dimensional_spheres() {
        let net = build_net(2, 1, 0.5).unwrap();
        let mut pts: Vec<Vec<f64>> = net.points().collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pts, vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn full_support_net_is_one_group() {
        let net = build_net(3, 3, 0.3).unwrap();
        assert_eq!(net.groups().len(), 1);
        assert!(net.coverage_probe(10_000, 1) <= 0.3);
    }

    #[test]
    fn net_size_example() {
        let net = build_net(6, 2, 0.25).unwrap();
        assert!(net.cardinality() <= 1215);
        assert_eq!(net.cardinality() as f64, 15.0 * sphere_net_size(2, 0.25));
        assert!(net.within_budget());
        assert!(net.coverage_probe(10_000, 3) <= 0.25);
    }

    #[test]
    fn points_are_unit_and_sparse() {
        let net = build_net(5, 3, 0.2).unwrap();
        for p in net.points() {
            assert!((linalg::dot(&p, &p) - 1.0).abs() < 1e-12);
            assert!(p.iter().filter(|x| **x != 0.0).count() <= 3);
        }
    }

    #[test]
    fn sphere_coverage_in_several_dimensions() {
        for (k, eps) in [(2, 0.1), (3, 0.2), (4, 0.5)] {
            let net = build_net(k, k, eps).unwrap();
            let far = net.coverage_probe(10_000, k as u64);
            assert!(far <= eps, "k={k}: {far}");
        }
    }

    #[test]
    fn counting_matches_construction() {
        for (k, eps) in [(1, 0.5), (2, 0.05), (3, 0.1), (4, 0.4)] {
            assert_eq!(sphere_net(k, eps).len() / k, sphere_net_size(k, eps) as usize);
        }
    }

    #[test]
    fn cap_is_enforced() {
        match build_net(30, 3, 0.01) {
            Err(Error::CapExceeded { count, .. }) => assert!(count > DEFAULT_NET_CAP),
            other => panic!("expected cap error, got {other:?}"),
        }
        assert!(build_net(4, 2, 1.5).is_err());
    }

    #[test]
    fn lipschitz_trivial_cases() {
        let sigma = random_spd(4, 1);
        let zero = SymMatrix::zeros(4);
        let r = check_lipschitz_bound(&zero, &sigma, 2, 200, 5).unwrap();
        assert!(r.passed());
        assert_eq!(r.sup, 0.0);
    }

    #[test]
    fn lipschitz_bound_holds() {
        let r = check_lipschitz_bound(&random_sym(6, 2), &random_spd(6, 3), 2, 10_000, 11).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn sandwich_with_s_one_is_exact() {
        let x = gaussian_sample(&SymMatrix::identity(2), 30, 4).unwrap();
        let sigma = SymMatrix::diagonal(&[1.0, 2.0]);
        let r = check_discretization_sandwich(&x, &sigma, 1, 0.3).unwrap();
        assert_relative_eq!(r.net_max, r.q_hat, max_relative = 1e-14);
        assert!(r.passed());
    }

    #[test]
    fn sandwich_fine_net() {
        let sigma = random_spd(4, 9);
        let x = gaussian_sample(&sigma, 50, 10).unwrap();
        let r = check_discretization_sandwich(&x, &sigma, 2, 1e-3).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.q_hat - r.net_max <= 2.0 * r.gamma_s * 1e-3 * r.q_hat + 1e-9);
    }

    #[test]
    fn sandwich_at_zero_statistic() {
        let x = Dataset::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0], vec![0.0, 1.0, -1.0]]).unwrap();
        let sigma = stats::sample_covariance(&x);
        let r = check_discretization_sandwich(&x, &sigma, 2, 0.1).unwrap();
        assert_eq!(r.q_hat, 0.0);
        assert_eq!(r.net_max, 0.0);
        assert!(r.passed());
    }

    #[test]
    fn oracle_matches_known_values() {
        let sigma = random_spd(5, 21);
        let o = net_oracle_normalized_sup(&sigma.scaled(-2.5), &sigma, 2, 1e-3, 1e-2).unwrap();
        assert_relative_eq!(o.value, 2.5, max_relative = 1e-12);
        let a = SymMatrix::diagonal(&[1.0, -3.0, 2.0]);
        let o = net_oracle_normalized_sup(&a, &SymMatrix::identity(3), 1, 1e-3, 1e-2).unwrap();
        assert_eq!(o.value, 3.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn net_size_respects_budget(d in 1usize..7, s_off in 0usize..3, eps in 0.05f64..0.9) {
            let s = (d - s_off.min(d - 1)).min(3);
            let net = build_net(d, s, eps).unwrap();
            prop_assert!(net.within_budget());
        }
    }
}
