//! Covariance models and the three alternative constructions.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::rng::{derive_seed, stream_rng};
use crate::support::SupportSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `Σ*_jk = 1(j = k) + 0.5·1(j ≠ k)`.
    LongRange,
    /// `Σ*_jk = 0.1^|j − k|`.
    ShortRange,
    /// `Σ* = I`.
    Isotropic,
    Custom(SymMatrix),
}

/// How the diagonal scaling `O` in `Σ₁ = O Σ* O` is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// `O_jj` i.i.d. Unif(0.5, 1.5).
    #[default]
    Uniform,
    /// `O = I`.
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    pub kind: ModelKind,
    pub d: usize,
    #[serde(default)]
    pub scale: ScaleMode,
}

impl CovarianceModel {
    pub fn new(kind: ModelKind, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("model dimension must be at least 1"));
        }
        if let ModelKind::Custom(m) = &kind {
            if m.dim() != d {
                return Err(Error::DimensionMismatch { left: m.dim(), right: d });
            }
        }
        Ok(Self { kind, d, scale: ScaleMode::Uniform })
    }

    pub fn with_scale(mut self, scale: ScaleMode) -> Self {
        self.scale = scale;
        self
    }

    /// The unscaled matrix `Σ*`.
    pub fn base(&self) -> SymMatrix {
        match &self.kind {
            ModelKind::LongRange => SymMatrix::from_upper_fn(self.d, |i, j| if i == j { 1.0 } else { 0.5 }),
            ModelKind::ShortRange => SymMatrix::from_upper_fn(self.d, |i, j| 0.1f64.powi((j - i) as i32)),
            ModelKind::Isotropic => SymMatrix::identity(self.d),
            ModelKind::Custom(m) => m.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::LongRange => "long_range",
            ModelKind::ShortRange => "short_range",
            ModelKind::Isotropic => "isotropic",
            ModelKind::Custom(_) => "custom",
        }
    }
}

/// `Σ₁ = O Σ* O` with `O` drawn from `seed`.
pub fn realize_sigma1(model: &CovarianceModel, seed: u64) -> SymMatrix {
    let base = model.base();
    let o: Vec<f64> = match model.scale {
        ScaleMode::Identity => vec![1.0; model.d],
        ScaleMode::Uniform => {
            let mut rng = stream_rng(seed, "scale-diagonal", 0);
            (0..model.d).map(|_| rng.gen_range(0.5..1.5)).collect()
        }
    };
    SymMatrix::from_upper_fn(model.d, |i, j| o[i] * base.get(i, j) * o[j])
}

/// Scale draws tried by [`realize_pair`] before giving up.
pub const MAX_SCALE_DRAWS: u64 = 1000;

fn is_psd(m: &SymMatrix) -> Result<bool> {
    let tol = 1e-10 * m.max_abs().max(f64::MIN_POSITIVE);
    Ok(linalg::sym_eigenvalues(m)?.iter().all(|&l| l >= -tol))
}

/// `(Σ₁, Σ₂)` for one replicate. The alternative can make `Σ₂` indefinite
/// for some scalings (alternative 2 under long range does whenever
/// `o₁o₂ < 2c₂`), so `O` is redrawn until `Σ₂` is a valid covariance. The
/// first draw uses `scale_seed` itself.
pub fn realize_pair(
    model: &CovarianceModel,
    alt: &AlternativeSpec,
    scale_seed: u64,
    alt_seed: u64,
) -> Result<(SymMatrix, SymMatrix)> {
    let draws = if model.scale == ScaleMode::Identity { 1 } else { MAX_SCALE_DRAWS };
    for k in 0..draws {
        let seed = if k == 0 { scale_seed } else { derive_seed(scale_seed, "scale-redraw", k) };
        let sigma1 = realize_sigma1(model, seed);
        let sigma2 = apply_alternative(&sigma1, alt, alt_seed)?;
        if is_psd(&sigma2)? {
            return Ok((sigma1, sigma2));
        }
    }
    Err(invalid(format!(
        "alternative {} leaves the {} covariance indefinite for {draws} scale draws",
        alt.label(),
        model.name()
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AlternativeSpec {
    Null,
    /// `Σ₂ = Σ₁ + c₁ v vᵀ` with `v` equal to `1/√5` on a size-5 support. The
    /// support is drawn from the seed unless fixed here.
    Alt1 {
        c1: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        support: Option<SupportSet>,
    },
    /// `Σ₂ = Σ₁ + c₂ (e₁e₂ᵀ + e₂e₁ᵀ)`.
    Alt2 { c2: f64 },
    /// `Σ₂ = (I + c₃ D)ᵀ Σ₁ (I + c₃ D)` with `D_{j+1,j} = 1`.
    Alt3 { c3: f64 },
}

impl AlternativeSpec {
    pub fn label(&self) -> &'static str {
        match self {
            AlternativeSpec::Null => "null",
            AlternativeSpec::Alt1 { .. } => "alt1",
            AlternativeSpec::Alt2 { .. } => "alt2",
            AlternativeSpec::Alt3 { .. } => "alt3",
        }
    }
}

pub const ALT1_SUPPORT_SIZE: usize = 5;

pub fn apply_alternative(sigma1: &SymMatrix, alt: &AlternativeSpec, seed: u64) -> Result<SymMatrix> {
    let d = sigma1.dim();
    match alt {
        AlternativeSpec::Null => Ok(sigma1.clone()),
        AlternativeSpec::Alt1 { c1, support } => {
            if d < ALT1_SUPPORT_SIZE {
                return Err(invalid(format!("alternative 1 needs d >= {ALT1_SUPPORT_SIZE}, got d = {d}")));
            }
            let support = match support {
                Some(s) => {
                    if s.len() != ALT1_SUPPORT_SIZE || s.indices().iter().any(|&i| i >= d) {
                        return Err(invalid(format!("alternative 1 support must be 5 indices within 1..={d}")));
                    }
                    s.clone()
                }
                None => {
                    let mut rng = stream_rng(seed, "alt1-support", 0);
                    SupportSet::from_unsorted(sample(&mut rng, d, ALT1_SUPPORT_SIZE).into_vec())?
                }
            };
            let w = c1 / ALT1_SUPPORT_SIZE as f64;
            Ok(SymMatrix::from_upper_fn(d, |i, j| {
                sigma1.get(i, j) + if support.contains(i) && support.contains(j) { w } else { 0.0 }
            }))
        }
        AlternativeSpec::Alt2 { c2 } => {
            if d < 2 {
                return Err(invalid("alternative 2 needs d >= 2"));
            }
            Ok(SymMatrix::from_upper_fn(d, |i, j| sigma1.get(i, j) + if (i, j) == (0, 1) { *c2 } else { 0.0 }))
        }
        AlternativeSpec::Alt3 { c3 } => {
            // (BᵀΣB)_ik with B = I + c D: column i of B is e_i + c e_{i+1}
            let at = |i: usize, k: usize| if i < d && k < d { sigma1.get(i, k) } else { 0.0 };
            Ok(SymMatrix::from_upper_fn(d, |i, k| {
                at(i, k) + c3 * (at(i + 1, k) + at(i, k + 1)) + c3 * c3 * at(i + 1, k + 1)
            }))
        }
    }
}

/// The alternative strengths `(c₁, c₂, c₃)` used for each model in the
/// published size/power tables, for `d ∈ {40, 100}`.
pub fn table_constants(kind: &ModelKind, d: usize) -> Option<(f64, f64, f64)> {
    match (kind, d) {
        (ModelKind::LongRange, 40) => Some((0.9, 0.35, 0.1)),
        (ModelKind::LongRange, 100) => Some((1.1, 0.4, 0.1)),
        (ModelKind::ShortRange, 40) => Some((0.7, 0.4, 0.1)),
        (ModelKind::ShortRange, 100) => Some((0.85, 0.4, 0.1)),
        (ModelKind::Isotropic, 40) => Some((0.8, 0.3, 0.12)),
        (ModelKind::Isotropic, 100) => Some((0.85, 0.3, 0.1)),
        _ => None,
    }
}
