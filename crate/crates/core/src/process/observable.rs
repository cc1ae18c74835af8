use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};

use super::{MarginalShape, ProcessModel, PREPASS_LEN, PREPASS_SEED};
use crate::error::{domain, Result};
use crate::seed::rng_from_seed;

/// Hinge points of the Lipschitz dictionary, in marginal standard deviations
/// around the marginal mean: entry `k` is the hinge `x ↦ |x − (m + z_k σ)|`.
pub const HINGE_GRID: [f64; 7] = [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableKind {
    IdentityCentered,
    CosineCentered { frequency: f64 },
    LipschitzDictionary { index: usize },
}

/// A centered observable `f = g − E_μ g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observable {
    pub kind: ObservableKind,
    /// The constant `E_μ g` that is subtracted.
    pub center: f64,
    /// Hinge point for dictionary entries, unused otherwise.
    pub anchor: f64,
    pub lipschitz: f64,
    /// Whether the centering constant is exact rather than estimated.
    pub mean_zero_exact: bool,
}

impl Observable {
    pub fn new(kind: ObservableKind, model: &ProcessModel) -> Result<Self> {
        let (anchor, lipschitz) = match kind {
            ObservableKind::IdentityCentered => (0.0, 1.0),
            ObservableKind::CosineCentered { frequency } => {
                if !frequency.is_finite() {
                    return Err(domain("cosine frequency must be finite"));
                }
                (0.0, frequency.abs())
            }
            ObservableKind::LipschitzDictionary { index } => {
                let z = *HINGE_GRID
                    .get(index)
                    .ok_or_else(|| domain(format!("dictionary index {index} outside 0..{}", HINGE_GRID.len())))?;
                (model.marginal_mean + z * model.marginal_variance.sqrt(), 1.0)
            }
        };
        let mut f = Observable { kind, center: 0.0, anchor, lipschitz, mean_zero_exact: true };
        match raw_moments(&f, model) {
            Some((m1, _)) => f.center = m1,
            None => {
                let mut buf = vec![0.0; PREPASS_LEN];
                model.fill(&mut rng_from_seed(PREPASS_SEED), &mut buf);
                f.center = buf.iter().map(|&x| f.raw(x)).sum::<f64>() / buf.len() as f64;
                f.mean_zero_exact = false;
            }
        }
        Ok(f)
    }

    #[inline]
    pub fn raw(&self, x: f64) -> f64 {
        match self.kind {
            ObservableKind::IdentityCentered => x,
            ObservableKind::CosineCentered { frequency } => (frequency * x).cos(),
            ObservableKind::LipschitzDictionary { .. } => (x - self.anchor).abs(),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.raw(x) - self.center
    }

    pub fn label(&self) -> String {
        match self.kind {
            ObservableKind::IdentityCentered => "identity".into(),
            ObservableKind::CosineCentered { frequency } => format!("cosine({frequency})"),
            ObservableKind::LipschitzDictionary { index } => format!("hinge[{index}]"),
        }
    }
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `(E g(ξ), E g(ξ)²)` of the uncentered observable, when available in
/// closed form for the model's marginal.
pub(crate) fn raw_moments(f: &Observable, model: &ProcessModel) -> Option<(f64, f64)> {
    let m = model.marginal_mean;
    let v = model.marginal_variance;
    match (f.kind, model.marginal_shape()) {
        (ObservableKind::IdentityCentered, _) => Some((m, v + m * m)),
        (ObservableKind::CosineCentered { frequency: w }, MarginalShape::Gaussian) => {
            let m1 = (-0.5 * w * w * v).exp() * (w * m).cos();
            let m2 = 0.5 + 0.5 * (-2.0 * w * w * v).exp() * (2.0 * w * m).cos();
            Some((m1, m2))
        }
        (ObservableKind::CosineCentered { frequency: w }, MarginalShape::UniformUnit) => {
            if w == 0.0 {
                Some((1.0, 1.0))
            } else {
                Some((w.sin() / w, 0.5 + (2.0 * w).sin() / (4.0 * w)))
            }
        }
        (ObservableKind::LipschitzDictionary { .. }, MarginalShape::Gaussian) => {
            let d = m - f.anchor;
            let sd = v.sqrt();
            let m1 = if sd == 0.0 {
                d.abs()
            } else {
                // E|N(d, σ²)| = σ√(2/π) e^{−d²/2σ²} + d(1 − 2Φ(−d/σ))
                sd * FRAC_2_SQRT_PI / SQRT_2 * (-0.5 * d * d / v).exp() + d * (1.0 - 2.0 * normal_cdf(-d / sd))
            };
            Some((m1, v + d * d))
        }
        (ObservableKind::LipschitzDictionary { .. }, MarginalShape::UniformUnit) => {
            let t = f.anchor;
            let m1 = if t <= 0.0 {
                0.5 - t
            } else if t >= 1.0 {
                t - 0.5
            } else {
                0.5 * (t * t + (1.0 - t) * (1.0 - t))
            };
            Some((m1, 1.0 / 12.0 + (0.5 - t).powi(2)))
        }
        _ => None,
    }
}
