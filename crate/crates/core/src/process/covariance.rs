use serde::{Deserialize, Serialize};

use super::observable::raw_moments;
use super::{ContractionMap, MarginalShape, Observable, ObservableKind, ProcessKind, ProcessModel};
use crate::error::{domain, Error, Result};

/// Correlations below this size end the explicit part of derived tables.
const CORRELATION_FLOOR: f64 = 1e-17;

/// Behaviour of a covariance sequence beyond its explicit values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CovarianceTail {
    Zero,
    /// `c(x) = c(L)·ratio^{x−L}` for `x > L`.
    Geometric {
        ratio: f64,
    },
    /// `c(x) = c(L)·(x/L)^{−exponent}` for `x > L`.
    PowerLaw {
        exponent: f64,
    },
}

/// Stationary covariance `c(x) = E_μ(f·f∘T^x)` as explicit values for lags
/// `0..=L` and a tail rule. Lags are symmetric: `c(−x) = c(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceTable {
    values: Vec<f64>,
    tail: CovarianceTail,
}

impl CovarianceTable {
    pub fn new(values: Vec<f64>, tail: CovarianceTail) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("covariance table needs the lag-0 value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("covariance values must be finite"));
        }
        match tail {
            CovarianceTail::Geometric { ratio } if !ratio.is_finite() => {
                return Err(domain("geometric tail ratio must be finite"));
            }
            CovarianceTail::PowerLaw { exponent } => {
                if !(exponent > 0.0) {
                    return Err(domain("power-law tail exponent must be positive"));
                }
                if values.len() < 2 {
                    return Err(domain("power-law tail needs explicit values up to lag 1 or more"));
                }
            }
            _ => {}
        }
        Ok(CovarianceTable { values, tail })
    }

    /// `c(x) = variance·ratio^|x|`.
    pub fn geometric(variance: f64, ratio: f64) -> Result<Self> {
        CovarianceTable::new(vec![variance], CovarianceTail::Geometric { ratio })
    }

    /// Orthogonal sequence: `c(x) = variance·1{x = 0}`.
    pub fn white(variance: f64) -> Self {
        CovarianceTable { values: vec![variance], tail: CovarianceTail::Zero }
    }

    pub fn explicit(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> CovarianceTail {
        self.tail
    }

    fn last_lag(&self) -> usize {
        self.values.len() - 1
    }

    /// `(variance, ratio)` when the table is exactly `v·ratio^|x|`.
    pub fn geometric_form(&self) -> Option<(f64, f64)> {
        match self.tail {
            CovarianceTail::Geometric { ratio } if self.values.len() == 1 => Some((self.values[0], ratio)),
            _ => None,
        }
    }

    pub fn at(&self, lag: i64) -> f64 {
        let x = lag.unsigned_abs() as usize;
        let last = self.last_lag();
        if x <= last {
            return self.values[x];
        }
        let cl = self.values[last];
        match self.tail {
            CovarianceTail::Zero => 0.0,
            CovarianceTail::Geometric { ratio } => cl * ratio.powf((x - last) as f64),
            CovarianceTail::PowerLaw { exponent } => cl * (x as f64 / last as f64).powf(-exponent),
        }
    }

    pub fn is_summable(&self) -> bool {
        self.tail_abs_bound(self.last_lag()).is_finite()
    }

    /// Upper bound on `Σ_{x > from} |c(x)|`; infinite when the tail diverges.
    pub fn tail_abs_bound(&self, from: usize) -> f64 {
        let last = self.last_lag();
        let explicit: f64 = self.values.iter().skip(from + 1).map(|v| v.abs()).sum();
        let start = from.max(last);
        let cl = self.values[last].abs();
        let tail = match self.tail {
            CovarianceTail::Zero => 0.0,
            _ if cl == 0.0 => 0.0,
            CovarianceTail::Geometric { ratio } => {
                let r = ratio.abs();
                if r >= 1.0 {
                    f64::INFINITY
                } else {
                    cl * r.powf((start + 1 - last) as f64) / (1.0 - r)
                }
            }
            CovarianceTail::PowerLaw { exponent } => {
                if exponent <= 1.0 {
                    f64::INFINITY
                } else {
                    // Σ_{x>s} x^{-a} ≤ s^{1−a}/(a−1)
                    cl * (last as f64).powf(exponent) * (start as f64).powf(1.0 - exponent) / (exponent - 1.0)
                }
            }
        };
        explicit + tail
    }

    /// `sup_{x > from} |c(x)|`.
    pub fn sup_abs_beyond(&self, from: usize) -> f64 {
        let explicit = self.values.iter().skip(from + 1).fold(0.0f64, |m, v| m.max(v.abs()));
        let start = from.max(self.last_lag());
        explicit.max(self.at(start as i64 + 1).abs())
    }

    /// Smallest lag `L` with `|c(x)| ≤ eps` for every `x > L`
    /// (`usize::MAX` when the tail never gets that small).
    pub fn cutoff(&self, eps: f64) -> usize {
        let last = self.last_lag();
        let cl = self.values[last].abs();
        let mut threshold = last;
        if cl > eps {
            match self.tail {
                CovarianceTail::Zero => {}
                CovarianceTail::Geometric { ratio } => {
                    let r = ratio.abs();
                    if r >= 1.0 {
                        return usize::MAX;
                    }
                    if r > 0.0 {
                        let k = ((eps / cl).ln() / r.ln()).ceil().max(1.0) as usize;
                        threshold = last + k - 1;
                    }
                }
                CovarianceTail::PowerLaw { exponent } => {
                    let x = (last as f64) * (cl / eps).powf(1.0 / exponent);
                    if !x.is_finite() || x > 1e15 {
                        return usize::MAX;
                    }
                    threshold = (x.ceil() as usize).max(last);
                }
            }
            while threshold > last && self.at(threshold as i64).abs() <= eps {
                threshold -= 1;
            }
            while self.at(threshold as i64 + 1).abs() > eps {
                threshold += 1;
            }
        }
        if threshold > last {
            return threshold;
        }
        (0..=last).rev().find(|&x| self.values[x].abs() > eps).unwrap_or(0)
    }

    /// Covariance of the cocycle `h − h∘T` when `self` is the covariance of `h`:
    /// `c_f(x) = 2c(x) − c(x+1) − c(x−1)`.
    pub fn difference(&self) -> Result<CovarianceTable> {
        if let CovarianceTail::PowerLaw { .. } = self.tail {
            return Err(domain("cocycle covariance is only available for zero or geometric tails"));
        }
        let last = self.last_lag() as i64;
        let values = (0..=last + 1).map(|x| 2.0 * self.at(x) - self.at(x + 1) - self.at(x - 1)).collect();
        Ok(CovarianceTable { values, tail: self.tail })
    }
}

fn unsupported(model: &ProcessModel, f: &Observable) -> Error {
    Error::UnsupportedAnalytic { model: model.name().into(), observable: f.label() }
}

/// Identity covariance of models with a closed-form second-order structure.
fn identity_table(model: &ProcessModel) -> Option<CovarianceTable> {
    match &model.kind {
        ProcessKind::AndrewsBernoulli => CovarianceTable::geometric(1.0 / 12.0, 0.5).ok(),
        ProcessKind::LinearAr1 { rho, .. } => CovarianceTable::geometric(model.marginal_variance, *rho).ok(),
        ProcessKind::IteratedContraction { map: ContractionMap::Affine, kappa, .. } => {
            CovarianceTable::geometric(model.marginal_variance, *kappa).ok()
        }
        ProcessKind::IteratedContraction { .. } => None,
        ProcessKind::CausalLinear { coeffs, noise } => {
            let v = noise.variance();
            let last = coeffs.head.len() - 1;
            let values = (0..=last).map(|x| v * coeffs.lag_product_sum(x)).collect();
            let tail = match coeffs.tail_ratio {
                Some(q) => CovarianceTail::Geometric { ratio: q },
                None => CovarianceTail::Zero,
            };
            CovarianceTable::new(values, tail).ok()
        }
    }
}

/// Analytic covariance table of `f` under `model`.
///
/// Available for the identity on every linear model and the Andrews chain,
/// for cosines on jointly Gaussian models, and for any observable with
/// closed-form moments on iid models.
pub fn covariance_table(model: &ProcessModel, f: &Observable) -> Result<CovarianceTable> {
    let ident = identity_table(model).ok_or_else(|| unsupported(model, f))?;
    match f.kind {
        ObservableKind::IdentityCentered => {
            if model.marginal_source == super::MarginalSource::Declared {
                // declared variance rescales the correlation structure
                let scale = model.marginal_variance / ident.at(0);
                let values = ident.values.iter().map(|c| c * scale).collect();
                return CovarianceTable::new(values, ident.tail);
            }
            Ok(ident)
        }
        ObservableKind::CosineCentered { frequency: w } if model.marginal_shape() == MarginalShape::Gaussian => {
            let m = model.marginal_mean;
            let v = model.marginal_variance;
            let mean_cos = (-0.5 * w * w * v).exp() * (w * m).cos();
            let cos_cov = |r: f64| {
                0.5 * ((-w * w * (v + r)).exp() * (2.0 * w * m).cos() + (-w * w * (v - r)).exp()) - mean_cos * mean_cos
            };
            let mut values = Vec::new();
            let mut x = 0i64;
            loop {
                let r = ident.at(x);
                values.push(cos_cov(r));
                let done = x as usize >= ident.last_lag() && (v == 0.0 || (r / v).abs() < CORRELATION_FLOOR);
                if done || x > 100_000 {
                    break;
                }
                x += 1;
            }
            CovarianceTable::new(values, CovarianceTail::Zero)
        }
        _ if is_iid(model) => {
            let (m1, m2) = raw_moments(f, model).ok_or_else(|| unsupported(model, f))?;
            Ok(CovarianceTable::white(m2 - m1 * m1))
        }
        _ => Err(unsupported(model, f)),
    }
}

fn is_iid(model: &ProcessModel) -> bool {
    matches!(model.kind, ProcessKind::LinearAr1 { rho, .. } if rho == 0.0)
}

/// `E_μ(f·f∘T^lag)`. Lag 0 is available whenever `Var f` has a closed form.
pub fn covariance(model: &ProcessModel, f: &Observable, lag: usize) -> Result<f64> {
    if lag == 0 {
        if let Some((m1, m2)) = raw_moments(f, model) {
            return Ok(if f.kind == ObservableKind::IdentityCentered { model.marginal_variance } else { m2 - m1 * m1 });
        }
    }
    Ok(covariance_table(model, f)?.at(lag as i64))
}
