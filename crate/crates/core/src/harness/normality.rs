use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::process::observable::normal_cdf;

/// Asymptotic 1% critical value of `√R·D`.
pub const KS_CRITICAL_1PCT: f64 = 1.63;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub samples: usize,
    pub target_variance: f64,
    pub ks_statistic: f64,
    pub ks_critical: f64,
    pub ks_p_value: f64,
    pub ks_pass: bool,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub skewness_se: f64,
    pub excess_kurtosis: f64,
    pub kurtosis_se: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut total = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        total += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * total).clamp(0.0, 1.0)
}

/// One-sample KS statistic against `N(0, variance)`.
pub fn ks_statistic(samples: &[f64], variance: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sd = variance.sqrt();
    let r = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x / sd);
            (((i + 1) as f64 / r) - f).max(f - i as f64 / r)
        })
        .fold(0.0, f64::max)
}

/// KS test against `N(0, target_variance)` plus sample moment diagnostics.
pub fn normality_tests(samples: &[f64], target_variance: f64) -> Result<NormalityReport> {
    if samples.len() < 100 {
        return Err(domain(format!("normality tests need at least 100 samples, got {}", samples.len())));
    }
    if !(target_variance > 0.0) {
        return Err(domain(format!("target variance must be positive, got {target_variance}")));
    }
    let r = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / r;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= r;
    m3 /= r;
    m4 /= r;
    if m2 <= 0.0 {
        return Err(Error::Degenerate("samples have zero variance".into()));
    }
    let d = ks_statistic(samples, target_variance);
    let sqrt_r = r.sqrt();
    let ks_critical = KS_CRITICAL_1PCT / sqrt_r;
    Ok(NormalityReport {
        samples: samples.len(),
        target_variance,
        ks_statistic: d,
        ks_critical,
        ks_p_value: kolmogorov_survival((sqrt_r + 0.12 + 0.11 / sqrt_r) * d),
        ks_pass: d < ks_critical,
        mean,
        variance: m2 * r / (r - 1.0),
        skewness: m3 / m2.powf(1.5),
        skewness_se: (6.0 / r).sqrt(),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        kurtosis_se: (24.0 / r).sqrt(),
    })
}
