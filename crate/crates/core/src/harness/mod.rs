//! Quenched Monte Carlo CLT experiments.
//!
//! Two designs: a weighted triangular array `Σ_n = Σ_{|i|≤k_n} a_{n,i} f(ξ_i)`
//! normalised by its exact standard deviation, and the walk-sampled sum
//! `n^{−1/2} Σ_{k=0}^{n} f(ξ_{S_k})` on one fixed path.

mod normality;

pub use normality::{kolmogorov_survival, ks_statistic, normality_tests, NormalityReport, KS_CRITICAL_1PCT};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::process::{covariance_table, CovarianceTable, Observable, ObservableKind, ProcessModel};
use crate::seed::{derive_seed, rng_from_seed, STREAM_PATH, STREAM_PROCESS};
use crate::variance::{sigma2_for_law, sigma_n_empirical};
use crate::walk::{local_time, sample_path, LocalTimeField, StepLaw, Transience};

/// Published default for the fixed quenched path.
pub const DEFAULT_PATH_SEED: u64 = 20_030_417;
/// Number of paths in a sweep.
pub const PATH_SWEEP: usize = 10;
/// Flag threshold for `max|a_{n,i}|/σ_n`.
pub const A1_II_FLAG: f64 = 0.25;
/// Flag threshold for the Lindeberg quantity.
pub const LINDEBERG_FLAG: f64 = 0.05;
/// Truncation level `ε` used for the Lindeberg quantity inside reports.
pub const LINDEBERG_EPSILON: f64 = 0.1;
/// Marginal draws behind each Lindeberg estimate.
pub const LINDEBERG_DRAWS: usize = 20_000;

const STREAM_PREPASS: u64 = 0x7072_6570;
const STREAM_LINDEBERG: u64 = 0x6c69_6e64;

/// Seed of the `i`-th path in a sweep.
pub fn sweep_path_seed(master: u64, i: usize) -> u64 {
    derive_seed(master, STREAM_PATH, i as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum WeightRule {
    /// `a_{n,i} = 1`.
    Equal,
    /// `a_{n,i} = 1{i = 0}`.
    SingleSite,
    /// `a_{n,i} = 1 − |i|/(k_n + 1)`.
    Tent,
    /// Fixed weights on `[−k, k]`, `k = (len − 1)/2`, zero elsewhere.
    Explicit { weights: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum KnRule {
    /// `k_n = ⌈factor·n⌉`.
    Linear { factor: f64 },
    /// `k_n = ⌈n^exponent⌉`.
    Power { exponent: f64 },
}

impl KnRule {
    pub fn k(&self, n: usize) -> usize {
        match *self {
            KnRule::Linear { factor } => (factor * n as f64).ceil() as usize,
            KnRule::Power { exponent } => (n as f64).powf(exponent).ceil() as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangularSpec {
    pub model: ProcessModel,
    pub f: Observable,
    pub weights: WeightRule,
    pub k_n: KnRule,
}

impl TriangularSpec {
    pub fn new(model: ProcessModel, f: ObservableKind, weights: WeightRule, k_n: KnRule) -> Result<Self> {
        match k_n {
            KnRule::Linear { factor } if !(factor > 0.0 && factor.is_finite()) => {
                return Err(domain("k_n factor must be positive"));
            }
            KnRule::Power { exponent } if !(exponent > 0.0 && exponent.is_finite()) => {
                return Err(domain("k_n exponent must be positive"));
            }
            _ => {}
        }
        if let WeightRule::Explicit { weights } = &weights {
            if weights.len() % 2 == 0 || weights.iter().any(|w| !w.is_finite()) {
                return Err(domain("explicit weights need odd length and finite entries"));
            }
            if weights.iter().all(|w| *w == 0.0) {
                return Err(domain("explicit weights have zero sum of squares"));
            }
        }
        let f = Observable::new(f, &model)?;
        Ok(TriangularSpec { model, f, weights, k_n })
    }

    /// `(−k_n, [a_{n,−k_n}, …, a_{n,k_n}])`.
    pub fn weights_at(&self, n: usize) -> (i64, Vec<f64>) {
        match &self.weights {
            WeightRule::Explicit { weights } => (-((weights.len() / 2) as i64), weights.clone()),
            rule => {
                let k = self.k_n.k(n) as i64;
                let a = (-k..=k)
                    .map(|i| match rule {
                        WeightRule::Equal => 1.0,
                        WeightRule::SingleSite => f64::from(u8::from(i == 0)),
                        _ => 1.0 - i.abs() as f64 / (k + 1) as f64,
                    })
                    .collect();
                (-k, a)
            }
        }
    }
}

/// Sign-free quantities of the array that enter (A₁).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrayDiagnostics {
    pub sum_sq_weights: f64,
    pub max_abs_weight: f64,
    /// `σ_n² / Σ a_{n,i}²`.
    pub a1_i: f64,
    /// `max|a_{n,i}| / σ_n`.
    pub a1_ii: f64,
    /// `α(n,0)/n`, walk design only.
    pub alpha0_over_n: Option<f64>,
    pub max_local_time: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceSource {
    Analytic,
    PrePass,
    /// `σ_n²(f)/n` on the fixed path, used when no closed-form Green function exists.
    Quenched,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub design: String,
    pub n: usize,
    pub replicates: usize,
    pub path_seed: Option<u64>,
    pub process_seed: u64,
    /// Divisor applied to the raw sums: `σ_n` (triangular) or `√n` (sampled).
    pub normalization: f64,
    /// Exact variance of the raw sum on this design.
    pub sigma_n2: f64,
    pub sigma_n2_source: VarianceSource,
    pub target_variance: f64,
    pub target_source: VarianceSource,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub empirical_variance_se: f64,
    pub normality: Option<NormalityReport>,
    /// Sums divided by `σ_n`, tested against `N(0, 1)`.
    pub studentized: Option<NormalityReport>,
    pub diagnostics: ArrayDiagnostics,
    pub lindeberg: f64,
    pub degenerate: bool,
    pub flags: Vec<String>,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// `Σ_z c(z) Σ_i a_i a_{i+z}`.
fn weighted_variance(a: &[f64], cov: &CovarianceTable) -> f64 {
    let scale = cov.explicit().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let l1: f64 = a.iter().map(|w| w.abs()).sum();
    let cut = cov.cutoff(1e-17 * scale / (l1 * l1).max(1.0)).min(a.len() - 1);
    let mut total = cov.at(0) * a.iter().map(|w| w * w).sum::<f64>();
    for z in 1..=cut {
        let c = cov.at(z as i64);
        if c != 0.0 {
            let w: f64 = a.iter().zip(&a[z..]).map(|(x, y)| x * y).sum();
            total += 2.0 * c * w;
        }
    }
    total
}

/// Raw weighted sums `Σ a_j f(ξ_{lo+j})` for `replicates` seeds drawn from `stream`.
fn replicate_sums(
    model: &ProcessModel,
    f: &Observable,
    weights: &[(usize, f64)],
    len: usize,
    replicates: usize,
    seed: u64,
    stream: u64,
) -> Vec<f64> {
    (0..replicates)
        .into_par_iter()
        .map_init(
            || vec![0.0; len],
            |buf, r| {
                let mut rng = rng_from_seed(derive_seed(seed, stream, r as u64));
                model.fill(&mut rng, buf);
                weights.iter().map(|&(j, w)| w * f.eval(buf[j])).sum()
            },
        )
        .collect()
}

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let r = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / r;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / r;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / r;
    let var = m2 * r / (r - 1.0).max(1.0);
    (mean, var, ((m4 - m2 * m2).max(0.0) / r).sqrt())
}

/// `σ^{−2} Σ_i E[(|a_i||f(ξ)| − εσ)_+²]`, estimated from marginal draws and
/// grouped over distinct `|a_i|`.
fn lindeberg_value(model: &ProcessModel, f: &Observable, weights: &[f64], sigma: f64, epsilon: f64, seed: u64) -> f64 {
    let mut draws = vec![0.0; LINDEBERG_DRAWS];
    model.fill(&mut rng_from_seed(derive_seed(seed, STREAM_LINDEBERG, 0)), &mut draws);
    let mut ys: Vec<f64> = draws.iter().map(|&x| f.eval(x).abs()).collect();
    ys.sort_by(|a, b| b.total_cmp(a));
    // prefix sums over the descending order
    let mut s1 = Vec::with_capacity(ys.len() + 1);
    let mut s2 = Vec::with_capacity(ys.len() + 1);
    s1.push(0.0);
    s2.push(0.0);
    for y in &ys {
        s1.push(s1.last().unwrap() + y);
        s2.push(s2.last().unwrap() + y * y);
    }
    let mut groups: Vec<f64> = weights.iter().map(|w| w.abs()).filter(|w| *w > 0.0).collect();
    groups.sort_by(f64::total_cmp);
    let r = ys.len() as f64;
    let threshold = epsilon * sigma;
    let mut total = 0.0;
    let mut i = 0;
    while i < groups.len() {
        let a = groups[i];
        let mut j = i;
        while j < groups.len() && groups[j] == a {
            j += 1;
        }
        let s = threshold / a;
        let k = ys.partition_point(|y| *y > s);
        let tail = s2[k] - 2.0 * s * s1[k] + s * s * k as f64;
        total += (j - i) as f64 * a * a * tail.max(0.0) / r;
        i = j;
    }
    total / (sigma * sigma)
}

/// Lindeberg quantity of the triangular array at `n`.
pub fn lindeberg_diagnostic(
    spec: &TriangularSpec,
    n: usize,
    epsilon: f64,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(domain("Lindeberg epsilon must be positive"));
    }
    let (_, a) = spec.weights_at(n);
    let (sigma_n2, _) = triangular_variance(spec, &a, replicates, seed)?;
    if sigma_n2 <= 0.0 {
        return Err(Error::Degenerate("σ_n² = 0".into()));
    }
    Ok(lindeberg_value(&spec.model, &spec.f, &a, sigma_n2.sqrt(), epsilon, seed))
}

/// Lindeberg quantity along an `n` grid.
pub fn lindeberg_profile(
    spec: &TriangularSpec,
    n_grid: &[usize],
    epsilon: f64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    n_grid.iter().map(|&n| Ok((n, lindeberg_diagnostic(spec, n, epsilon, replicates, seed)?))).collect()
}

fn support(a: &[f64]) -> Option<(usize, usize)> {
    let first = a.iter().position(|w| *w != 0.0)?;
    let last = a.iter().rposition(|w| *w != 0.0)?;
    Some((first, last))
}

fn triangular_variance(
    spec: &TriangularSpec,
    a: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<(f64, VarianceSource)> {
    match covariance_table(&spec.model, &spec.f) {
        Ok(cov) => Ok((weighted_variance(a, &cov), VarianceSource::Analytic)),
        Err(Error::UnsupportedAnalytic { .. }) => {
            let (first, last) = support(a).ok_or_else(|| Error::Degenerate("all weights vanish".into()))?;
            let w: Vec<(usize, f64)> = (first..=last).map(|j| (j - first, a[j])).collect();
            let sums = replicate_sums(&spec.model, &spec.f, &w, last - first + 1, replicates, seed, STREAM_PREPASS);
            Ok((moments(&sums).1, VarianceSource::PrePass))
        }
        Err(e) => Err(e),
    }
}

/// `studentize` maps normalised samples to unit variance.
fn finish(mut report: CltReport, raw: Vec<f64>, studentize: f64) -> Result<CltReport> {
    let norm = report.normalization;
    let samples: Vec<f64> = raw.iter().map(|s| s / norm).collect();
    let (mean, var, se) = moments(&samples);
    report.empirical_mean = mean;
    report.empirical_variance = var;
    report.empirical_variance_se = se;
    if !report.degenerate {
        report.normality = Some(normality_tests(&samples, report.target_variance)?);
        let studentized: Vec<f64> = samples.iter().map(|s| s * studentize).collect();
        report.studentized = Some(normality_tests(&studentized, 1.0)?);
    }
    if report.diagnostics.a1_ii > A1_II_FLAG {
        report.flags.push(format!("A1(ii): max|a|/sigma_n = {:.4} exceeds {A1_II_FLAG}", report.diagnostics.a1_ii));
    }
    if report.lindeberg > LINDEBERG_FLAG {
        report.flags.push(format!("Lindeberg: {:.4} exceeds {LINDEBERG_FLAG}", report.lindeberg));
    }
    report.samples = samples;
    Ok(report)
}

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates < 100 {
        return Err(domain(format!("need at least 100 replicates, got {replicates}")));
    }
    Ok(())
}

/// `R` realisations of `Σ_n/σ_n` for the weighted array.
pub fn run_triangular(spec: &TriangularSpec, n: usize, replicates: usize, seed: u64) -> Result<CltReport> {
    check_replicates(replicates)?;
    let (_, a) = spec.weights_at(n);
    let sum_sq: f64 = a.iter().map(|w| w * w).sum();
    let max_abs = a.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let (sigma_n2, source) = triangular_variance(spec, &a, replicates, seed)?;
    let zero_f = matches!(covariance_table(&spec.model, &spec.f), Ok(ref c) if c.at(0) == 0.0);
    if sigma_n2 <= 0.0 && !zero_f {
        return Err(Error::Degenerate(format!("σ_n² = {sigma_n2} at n = {n}")));
    }
    let degenerate = sigma_n2 <= 0.0;
    let sigma = sigma_n2.max(0.0).sqrt();
    let (first, last) = support(&a).expect("validated weights");
    let w: Vec<(usize, f64)> = (first..=last).map(|j| (j - first, a[j])).collect();
    let raw = if degenerate {
        vec![0.0; replicates]
    } else {
        replicate_sums(&spec.model, &spec.f, &w, last - first + 1, replicates, seed, STREAM_PROCESS)
    };
    let report = CltReport {
        design: "triangular".into(),
        n,
        replicates,
        path_seed: None,
        process_seed: seed,
        normalization: if degenerate { 1.0 } else { sigma },
        sigma_n2,
        sigma_n2_source: source,
        target_variance: 1.0,
        target_source: source,
        empirical_mean: 0.0,
        empirical_variance: 0.0,
        empirical_variance_se: 0.0,
        normality: None,
        studentized: None,
        diagnostics: ArrayDiagnostics {
            sum_sq_weights: sum_sq,
            max_abs_weight: max_abs,
            a1_i: sigma_n2 / sum_sq,
            a1_ii: if degenerate { f64::INFINITY } else { max_abs / sigma },
            alpha0_over_n: None,
            max_local_time: None,
        },
        lindeberg: if degenerate {
            0.0
        } else {
            lindeberg_value(&spec.model, &spec.f, &a, sigma, LINDEBERG_EPSILON, seed)
        },
        degenerate,
        flags: if degenerate { vec!["degenerate: sigma_n^2 = 0".into()] } else { Vec::new() },
        samples: Vec::new(),
    };
    finish(report, raw, 1.0)
}

/// (A₁) quantities of the walk array `a_{n,x} = N_n(x)/√n`.
pub fn walk_array_diagnostics(ltf: &LocalTimeField, cov: &CovarianceTable) -> ArrayDiagnostics {
    let n = ltf.n as f64;
    let alpha0 = ltf.self_intersection(0) as f64;
    let sigma_n2 = sigma_n_empirical(ltf, cov) / n;
    let max_n = ltf.max_count();
    let max_abs = max_n as f64 / n.sqrt();
    ArrayDiagnostics {
        sum_sq_weights: alpha0 / n,
        max_abs_weight: max_abs,
        a1_i: sigma_n2 / (alpha0 / n),
        a1_ii: max_abs / sigma_n2.sqrt(),
        alpha0_over_n: Some(alpha0 / n),
        max_local_time: Some(max_n),
    }
}

/// Quenched walk-sampled sums: one path from `path_seed`, `R` process
/// realisations, each reported as `n^{−1/2} Σ_x N_n(x) f(ξ_x)`.
pub fn run_sampled(
    model: &ProcessModel,
    f: &Observable,
    law: &StepLaw,
    n: usize,
    replicates: usize,
    path_seed: u64,
    process_seed: u64,
) -> Result<CltReport> {
    check_replicates(replicates)?;
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let path = sample_path(law, n, path_seed, Transience::Required)?;
    let ltf = local_time(&path);
    let cov = covariance_table(model, f)?;
    let quenched = sigma_n_empirical(&ltf, &cov) / n as f64;
    let (target, target_source) = match sigma2_for_law(law, &cov) {
        Ok(r) => (r.sigma2, VarianceSource::Analytic),
        Err(Error::UnsupportedExact(_)) => (quenched, VarianceSource::Quenched),
        Err(e) => return Err(e),
    };
    let zero_f = cov.at(0) == 0.0;
    if (target <= 0.0 || quenched <= 0.0) && !zero_f {
        return Err(Error::Degenerate(format!("σ²(f) = {target}, σ_n²(f)/n = {quenched}")));
    }
    let degenerate = zero_f;
    let (lo, _) = ltf.span();
    let w: Vec<(usize, f64)> = ltf.entries.iter().map(|&(x, c)| ((x - lo) as usize, c as f64)).collect();
    let len = (ltf.span().1 - lo + 1) as usize;
    let raw = if degenerate {
        vec![0.0; replicates]
    } else {
        replicate_sums(model, f, &w, len, replicates, process_seed, STREAM_PROCESS)
    };
    let diagnostics = walk_array_diagnostics(&ltf, &cov);
    let weights: Vec<f64> = ltf.entries.iter().map(|e| e.1 as f64 / (n as f64).sqrt()).collect();
    let lindeberg = if degenerate {
        0.0
    } else {
        lindeberg_value(model, f, &weights, quenched.sqrt(), LINDEBERG_EPSILON, process_seed)
    };
    let report = CltReport {
        design: "sampled".into(),
        n,
        replicates,
        path_seed: Some(path_seed),
        process_seed,
        normalization: (n as f64).sqrt(),
        sigma_n2: quenched,
        sigma_n2_source: VarianceSource::Quenched,
        target_variance: target,
        target_source,
        empirical_mean: 0.0,
        empirical_variance: 0.0,
        empirical_variance_se: 0.0,
        normality: None,
        studentized: None,
        diagnostics: if degenerate {
            ArrayDiagnostics { a1_i: 0.0, a1_ii: f64::INFINITY, ..diagnostics }
        } else {
            diagnostics
        },
        lindeberg,
        degenerate,
        flags: if degenerate { vec!["degenerate: f = 0 in L2".into()] } else { Vec::new() },
        samples: Vec::new(),
    };
    finish(report, raw, 1.0 / quenched.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::NoiseSpec;
    use crate::variance::sigma2_asymptotic;

    fn identity(model: &ProcessModel) -> Observable {
        Observable::new(ObservableKind::IdentityCentered, model).unwrap()
    }

    #[test]
    fn weight_rules() {
        let model = ProcessModel::iid(NoiseSpec::standard_gaussian()).unwrap();
        let spec = TriangularSpec::new(
            model.clone(),
            ObservableKind::IdentityCentered,
            WeightRule::Tent,
            KnRule::Linear { factor: 1.0 },
        )
        .unwrap();
        let (lo, a) = spec.weights_at(3);
        assert_eq!(lo, -3);
        assert_eq!(a, vec![0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25]);
        let bad = TriangularSpec::new(
            model,
            ObservableKind::IdentityCentered,
            WeightRule::Explicit { weights: vec![0.0; 3] },
            KnRule::Linear { factor: 1.0 },
        );
        assert!(bad.is_err());
        assert_eq!(KnRule::Power { exponent: 0.5 }.k(10), 4);
    }

    #[test]
    fn weighted_variance_matches_double_sum() {
        let cov = CovarianceTable::geometric(1.3, -0.6).unwrap();
        let a = [0.3, -1.0, 2.0, 0.5, 0.0, 1.5];
        let mut brute = 0.0;
        for (i, x) in a.iter().enumerate() {
            for (j, y) in a.iter().enumerate() {
                brute += x * y * cov.at(i as i64 - j as i64);
            }
        }
        assert!((weighted_variance(&a, &cov) - brute).abs() < 1e-12);
    }

    #[test]
    fn iid_equal_weights_is_normal() {
        let model = ProcessModel::iid(NoiseSpec::standard_gaussian()).unwrap();
        let spec = TriangularSpec::new(
            model,
            ObservableKind::IdentityCentered,
            WeightRule::Equal,
            KnRule::Linear { factor: 1.0 },
        )
        .unwrap();
        let rep = run_triangular(&spec, 10_000, 5000, 5).unwrap();
        assert!(rep.normality.as_ref().unwrap().ks_pass);
        assert!(rep.flags.is_empty(), "{:?}", rep.flags);
        assert!(rep.lindeberg < 1e-3);
    }

    #[test]
    fn single_site_is_flagged() {
        let model = ProcessModel::iid(NoiseSpec::Uniform { lo: -1.0, hi: 1.0 }).unwrap();
        let spec = TriangularSpec::new(
            model,
            ObservableKind::IdentityCentered,
            WeightRule::SingleSite,
            KnRule::Linear { factor: 1.0 },
        )
        .unwrap();
        let rep = run_triangular(&spec, 100, 1000, 5).unwrap();
        let sigma = rep.sigma_n2.sqrt();
        assert!((rep.diagnostics.a1_ii - 1.0 / sigma).abs() < 1e-12);
        assert!(rep.flags.iter().any(|f| f.starts_with("A1(ii)")));
        assert!(rep.flags.iter().any(|f| f.starts_with("Lindeberg")));
    }

    #[test]
    fn ar1_long_run_variance() {
        let model = ProcessModel::ar1_unit_variance(0.5).unwrap();
        let spec = TriangularSpec::new(
            model,
            ObservableKind::IdentityCentered,
            WeightRule::Equal,
            KnRule::Linear { factor: 1.0 },
        )
        .unwrap();
        let n = 2000;
        let rep = run_triangular(&spec, n, 2000, 9).unwrap();
        // independent: Σ_z ρ^|z| over all z
        let lrv: f64 = (-200i32..=200).map(|z| 0.5f64.powi(z.abs())).sum();
        assert!((lrv - 3.0).abs() < 1e-12);
        let raw_var = rep.empirical_variance * rep.sigma_n2 / rep.diagnostics.sum_sq_weights;
        assert!((raw_var - lrv).abs() < 0.05 * lrv, "{raw_var}");
    }

    #[test]
    fn bounded_lindeberg_vanishes() {
        let model = ProcessModel::iid(NoiseSpec::Uniform { lo: -1.0, hi: 1.0 }).unwrap();
        let spec = TriangularSpec::new(
            model,
            ObservableKind::IdentityCentered,
            WeightRule::Equal,
            KnRule::Linear { factor: 1.0 },
        )
        .unwrap();
        // |a f| ≤ 1 ≤ 0.1·σ_n once 2n + 1 ≥ 300
        assert_eq!(lindeberg_diagnostic(&spec, 1000, 0.1, 200, 1).unwrap(), 0.0);
        assert!(lindeberg_diagnostic(&spec, 1000, 0.0, 200, 1).is_err());
    }

    #[test]
    fn pre_pass_for_nonlinear_models() {
        let model =
            ProcessModel::contraction(crate::process::ContractionMap::Tanh, 0.5, NoiseSpec::standard_gaussian())
                .unwrap();
        let spec = TriangularSpec::new(
            model,
            ObservableKind::IdentityCentered,
            WeightRule::Equal,
            KnRule::Linear { factor: 1.0 },
        )
        .unwrap();
        let rep = run_triangular(&spec, 200, 500, 3).unwrap();
        assert_eq!(rep.sigma_n2_source, VarianceSource::PrePass);
        assert!(rep.sigma_n2 > 0.0);
    }

    #[test]
    fn zero_observable_gives_zero_sums() {
        let model = ProcessModel::ar1_unit_variance(0.5).unwrap();
        let f = Observable::new(ObservableKind::CosineCentered { frequency: 0.0 }, &model).unwrap();
        let law = StepLaw::nearest_neighbour(0.75).unwrap();
        let rep = run_sampled(&model, &f, &law, 1000, 200, 1, 2).unwrap();
        assert!(rep.degenerate);
        assert!(rep.samples.iter().all(|s| *s == 0.0));
        assert!(rep.normality.is_none());
    }

    #[test]
    fn sampled_rejects_recurrent_walk() {
        let model = ProcessModel::ar1_unit_variance(0.5).unwrap();
        let law = StepLaw::nearest_neighbour(0.5).unwrap();
        let r = run_sampled(&model, &identity(&model), &law, 100, 200, 1, 2);
        assert!(matches!(r, Err(Error::NotTransient { .. })));
    }

    #[test]
    fn sampled_is_deterministic_and_consistent() {
        let model = ProcessModel::ar1_unit_variance(0.5).unwrap();
        let f = identity(&model);
        let law = StepLaw::nearest_neighbour(0.75).unwrap();
        let a = run_sampled(&model, &f, &law, 2000, 1000, 4, 8).unwrap();
        let b = run_sampled(&model, &f, &law, 2000, 1000, 4, 8).unwrap();
        assert_eq!(a, b);
        assert!((a.empirical_variance - a.sigma_n2).abs() < 3.0 * a.empirical_variance_se);
        let stud = a.studentized.as_ref().unwrap();
        assert!((stud.variance - a.empirical_variance / a.sigma_n2).abs() < 1e-9);
        let path = sample_path(&law, 2000, 4, Transience::Required).unwrap();
        let ltf = local_time(&path);
        let alpha0 = ltf.self_intersection(0) as f64 / 2000.0;
        let direct: f64 = ltf.entries.iter().map(|e| (e.1 as f64 / 2000f64.sqrt()).powi(2)).sum();
        assert_eq!(a.diagnostics.alpha0_over_n, Some(alpha0));
        assert!((direct - alpha0).abs() < 1e-12);
        let exact = sigma2_asymptotic(
            &crate::walk::green_exact(&law, -60, 60).unwrap(),
            &CovarianceTable::geometric(1.0, 0.5).unwrap(),
            None,
        )
        .unwrap();
        assert!((a.target_variance - exact.sigma2).abs() < 1e-9);
    }

    #[test]
    fn a1_ii_decreases_along_grid() {
        let law = StepLaw::nearest_neighbour(0.75).unwrap();
        let cov = CovarianceTable::geometric(1.0, 0.5).unwrap();
        let path = sample_path(&law, 100_000, DEFAULT_PATH_SEED, Transience::Required).unwrap();
        let first = walk_array_diagnostics(&local_time(&path.prefix(1000)), &cov).a1_ii;
        let last = walk_array_diagnostics(&local_time(&path), &cov).a1_ii;
        assert!(last <= first, "{first} -> {last}");
    }
}
