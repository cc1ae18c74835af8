//! Mean estimation from randomly sampled observations and optimal sampling
//! designs.
//!
//! For a walk with steps on `ℕ*` the sampled mean `m̂_n = n^{−1} Σ ξ_{S_i}`
//! has asymptotic variance `a(S) = 2 Σ_{x≥0} u(x) c(x) − c(0)` where `u` is
//! the renewal measure of the walk. With `c(x) = v ρ^x` this is
//! `v (1 + φ)/(1 − φ)`, `φ = E ρ^{S_1}`.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::process::{covariance_table, stationary_segment, CovarianceTable, Observable, ObservableKind, ProcessModel};
use crate::seed::{derive_seed, STREAM_PATH, STREAM_PROCESS, STREAM_REPLICATE};
use crate::walk::{sample_path, StepLaw, Transience};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;
/// Tail tolerance of the renewal-measure sum.
pub const A_OF_S_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingDesign {
    pub law: StepLaw,
    pub kappa: Option<f64>,
    /// Every admissible law is optimal (ρ = 0).
    pub tie: bool,
}

impl SamplingDesign {
    pub fn new(law: StepLaw) -> Result<Self> {
        check_positive(&law)?;
        Ok(SamplingDesign { law, kappa: None, tie: false })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationReport {
    pub m_hat: f64,
    pub n: usize,
    pub a_of_s: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub half_width: f64,
    pub true_mean: f64,
    pub covers: bool,
    pub degenerate: bool,
    pub design: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub runs: usize,
    pub covered: usize,
    pub rate: f64,
    pub a_of_s: f64,
    pub mean_half_width: f64,
}

fn check_positive(law: &StepLaw) -> Result<()> {
    if law.min_step() < 1 {
        return Err(domain(format!("sampling designs need steps in {{1, 2, ...}}, got support {:?}", law.support())));
    }
    Ok(())
}

pub fn sampled_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(domain("the sampled mean needs n >= 1"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// `E ρ^{S_1}`.
pub fn generating_function(law: &StepLaw, rho: f64) -> f64 {
    law.atoms().map(|(x, p)| p * rho.powi(x as i32)).sum()
}

/// `a(S)` for a design on positive steps.
pub fn a_of_s(cov: &CovarianceTable, law: &StepLaw) -> Result<f64> {
    check_positive(law)?;
    if !cov.is_summable() {
        return Err(Error::Divergent("covariance table is not absolutely summable".into()));
    }
    if let Some((v, rho)) = cov.geometric_form() {
        let phi = generating_function(law, rho);
        return Ok(v * (1.0 + phi) / (1.0 - phi));
    }
    // renewal measure u(0) = 1, u(x) = Σ_j p_j u(x − j); u ≤ 1
    let mut x_max = 0usize;
    while 2.0 * cov.tail_abs_bound(x_max) >= A_OF_S_TOLERANCE {
        x_max = if x_max == 0 { 1 } else { x_max * 2 };
        if x_max > 1 << 26 {
            return Err(Error::Truncation { tail_bound: 2.0 * cov.tail_abs_bound(x_max), tolerance: A_OF_S_TOLERANCE });
        }
    }
    let mut u = vec![0.0; x_max + 1];
    u[0] = 1.0;
    for x in 1..=x_max {
        u[x] = law.atoms().filter(|&(j, _)| j as usize <= x).map(|(j, p)| p * u[x - j as usize]).sum();
    }
    let sum: f64 = (0..=x_max).map(|x| u[x] * cov.at(x as i64)).sum();
    Ok(2.0 * sum - cov.at(0))
}

fn to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// `E S_1 ≤ κ` in exact rational arithmetic on the stored floating values.
pub fn mean_within_budget(law: &StepLaw, kappa: f64) -> bool {
    let mean =
        law.atoms().fold(BigRational::zero(), |acc, (x, p)| acc + to_rational(p) * BigRational::from_integer(x.into()));
    mean <= to_rational(kappa)
}

/// `(1 − w) δ_lo + w δ_hi` whose stored probabilities keep the mean at or
/// below the intended value.
fn two_point(lo: i64, hi: i64, w: f64) -> Result<StepLaw> {
    let mut p_lo = 1.0 - w;
    if to_rational(p_lo) + to_rational(w) > BigRational::one() {
        p_lo = f64::from_bits(p_lo.to_bits() - 1);
    }
    StepLaw::new(vec![lo, hi], vec![p_lo, w])
}

fn check_design_inputs(rho: f64, kappa: f64) -> Result<()> {
    if !(rho.abs() < 1.0) {
        return Err(domain(format!("design needs |rho| < 1, got {rho}")));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(domain(format!("rate budget kappa must be a finite value >= 1, got {kappa}")));
    }
    Ok(())
}

/// Taga's κ-optimal law for AR(1) with coefficient `rho`.
pub fn kappa_optimal_law(rho: f64, kappa: f64) -> Result<SamplingDesign> {
    check_design_inputs(rho, kappa)?;
    let law = if rho <= 0.0 {
        StepLaw::delta(1)
    } else {
        let floor = kappa.floor();
        let frac = kappa - floor;
        if frac == 0.0 {
            StepLaw::delta(floor as i64)
        } else {
            two_point(floor as i64, floor as i64 + 1, frac)?
        }
    };
    Ok(SamplingDesign { law, kappa: Some(kappa), tie: rho == 0.0 })
}

/// Minimises `E ρ^{S_1}` over laws on `{1..K}` with mean at most `κ` by
/// enumerating the vertices of the feasible polytope: point masses
/// `δ_x`, `x ≤ κ`, and pairs `x ≤ κ < y` with mean exactly `κ`.
pub fn brute_force_optimal(rho: f64, kappa: f64, max_support: usize) -> Result<SamplingDesign> {
    check_design_inputs(rho, kappa)?;
    let min_k = kappa.ceil() as usize + 2;
    if max_support < min_k {
        return Err(domain(format!("max support K = {max_support} must be at least ceil(kappa) + 2 = {min_k}")));
    }
    let k = max_support as i64;
    let mut best: Option<(f64, StepLaw)> = None;
    let mut consider = |phi: f64, law: StepLaw| {
        if best.as_ref().is_none_or(|(b, _)| phi < *b) {
            best = Some((phi, law));
        }
    };
    for x in 1..=k {
        if (x as f64) <= kappa {
            consider(rho.powi(x as i32), StepLaw::delta(x));
        }
    }
    for x in 1..=k {
        for y in (x + 1)..=k {
            if (x as f64) <= kappa && (y as f64) > kappa {
                let w = (kappa - x as f64) / (y - x) as f64;
                if w > 0.0 {
                    let law = two_point(x, y, w)?;
                    consider(generating_function(&law, rho), law);
                }
            }
        }
    }
    let (_, law) = best.expect("δ_1 is always feasible");
    Ok(SamplingDesign { law, kappa: Some(kappa), tie: rho == 0.0 })
}

/// One seeded run: sample `S_1..S_n`, the process on `[1, S_n]`, and report
/// `m̂_n` with the interval `m̂_n ± 1.96 √(a(S)/n)`.
pub fn estimate_with_ci(
    model: &ProcessModel,
    design: &SamplingDesign,
    n: usize,
    seed: u64,
) -> Result<EstimationReport> {
    let cov = covariance_table(model, &Observable::new(ObservableKind::IdentityCentered, model)?)?;
    let a = a_of_s(&cov, &design.law)?;
    run_estimate(model, design, n, seed, a)
}

fn run_estimate(
    model: &ProcessModel,
    design: &SamplingDesign,
    n: usize,
    seed: u64,
    a: f64,
) -> Result<EstimationReport> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let path = sample_path(&design.law, n, derive_seed(seed, STREAM_PATH, 0), Transience::Required)?;
    let last = path.positions[n];
    let window = stationary_segment(model, 1, last, derive_seed(seed, STREAM_PROCESS, 0))?;
    let values: Vec<f64> = path.positions[1..].iter().map(|&s| window.at(s).expect("inside window")).collect();
    let m_hat = sampled_mean(&values)?;
    let half_width = Z_95 * (a.max(0.0) / n as f64).sqrt();
    let true_mean = model.marginal_mean;
    Ok(EstimationReport {
        m_hat,
        n,
        a_of_s: a,
        ci_lo: m_hat - half_width,
        ci_hi: m_hat + half_width,
        half_width,
        true_mean,
        covers: (m_hat - true_mean).abs() <= half_width,
        degenerate: a <= 0.0,
        design: format!("support {:?} probs {:?}", design.law.support(), design.law.probs()),
        seed,
    })
}

/// The `runs` seeded estimation runs behind a coverage study.
pub fn coverage_runs(
    model: &ProcessModel,
    design: &SamplingDesign,
    n: usize,
    runs: usize,
    seed: u64,
) -> Result<Vec<EstimationReport>> {
    if runs == 0 {
        return Err(domain("coverage needs at least one run"));
    }
    let cov = covariance_table(model, &Observable::new(ObservableKind::IdentityCentered, model)?)?;
    let a = a_of_s(&cov, &design.law)?;
    (0..runs)
        .into_par_iter()
        .map(|r| run_estimate(model, design, n, derive_seed(seed, STREAM_REPLICATE, r as u64), a))
        .collect()
}

pub fn summarize_coverage(reports: &[EstimationReport]) -> CoverageReport {
    let runs = reports.len();
    let covered = reports.iter().filter(|r| r.covers).count();
    CoverageReport {
        runs,
        covered,
        rate: covered as f64 / runs.max(1) as f64,
        a_of_s: reports.first().map_or(0.0, |r| r.a_of_s),
        mean_half_width: reports.iter().map(|r| r.half_width).sum::<f64>() / runs.max(1) as f64,
    }
}

/// Fraction of `runs` seeded intervals that contain the true mean.
pub fn coverage(
    model: &ProcessModel,
    design: &SamplingDesign,
    n: usize,
    runs: usize,
    seed: u64,
) -> Result<CoverageReport> {
    Ok(summarize_coverage(&coverage_runs(model, design, n, runs, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{CausalCoefficients, CovarianceTail, NoiseSpec};

    /// `v[1 + 2 Σ_{k≥1} E ρ^{S_k}]` with the law of `S_k` built by explicit convolution.
    fn convolution_oracle(v: f64, rho: f64, law: &StepLaw) -> f64 {
        let mut dist = vec![1.0];
        let mut total = 1.0;
        for _ in 0..400 {
            let mut next = vec![0.0; dist.len() + law.max_step() as usize];
            for (s, p) in dist.iter().enumerate() {
                for (x, q) in law.atoms() {
                    next[s + x as usize] += p * q;
                }
            }
            dist = next;
            let term: f64 = dist.iter().enumerate().map(|(s, p)| p * rho.powi(s as i32)).sum();
            total += 2.0 * term;
            if term.abs() < 1e-16 {
                break;
            }
        }
        v * total
    }

    #[test]
    fn sampled_mean_examples() {
        assert_eq!(sampled_mean(&[1.0, 3.0]).unwrap(), 2.0);
        assert_eq!(sampled_mean(&[4.5; 7]).unwrap(), 4.5);
        assert!(sampled_mean(&[]).is_err());
    }

    #[test]
    fn a_of_s_examples() {
        let d1 = StepLaw::delta(1);
        let d2 = StepLaw::delta(2);
        let ar = CovarianceTable::geometric(1.0, 0.5).unwrap();
        assert!((a_of_s(&ar, &d1).unwrap() - 3.0).abs() < 1e-14);
        assert!((a_of_s(&ar, &d2).unwrap() - 5.0 / 3.0).abs() < 1e-14);
        assert!((convolution_oracle(1.0, 0.5, &d2) - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(a_of_s(&CovarianceTable::geometric(2.0, 0.0).unwrap(), &d2).unwrap(), 2.0);
        let taga = kappa_optimal_law(0.5, 2.5).unwrap();
        let a = a_of_s(&ar, &taga.law).unwrap();
        assert!((a - 1.1875 / 0.8125).abs() < 1e-12);
        assert!((a - convolution_oracle(1.0, 0.5, &taga.law)).abs() < 1e-10);
        assert!(a_of_s(&ar, &StepLaw::nearest_neighbour(0.7).unwrap()).is_err());
    }

    #[test]
    fn renewal_sum_matches_closed_form() {
        // same covariance stored with an explicit head forces the renewal path
        let law = StepLaw::new(vec![1, 3, 4], vec![0.2, 0.5, 0.3]).unwrap();
        let rho = 0.7f64;
        let explicit =
            CovarianceTable::new(vec![1.0, rho, rho * rho], CovarianceTail::Geometric { ratio: rho }).unwrap();
        let closed = a_of_s(&CovarianceTable::geometric(1.0, rho).unwrap(), &law).unwrap();
        assert!((a_of_s(&explicit, &law).unwrap() - closed).abs() < 1e-10);
        let divergent = CovarianceTable::new(vec![1.0, 0.5], CovarianceTail::PowerLaw { exponent: 1.0 }).unwrap();
        assert!(matches!(a_of_s(&divergent, &law), Err(Error::Divergent(_))));
    }

    #[test]
    fn taga_examples() {
        assert_eq!(kappa_optimal_law(-0.3, 3.0).unwrap().law, StepLaw::delta(1));
        let l = kappa_optimal_law(0.5, 2.5).unwrap().law;
        assert_eq!(l.support(), &[2, 3]);
        assert_eq!(l.probs(), &[0.5, 0.5]);
        assert_eq!(kappa_optimal_law(0.5, 3.0).unwrap().law, StepLaw::delta(3));
        let tie = kappa_optimal_law(0.0, 2.0).unwrap();
        assert!(tie.tie && tie.law == StepLaw::delta(1));
        assert!(kappa_optimal_law(1.0, 2.0).is_err());
        assert!(kappa_optimal_law(0.5, 0.5).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let b = brute_force_optimal(0.5, 2.5, 6).unwrap();
        assert!(b.law.total_variation(&kappa_optimal_law(0.5, 2.5).unwrap().law) < 1e-12);
        assert_eq!(brute_force_optimal(-0.3, 3.0, 6).unwrap().law, StepLaw::delta(1));
        assert_eq!(brute_force_optimal(0.9, 1.0, 3).unwrap().law, StepLaw::delta(1));
        assert!(brute_force_optimal(0.5, 2.5, 4).is_err());
        assert!(brute_force_optimal(0.5, 0.9, 6).is_err());
    }

    #[test]
    fn oracle_grid_and_monotone_benefit() {
        let kappas = [1.0, 1.5, 2.0, 2.5, 3.0, 4.25];
        for rho in [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9] {
            let mut prev = f64::INFINITY;
            for kappa in kappas {
                let taga = kappa_optimal_law(rho, kappa).unwrap();
                let brute = brute_force_optimal(rho, kappa, kappa.ceil() as usize + 4).unwrap();
                assert!(taga.law.total_variation(&brute.law) < 1e-10, "rho {rho} kappa {kappa}");
                assert!(mean_within_budget(&taga.law, kappa) && mean_within_budget(&brute.law, kappa));
                if rho > 0.0 {
                    let a = a_of_s(&CovarianceTable::geometric(1.0, rho).unwrap(), &taga.law).unwrap();
                    assert!(a <= prev);
                    prev = a;
                }
            }
        }
    }

    #[test]
    fn budget_is_exact() {
        for kappa in [1.1, 1.3, 2.7, 3.9, 7.123456789] {
            let l = kappa_optimal_law(0.4, kappa).unwrap().law;
            assert!(mean_within_budget(&l, kappa), "kappa {kappa}");
        }
        assert!(!mean_within_budget(&StepLaw::delta(3), 2.999_999_999));
    }

    #[test]
    fn constant_process_is_degenerate() {
        let model = ProcessModel::iid(NoiseSpec::Gaussian { mean: 2.5, sd: 0.0 }).unwrap();
        let rep = estimate_with_ci(&model, &SamplingDesign::new(StepLaw::delta(2)).unwrap(), 100, 1).unwrap();
        assert_eq!(rep.m_hat, 2.5);
        assert_eq!(rep.half_width, 0.0);
        assert!(rep.degenerate);
    }

    #[test]
    fn ar1_delta2_within_three_sigma() {
        let model = ProcessModel::ar1(0.5, NoiseSpec::Gaussian { mean: 1.0, sd: 0.75f64.sqrt() }).unwrap();
        let design = SamplingDesign::new(StepLaw::delta(2)).unwrap();
        let a = 5.0 / 3.0;
        let n = 20_000;
        let runs = 200;
        let inside = (0..runs)
            .filter(|r| {
                let rep = estimate_with_ci(&model, &design, n, *r as u64).unwrap();
                (rep.m_hat - 2.0).abs() <= 3.0 * (a / n as f64).sqrt()
            })
            .count();
        assert!(inside as f64 >= 0.97 * runs as f64, "{inside}");
    }

    #[test]
    fn coverage_near_nominal() {
        let model = ProcessModel::ar1_unit_variance(0.5).unwrap();
        let design = SamplingDesign::new(StepLaw::delta(1)).unwrap();
        let rep = coverage(&model, &design, 2000, 400, 17).unwrap();
        assert!(rep.rate > 0.9 && rep.rate < 0.99, "{}", rep.rate);
        assert!((rep.a_of_s - 3.0).abs() < 1e-12);
    }

    #[test]
    fn causal_model_uses_renewal_sum() {
        let model = ProcessModel::causal_linear(
            CausalCoefficients::new(vec![1.0, 0.5, 0.25], None).unwrap(),
            NoiseSpec::standard_gaussian(),
        )
        .unwrap();
        let design = SamplingDesign::new(StepLaw::delta(1)).unwrap();
        let rep = estimate_with_ci(&model, &design, 1000, 3).unwrap();
        // c = (1.3125, 0.625, 0.25): a = c0 + 2(c1 + c2)
        assert!((rep.a_of_s - (1.3125 + 2.0 * 0.875)).abs() < 1e-12);
    }
}
