use quenched::dependence::{theta_series_sum, DependenceProfile};
use quenched::estimation::{coverage, coverage_runs, kappa_optimal_law};
use quenched::harness::run_sampled;
use quenched::process::{covariance_table, stationary_segment, NoiseSpec, Observable, ObservableKind, ProcessModel};
use quenched::seed::{derive_seed, STREAM_PROCESS};
use quenched::variance::{lemma_maj1_bound, sigma2_for_law, variance_convergence};
use quenched::walk::StepLaw;

fn ar1() -> ProcessModel {
    ProcessModel::ar1_unit_variance(0.5).unwrap()
}

#[test]
fn weighted_sum_variance_matches_quadratic_form_and_bound() {
    let model = ar1();
    let weights: Vec<f64> = (0..40).map(|i| if i % 5 == 0 { -1.0 } else { 0.5 + 0.01 * i as f64 }).collect();
    let exact: f64 = weights
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            weights.iter().enumerate().map(move |(j, b)| a * b * 0.5f64.powi((i as i32 - j as i32).abs()))
        })
        .sum();
    let replicates = 100_000u64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for r in 0..replicates {
        let w = stationary_segment(&model, 0, 39, derive_seed(11, STREAM_PROCESS, r)).unwrap();
        let s: f64 = weights.iter().zip(&w.values).map(|(a, x)| a * x).sum();
        sum += s;
        sum_sq += s * s;
    }
    let n = replicates as f64;
    let var = (sum_sq - sum * sum / n) / (n - 1.0);
    let se = exact * (2.0 / n).sqrt();
    assert!((var - exact).abs() < 4.0 * se, "simulated {var}, exact {exact}");

    let theta = theta_series_sum(&DependenceProfile::for_model(&model).unwrap(), 1_000_000).unwrap();
    assert!(var <= lemma_maj1_bound(&weights, 1.0, theta).unwrap());
}

#[test]
fn convergence_approaches_asymptotic_variance() {
    let model = ar1();
    let f = Observable::new(ObservableKind::IdentityCentered, &model).unwrap();
    let law = StepLaw::nearest_neighbour(0.8).unwrap();
    let target = sigma2_for_law(&law, &covariance_table(&model, &f).unwrap()).unwrap().sigma2;
    let points = variance_convergence(&model, &f, &law, &[100, 1_000, 50_000], 5).unwrap();
    assert_eq!(points.iter().map(|p| p.n).collect::<Vec<_>>(), vec![100, 1_000, 50_000]);
    let last = points.last().unwrap().sigma_n2_over_n;
    assert!((last - target).abs() / target < 0.1, "{last} vs {target}");
}

#[test]
fn sampled_sums_look_normal_for_a_fixed_path() {
    let model = ProcessModel::iid(NoiseSpec::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
    let f = Observable::new(ObservableKind::CosineCentered { frequency: 2.0 }, &model).unwrap();
    let law = StepLaw::new(vec![-1, 1, 2], vec![0.2, 0.5, 0.3]).unwrap();
    let report = run_sampled(&model, &f, &law, 2_000, 1_000, 3, 4).unwrap();
    let normality = report.normality.as_ref().unwrap();
    assert!(normality.ks_pass, "KS {}", normality.ks_statistic);
    assert!((report.empirical_variance / report.sigma_n2 - 1.0).abs() < 0.15);
}

#[test]
fn small_coverage_run_is_near_nominal() {
    let design = kappa_optimal_law(0.5, 2.5).unwrap();
    let report = coverage(&ar1(), &design, 2_000, 400, 9).unwrap();
    assert_eq!(report.runs, 400);
    assert!((0.9..=0.99).contains(&report.rate), "{}", report.rate);
}

#[test]
fn scaled_variance_of_sampled_mean_matches_a_of_s() {
    let design = kappa_optimal_law(0.5, 2.5).unwrap();
    let n = 2_000;
    let runs = coverage_runs(&ar1(), &design, n, 2_000, 13).unwrap();
    let r = runs.len() as f64;
    let mean = runs.iter().map(|e| e.m_hat).sum::<f64>() / r;
    let var = runs.iter().map(|e| (e.m_hat - mean).powi(2)).sum::<f64>() / (r - 1.0);
    let a = runs[0].a_of_s;
    assert!((n as f64 * var / a - 1.0).abs() < 4.0 * (2.0 / r).sqrt(), "{} vs {a}", n as f64 * var);
}
