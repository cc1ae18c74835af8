use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use quenched::dependence::{a3_check, theta2_upper, theta_series_sum, A3Verdict, BoundKind};
use quenched::estimation::{
    a_of_s, brute_force_optimal, coverage_runs, kappa_optimal_law, mean_within_budget, summarize_coverage,
    CoverageReport, SamplingDesign,
};
use quenched::harness::{
    lindeberg_diagnostic, run_sampled, run_triangular, sweep_path_seed, CltReport, TriangularSpec,
};
use quenched::process::{covariance_table, CovarianceTable, ProcessKind};
use quenched::seed::DERIVATION_RULE;
use quenched::variance::{convergence_for_table, sigma2_asymptotic, sigma2_for_law, ConvergencePoint, VarianceReport};
use quenched::walk::{green_exact, green_mc, local_time, sample_path, GreenTable, StepLaw, Transience};
use serde::Serialize;

use crate::config::{self, DesignChoice, Diagnostic, ExperimentKind, GreenChoice, SeedRecord, Severity, Validated};
use crate::output::{sha256_hex, ArtifactRecord, ArtifactWriter};
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Soft bound `max_x N_n(x)/√n ≤ n^0.05`, logged but never enforced.
const MAX_LOCAL_TIME_EXPONENT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub experiment: &'static str,
    pub seeds: SeedRecord,
    pub derivation_rule: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub toolkit_version: String,
    pub config_sha256: String,
    pub seeds: SeedRecord,
    pub derivation_rule: String,
    pub artifacts: Vec<ArtifactRecord>,
    pub wall_clock_seconds: f64,
    pub threads: usize,
}

/// Reads and validates a config file without running it.
pub fn validate_file(path: &Path) -> Vec<Diagnostic> {
    match read_config(path) {
        Ok((_, text)) => match config::parse(&text) {
            Ok(c) => config::validate(c, None).1,
            Err(d) => d,
        },
        Err(d) => vec![d],
    }
}

fn read_config(path: &Path) -> Result<(Vec<u8>, String), Diagnostic> {
    let bytes =
        fs::read(path).map_err(|e| Diagnostic::error("config", format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Diagnostic::error("config", "file is not UTF-8"))?;
    Ok((bytes, text))
}

/// Validates and runs the config at `path`.
pub fn run(path: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<RunManifest, CliError> {
    let (bytes, text) = read_config(path).map_err(|d| CliError::Validation(vec![d]))?;
    let config = config::parse(&text).map_err(CliError::Validation)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let dir = match (out, &config.output) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) if Path::new(o).is_absolute() => PathBuf::from(o),
        (None, Some(o)) => base.join(o),
        (None, None) => base.join("out").join(config.experiment.name()),
    };
    run_config(config, &sha256_hex(&bytes), &dir, seed)
}

/// Runs an already parsed config, writing artifacts into `dir`.
pub fn run_config(
    config: config::ExperimentConfig,
    config_hash: &str,
    dir: &Path,
    seed: Option<u64>,
) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let (validated, diagnostics) = config::validate(config, seed);
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(CliError::Validation(diagnostics));
    }
    if !diagnostics.is_empty() {
        let msg = diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ");
        return Err(CliError::Assumption(msg));
    }
    let v = validated.expect("no diagnostics");
    let mut writer = ArtifactWriter::new(dir)?;
    let kind = v.config.experiment;
    match kind {
        ExperimentKind::WalkDiagnostics => walk_diagnostics(&v, &mut writer)?,
        ExperimentKind::Green => green(&v, &mut writer)?,
        ExperimentKind::Variance => variance(&v, &mut writer)?,
        ExperimentKind::CltTriangular => clt_triangular(&v, &mut writer)?,
        ExperimentKind::CltSampled => clt_sampled(&v, &mut writer)?,
        ExperimentKind::DependenceProfile => dependence_profile(&v, &mut writer)?,
        ExperimentKind::Estimate => estimate(&v, &mut writer)?,
        ExperimentKind::OptimalDesign => optimal_design(&v, &mut writer)?,
    }
    let manifest = RunManifest {
        experiment: kind.name().to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: config_hash.to_string(),
        seeds: v.seeds,
        derivation_rule: DERIVATION_RULE.to_string(),
        artifacts: writer.into_records(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Other(e.to_string()))?;
    bytes.push(b'\n');
    fs::write(dir.join(MANIFEST_FILE), bytes)?;
    Ok(manifest)
}

fn provenance(v: &Validated) -> Provenance {
    Provenance { experiment: v.config.experiment.name(), seeds: v.seeds, derivation_rule: DERIVATION_RULE }
}

fn law(v: &Validated) -> &StepLaw {
    v.law.as_ref().expect("validated walk")
}

/// Fixed path first, then the sweep paths.
fn path_seeds(seeds: &SeedRecord) -> Vec<u64> {
    if seeds.path_sweep == 0 {
        vec![seeds.path]
    } else {
        (0..seeds.path_sweep).map(|i| sweep_path_seed(seeds.path, i)).collect()
    }
}

/// `2G(0,0) − 1` when the Green function is known in closed form.
fn alpha0_target(law: &StepLaw) -> Option<f64> {
    green_exact(law, 0, 0).ok().map(|g| 2.0 * g.values[0] - 1.0)
}

#[derive(Serialize)]
struct WalkRow {
    path_seed: u64,
    n: usize,
    min: i64,
    max: i64,
    max_abs: u64,
    distinct_sites: usize,
    max_local_time: u64,
    max_local_time_over_sqrt_n: f64,
    max_local_time_soft_bound: f64,
    max_local_time_exceeds: bool,
    alpha0: u64,
    alpha0_over_n: f64,
    target: Option<f64>,
}

#[derive(Serialize)]
struct LocalTimeRow {
    x: i64,
    #[serde(rename = "N_n(x)")]
    count: u64,
}

fn walk_diagnostics(v: &Validated, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let law = law(v);
    let grid = &v.config.n_grid;
    let n_max = *grid.last().expect("validated grid");
    let target = alpha0_target(law);
    let mut rows = Vec::new();
    let mut last_field = Vec::new();
    for seed in path_seeds(&v.seeds) {
        let path = sample_path(law, n_max, seed, Transience::Override)?;
        for &n in grid {
            let ltf = local_time(&path.prefix(n));
            let (min, max) = ltf.span();
            let alpha0 = ltf.self_intersection(0);
            let ratio = ltf.max_count() as f64 / (n as f64).sqrt();
            let soft = (n as f64).powf(MAX_LOCAL_TIME_EXPONENT);
            rows.push(WalkRow {
                path_seed: seed,
                n,
                min,
                max,
                max_abs: ltf.max_abs_position,
                distinct_sites: ltf.entries.len(),
                max_local_time: ltf.max_count(),
                max_local_time_over_sqrt_n: ratio,
                max_local_time_soft_bound: soft,
                max_local_time_exceeds: ratio > soft,
                alpha0,
                alpha0_over_n: alpha0 as f64 / n as f64,
                target,
            });
            if last_field.is_empty() && n == n_max {
                last_field = ltf.entries.iter().map(|&(x, count)| LocalTimeRow { x, count }).collect();
            }
        }
    }
    #[derive(Serialize)]
    struct Report<'a> {
        provenance: Provenance,
        law: &'a StepLaw,
        alpha0_over_n_target: Option<f64>,
        rows: &'a [WalkRow],
    }
    w.json(
        "walk_diagnostics.json",
        &Report { provenance: provenance(v), law, alpha0_over_n_target: target, rows: &rows },
    )?;
    w.csv("walk_diagnostics.csv", &rows)?;
    w.csv("local_time.csv", &last_field)
}

#[derive(Serialize)]
struct GreenRow {
    x: i64,
    exact: Option<f64>,
    monte_carlo: Option<f64>,
    std_error: Option<f64>,
    z_score: Option<f64>,
}

fn green(v: &Validated, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let law = law(v);
    let g = v.config.green.as_ref().expect("validated green block");
    let exact = match g.method {
        GreenChoice::MonteCarlo => None,
        _ => Some(green_exact(law, g.lo, g.hi)?),
    };
    let mc = match g.method {
        GreenChoice::Exact => None,
        _ => Some(green_mc(law, g.lo, g.hi, g.truncation, g.replicates, v.seeds.process)?),
    };
    let rows: Vec<GreenRow> = (g.lo..=g.hi)
        .map(|x| {
            let e = exact.as_ref().and_then(|t| t.get(x));
            let m = mc.as_ref().and_then(|t| t.get(x));
            let se = mc.as_ref().and_then(|t| t.std_error(x));
            let z = match (e, m, se) {
                (Some(e), Some(m), Some(se)) if se > 0.0 => Some((m - e) / se),
                _ => None,
            };
            GreenRow { x, exact: e, monte_carlo: m, std_error: se, z_score: z }
        })
        .collect();
    let max_abs_z = rows.iter().filter_map(|r| r.z_score).map(f64::abs).reduce(f64::max);
    #[derive(Serialize)]
    struct Report<'a> {
        provenance: Provenance,
        law: &'a StepLaw,
        exact: Option<&'a GreenTable>,
        monte_carlo: Option<&'a GreenTable>,
        max_abs_z: Option<f64>,
    }
    w.json(
        "green.json",
        &Report { provenance: provenance(v), law, exact: exact.as_ref(), monte_carlo: mc.as_ref(), max_abs_z },
    )?;
    w.csv("green.csv", &rows)
}

#[derive(Serialize)]
struct ConvergenceRow {
    path_seed: u64,
    n: usize,
    sigma_n2_over_n: f64,
    target: Option<f64>,
}

fn variance(v: &Validated, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let law = law(v);
    let model = v.model.as_ref().expect("validated model");
    let cov = covariance_table(model, v.f.as_ref().expect("validated f"))?;
    let mut report: VarianceReport = match (sigma2_for_law(law, &cov), &v.config.green) {
        (Ok(r), _) => r,
        (Err(quenched::Error::UnsupportedExact(_)), Some(g)) => {
            let table = green_mc(law, g.lo, g.hi, g.truncation, g.replicates, v.seeds.process)?;
            sigma2_asymptotic(&table, &cov, None)?
        }
        (Err(e), _) => return Err(e.into()),
    };
    let mut rows = Vec::new();
    if !v.config.n_grid.is_empty() {
        for seed in path_seeds(&v.seeds) {
            let points = convergence_for_table(&cov, law, &v.config.n_grid, seed)?;
            rows.extend(points.iter().map(|p| ConvergenceRow {
                path_seed: seed,
                n: p.n,
                sigma_n2_over_n: p.sigma_n2_over_n,
                target: Some(report.sigma2),
            }));
            if report.empirical.is_empty() {
                report.empirical =
                    points.into_iter().map(|p| ConvergencePoint { target: Some(report.sigma2), ..p }).collect();
            }
        }
    }
    #[derive(Serialize)]
    struct Report<'a> {
        provenance: Provenance,
        covariance: &'a CovarianceTable,
        report: &'a VarianceReport,
    }
    w.json("variance.json", &Report { provenance: provenance(v), covariance: &cov, report: &report })?;
    w.csv("variance_contributions.csv", &report.table)?;
    if !rows.is_empty() {
        w.csv("convergence.csv", &rows)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SampleRow {
    replicate: usize,
    value: f64,
}

fn write_samples(w: &mut ArtifactWriter, name: &str, report: &CltReport) -> Result<(), CliError> {
    let rows: Vec<SampleRow> =
        report.samples.iter().enumerate().map(|(replicate, &value)| SampleRow { replicate, value }).collect();
    w.csv(name, &rows)
}

#[derive(Serialize)]
struct CltSummary {
    reports: usize,
    ks_pass: usize,
    flagged: usize,
}

fn summarize(reports: &[CltReport]) -> CltSummary {
    CltSummary {
        reports: reports.len(),
        ks_pass: reports.iter().filter(|r| r.normality.as_ref().is_some_and(|n| n.ks_pass)).count(),
        flagged: reports.iter().filter(|r| !r.flags.is_empty()).count(),
    }
}

fn clt_triangular(v: &Validated, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let model = v.model.clone().expect("validated model");
    let t = v.config.triangular.as_ref().expect("validated triangular block");
    let spec = TriangularSpec::new(model, v.config.f.expect("validated f"), t.weights.clone(), t.k_n)?;
    let replicates = v.config.replicates.expect("validated replicates");
    let mut reports = Vec::new();
    for &n in &v.config.n_grid {
        let mut report = run_triangular(&spec, n, replicates, v.seeds.process)?;
        if let Some(eps) = t.lindeberg_epsilon {
            report.lindeberg = lindeberg_diagnostic(&spec, n, eps, replicates, v.seeds.process)?;
        }
        write_samples(w, &format!("samples_n{n}.csv"), &report)?;
        reports.push(report);
    }
    #[derive(Serialize)]
    struct Report<'a> {
        provenance: Provenance,
        spec: &'a TriangularSpec,
        summary: CltSummary,
        reports: &'a [CltReport],
    }
    w.json(
        "clt_triangular.json",
        &Report { provenance: provenance(v), spec: &spec, summary: summarize(&reports), reports: &reports },
    )
}

fn clt_sampled(v: &Validated, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let model = v.model.as_ref().expect("validated model");
    let f = v.f.as_ref().expect("validated f");
    let law = law(v);
    let replicates = v.config.replicates.expect("validated replicates");
    let mut reports = Vec::new();
    for (j, seed) in path_seeds(&v.seeds).into_iter().enumerate() {
        for &n in &v.config.n_grid {
            let report = run_sampled(model, f, law, n, replicates, seed, v.seeds.process)?;
            write_samples(w, &format!("samples_path{j}_n{n}.csv"), &report)?;
            reports.push(report);
        }
    }
    #[derive(Serialize)]
    struct Report<'a> {
        provenance: Provenance,
        law: &'a StepLaw,
        summary: CltSummary,
        reports: &'a [CltReport],
    }
    w.json(
        "clt_sampled.json",
        &Report { provenance: provenance(v), law, summary: summarize(&reports), reports: &reports },
    )
}

#[derive(Serialize)]
struct BoundRow {
    n: usize,
    bound: f64,
}

fn dependence_profile(v: &Validated, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let profile = v.profile.as_ref().expect("validated profile");
    let (n_max, k_max) = v.config.profile.as_ref().map_or((50, 1_000_000), |p| (p.n_max, p.k_max));
    let rows: Vec<BoundRow> = (1..=n_max.max(1))
        .map(|n| Ok(BoundRow { n, bound: theta2_upper(profile, n)? }))
        .collect::<Result<_, quenched::Error>>()?;
    let verdict: A3Verdict = match profile.bound {
        BoundKind::PowerLaw { c, a } => a3_check(c, a)?,
        _ => profile.a3_verdict(),
    };
    let (series, series_note) = match theta_series_sum(profile, k_max) {
        Ok(s) => (Some(s), None),
        Err(e @ quenched::Error::Divergent(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    #[derive(Serialize)]
    struct Report<'a> {
        provenance: Provenance,
        profile: &'a quenched::dependence::DependenceProfile,
        theta_series_sum: Option<f64>,
        theta_series_note: Option<String>,
        a3: &'a A3Verdict,
    }
    w.json(
        "dependence_profile.json",
        &Report {
            provenance: provenance(v),
            profile,
            theta_series_sum: series,
            theta_series_note: series_note,
            a3: &verdict,
        },
    )?;
    w.csv("profile.csv", &rows)
}

#[derive(Serialize)]
struct EstimateRow {
    n: usize,
    run: usize,
    m_hat: f64,
    ci_lo: f64,
    ci_hi: f64,
    covers: bool,
}

fn estimate(v: &Validated, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let model = v.model.as_ref().expect("validated model");
    let block = v.config.estimate.as_ref().expect("validated estimate block");
    let design = match &block.design {
        DesignChoice::Taga { kappa } => {
            let ProcessKind::LinearAr1 { rho, .. } = model.kind else {
                return Err(CliError::Validation(vec![Diagnostic::error(
                    "estimate.design",
                    "Taga design needs an AR(1) model",
                )]));
            };
            kappa_optimal_law(rho, *kappa)?
        }
        DesignChoice::Law { walk } => {
            let law = config::parse_walk(walk)
                .map_err(|e| CliError::Validation(vec![Diagnostic::error("estimate.design.walk", e)]))?;
            SamplingDesign::new(law)?
        }
    };
    let mut rows = Vec::new();
    let mut summaries: Vec<(usize, CoverageReport)> = Vec::new();
    for &n in &v.config.n_grid {
        let runs = coverage_runs(model, &design, n, block.runs, v.seeds.process)?;
        rows.extend(runs.iter().enumerate().map(|(run, r)| EstimateRow {
            n,
            run,
            m_hat: r.m_hat,
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
            covers: r.covers,
        }));
        summaries.push((n, summarize_coverage(&runs)));
    }
    #[derive(Serialize)]
    struct PerN {
        n: usize,
        coverage: CoverageReport,
    }
    #[derive(Serialize)]
    struct Report<'a> {
        provenance: Provenance,
        design: &'a SamplingDesign,
        true_mean: f64,
        results: Vec<PerN>,
    }
    w.json(
        "estimate.json",
        &Report {
            provenance: provenance(v),
            design: &design,
            true_mean: model.marginal_mean,
            results: summaries.into_iter().map(|(n, coverage)| PerN { n, coverage }).collect(),
        },
    )?;
    w.csv("estimate_runs.csv", &rows)
}

#[derive(Serialize)]
struct DesignRow {
    rho: f64,
    kappa: f64,
    taga_support: String,
    taga_probs: String,
    taga_a_of_s: f64,
    brute_support: String,
    brute_probs: String,
    brute_a_of_s: f64,
    total_variation: f64,
    within_budget: bool,
    tie: bool,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn optimal_design(v: &Validated, w: &mut ArtifactWriter) -> Result<(), CliError> {
    let d = v.config.design.as_ref().expect("validated design block");
    let mut rows = Vec::new();
    for &rho in &d.rho {
        let cov = CovarianceTable::geometric(1.0, rho)?;
        for &kappa in &d.kappa {
            let k = d.max_support.unwrap_or(kappa.ceil() as usize + 4);
            let taga = kappa_optimal_law(rho, kappa)?;
            let brute = brute_force_optimal(rho, kappa, k)?;
            rows.push(DesignRow {
                rho,
                kappa,
                taga_support: join(taga.law.support()),
                taga_probs: join(taga.law.probs()),
                taga_a_of_s: a_of_s(&cov, &taga.law)?,
                brute_support: join(brute.law.support()),
                brute_probs: join(brute.law.probs()),
                brute_a_of_s: a_of_s(&cov, &brute.law)?,
                total_variation: taga.law.total_variation(&brute.law),
                within_budget: mean_within_budget(&taga.law, kappa) && mean_within_budget(&brute.law, kappa),
                tie: taga.tie,
            });
        }
    }
    #[derive(Serialize)]
    struct Report<'a> {
        provenance: Provenance,
        max_total_variation: f64,
        rows: &'a [DesignRow],
    }
    let max_tv = rows.iter().map(|r| r.total_variation).fold(0.0, f64::max);
    w.json("design.json", &Report { provenance: provenance(v), max_total_variation: max_tv, rows: &rows })?;
    w.csv("design.csv", &rows)
}
