//! Experiment configuration: JSON schema, parsing and cross-field validation.

use std::fmt;

use quenched::dependence::{BoundKind, DependenceProfile};
use quenched::harness::{KnRule, WeightRule, DEFAULT_PATH_SEED};
use quenched::process::{CausalCoefficients, ContractionMap, NoiseSpec, Observable, ObservableKind, ProcessModel};
use quenched::seed::{derive_seed, STREAM_PROCESS};
use quenched::walk::StepLaw;
use serde::{Deserialize, Serialize};

/// Master seed used when the config gives none.
pub const DEFAULT_MASTER_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    WalkDiagnostics,
    Green,
    Variance,
    CltTriangular,
    CltSampled,
    DependenceProfile,
    Estimate,
    OptimalDesign,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::WalkDiagnostics => "walk-diagnostics",
            ExperimentKind::Green => "green",
            ExperimentKind::Variance => "variance",
            ExperimentKind::CltTriangular => "clt-triangular",
            ExperimentKind::CltSampled => "clt-sampled",
            ExperimentKind::DependenceProfile => "dependence-profile",
            ExperimentKind::Estimate => "estimate",
            ExperimentKind::OptimalDesign => "optimal-design",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelBlock {
    Andrews,
    Iid {
        noise: NoiseSpec,
    },
    Ar1 {
        rho: f64,
        #[serde(default)]
        noise: Option<NoiseSpec>,
        /// Scale standard Gaussian noise so that the marginal variance is 1.
        #[serde(default)]
        unit_variance: bool,
    },
    CausalLinear {
        head: Vec<f64>,
        #[serde(default)]
        tail_ratio: Option<f64>,
        #[serde(default)]
        noise: Option<NoiseSpec>,
    },
    Contraction {
        map: ContractionMap,
        kappa: f64,
        #[serde(default)]
        noise: Option<NoiseSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalBlock {
    pub mean: f64,
    pub variance: f64,
}

/// `"nn(p)"`, `"delta(d)"` or an explicit finite law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WalkBlock {
    Short(String),
    Explicit { support: Vec<i64>, probs: Vec<f64> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedBlock {
    #[serde(default)]
    pub master: Option<u64>,
    #[serde(default)]
    pub path: Option<u64>,
    #[serde(default)]
    pub process: Option<u64>,
    /// Number of extra walk paths to sweep (0 = the fixed path only).
    #[serde(default)]
    pub path_sweep: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenChoice {
    Exact,
    MonteCarlo,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenBlock {
    pub method: GreenChoice,
    pub lo: i64,
    pub hi: i64,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_green_replicates")]
    pub replicates: usize,
}

fn default_truncation() -> usize {
    10_000
}

fn default_green_replicates() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangularBlock {
    pub weights: WeightRule,
    pub k_n: KnRule,
    #[serde(default)]
    pub lindeberg_epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileBlock {
    /// `contraction`, `geometric`, `power-law` or `model`.
    pub kind: String,
    #[serde(default, rename = "C")]
    pub c: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub kappa_c: Option<f64>,
    #[serde(default)]
    pub distance: Option<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_n_max() -> usize {
    50
}

fn default_k_max() -> usize {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBlock {
    pub rho: Vec<f64>,
    pub kappa: Vec<f64>,
    #[serde(default)]
    pub max_support: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DesignChoice {
    /// Taga's law for the AR(1) model in the config.
    Taga {
        kappa: f64,
    },
    Law {
        walk: WalkBlock,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateBlock {
    pub design: DesignChoice,
    #[serde(default = "default_runs")]
    pub runs: usize,
}

fn default_runs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub model: Option<ModelBlock>,
    #[serde(default)]
    pub marginal: Option<MarginalBlock>,
    #[serde(default)]
    pub walk: Option<WalkBlock>,
    #[serde(default)]
    pub f: Option<ObservableKind>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub replicates: Option<usize>,
    #[serde(default)]
    pub seeds: SeedBlock,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub green: Option<GreenBlock>,
    #[serde(default)]
    pub triangular: Option<TriangularBlock>,
    #[serde(default)]
    pub profile: Option<ProfileBlock>,
    #[serde(default)]
    pub design: Option<DesignBlock>,
    #[serde(default)]
    pub estimate: Option<EstimateBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Error,
    /// The config is well formed but violates a modelling assumption.
    Assumption,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(field: &str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, field: field.into(), message: message.into() }
    }

    pub fn assumption(field: &str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Assumption, field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Assumption => "assumption",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

/// Effective seeds after defaults and the command-line override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeedRecord {
    pub master: u64,
    pub path: u64,
    pub process: u64,
    pub path_sweep: usize,
}

/// A config whose blocks have been turned into library objects.
#[derive(Debug, Clone)]
pub struct Validated {
    pub config: ExperimentConfig,
    pub model: Option<ProcessModel>,
    pub law: Option<StepLaw>,
    pub f: Option<Observable>,
    pub profile: Option<DependenceProfile>,
    pub seeds: SeedRecord,
}

/// Parses a step law from its config form.
pub fn parse_walk(block: &WalkBlock) -> Result<StepLaw, String> {
    match block {
        WalkBlock::Explicit { support, probs } => {
            StepLaw::new(support.clone(), probs.clone()).map_err(|e| e.to_string())
        }
        WalkBlock::Short(s) => {
            let s = s.trim();
            let inner = |prefix: &str| s.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')).map(str::trim);
            if let Some(p) = inner("nn(") {
                let p: f64 = p.parse().map_err(|_| format!("cannot read probability in {s:?}"))?;
                StepLaw::nearest_neighbour(p).map_err(|e| e.to_string())
            } else if let Some(d) = inner("delta(") {
                let d: i64 = d.parse().map_err(|_| format!("cannot read step in {s:?}"))?;
                Ok(StepLaw::delta(d))
            } else {
                Err(format!("unknown walk shorthand {s:?}; use \"nn(p)\", \"delta(d)\" or {{support, probs}}"))
            }
        }
    }
}

fn build_model(
    block: &ModelBlock,
    marginal: Option<&MarginalBlock>,
    out: &mut Vec<Diagnostic>,
) -> Option<ProcessModel> {
    let check_noise = |noise: &NoiseSpec, out: &mut Vec<Diagnostic>| match noise.validate() {
        Ok(()) => true,
        Err(e) => {
            out.push(Diagnostic::error("model.noise", e.to_string()));
            false
        }
    };
    let gauss = NoiseSpec::standard_gaussian();
    let model = match block {
        ModelBlock::Andrews => Ok(ProcessModel::andrews()),
        ModelBlock::Iid { noise } => {
            if !check_noise(noise, out) {
                return None;
            }
            ProcessModel::iid(*noise)
        }
        ModelBlock::Ar1 { rho, noise, unit_variance } => {
            if !(rho.abs() < 1.0) {
                out.push(Diagnostic::error("model.rho", format!("AR(1) needs |rho| < 1, got {rho}")));
                return None;
            }
            if *unit_variance && noise.is_some() {
                out.push(Diagnostic::error("model.unit_variance", "give either noise or unit_variance, not both"));
                return None;
            }
            let noise = noise.unwrap_or(gauss);
            if !check_noise(&noise, out) {
                return None;
            }
            if *unit_variance {
                ProcessModel::ar1_unit_variance(*rho)
            } else {
                ProcessModel::ar1(*rho, noise)
            }
        }
        ModelBlock::CausalLinear { head, tail_ratio, noise } => {
            let noise = noise.unwrap_or(gauss);
            if !check_noise(&noise, out) {
                return None;
            }
            match CausalCoefficients::new(head.clone(), *tail_ratio) {
                Ok(c) => ProcessModel::causal_linear(c, noise),
                Err(e) => {
                    let field =
                        if tail_ratio.is_some_and(|q| q.abs() >= 1.0) { "model.tail_ratio" } else { "model.head" };
                    out.push(Diagnostic::error(field, e.to_string()));
                    return None;
                }
            }
        }
        ModelBlock::Contraction { map, kappa, noise } => {
            if !(*kappa > 0.0 && *kappa < 1.0) {
                out.push(Diagnostic::error(
                    "model.kappa",
                    format!("contraction factor must lie in (0, 1), got {kappa}"),
                ));
                return None;
            }
            let noise = noise.unwrap_or(gauss);
            if !check_noise(&noise, out) {
                return None;
            }
            ProcessModel::contraction(*map, *kappa, noise)
        }
    };
    let model = match model {
        Ok(m) => m,
        Err(e) => {
            out.push(Diagnostic::error("model", e.to_string()));
            return None;
        }
    };
    match marginal {
        None => Some(model),
        Some(m) => match model.with_marginal(m.mean, m.variance) {
            Ok(model) => Some(model),
            Err(e) => {
                out.push(Diagnostic::error("marginal", e.to_string()));
                None
            }
        },
    }
}

fn build_profile(
    block: &ProfileBlock,
    model: Option<&ProcessModel>,
    out: &mut Vec<Diagnostic>,
) -> Option<DependenceProfile> {
    let need = |v: Option<f64>, name: &str, out: &mut Vec<Diagnostic>| {
        if v.is_none() {
            out.push(Diagnostic::error(
                &format!("profile.{name}"),
                format!("required for profile kind {:?}", block.kind),
            ));
        }
        v
    };
    let bound = match block.kind.as_str() {
        "model" => {
            let Some(model) = model else {
                out.push(Diagnostic::error("model", "profile kind \"model\" needs a model block"));
                return None;
            };
            return match DependenceProfile::for_model(model) {
                Ok(p) => Some(p),
                Err(e) => {
                    out.push(Diagnostic::error("profile", e.to_string()));
                    None
                }
            };
        }
        "contraction" => {
            let kappa = need(block.kappa_c, "kappa_c", out);
            let distance = need(block.distance, "distance", out);
            BoundKind::Contraction { kappa: kappa?, initial_distance: distance? }
        }
        "geometric" => {
            let c = need(block.c, "C", out);
            let rho = need(block.rho, "rho", out);
            BoundKind::Geometric { c: c?, rho: rho? }
        }
        "power-law" => {
            let c = need(block.c, "C", out);
            let a = need(block.a, "a", out);
            BoundKind::PowerLaw { c: c?, a: a? }
        }
        other => {
            out.push(Diagnostic::error(
                "profile.kind",
                format!("unknown profile kind {other:?}; use contraction, geometric, power-law or model"),
            ));
            return None;
        }
    };
    match DependenceProfile::new(bound) {
        Ok(p) => Some(p),
        Err(e) => {
            out.push(Diagnostic::error("profile", e.to_string()));
            None
        }
    }
}

fn require<T>(value: &Option<T>, field: &str, kind: ExperimentKind, out: &mut Vec<Diagnostic>) -> bool {
    if value.is_none() {
        out.push(Diagnostic::error(field, format!("block is required for experiment {}", kind.name())));
        false
    } else {
        true
    }
}

fn check_grid(grid: &[usize], required: bool, out: &mut Vec<Diagnostic>) {
    if grid.is_empty() {
        if required {
            out.push(Diagnostic::error("n_grid", "at least one n is required"));
        }
        return;
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        out.push(Diagnostic::error("n_grid", "values must be positive and strictly increasing"));
    }
}

/// Parses a config text. Syntax and schema errors carry line and column.
pub fn parse(text: &str) -> Result<ExperimentConfig, Vec<Diagnostic>> {
    serde_json::from_str(text)
        .map_err(|e| vec![Diagnostic::error(&format!("line {} column {}", e.line(), e.column()), e.to_string())])
}

/// Cross-field validation; an empty diagnostic list means the config runs.
pub fn validate(config: ExperimentConfig, seed_override: Option<u64>) -> (Option<Validated>, Vec<Diagnostic>) {
    let mut out = Vec::new();
    let kind = config.experiment;
    use ExperimentKind::*;

    let needs_model = matches!(kind, Variance | CltTriangular | CltSampled | Estimate);
    let needs_f = matches!(kind, Variance | CltTriangular | CltSampled);
    let needs_walk = matches!(kind, WalkDiagnostics | Green | Variance | CltSampled);
    if needs_model {
        require(&config.model, "model", kind, &mut out);
    }
    if needs_f {
        require(&config.f, "f", kind, &mut out);
    }
    if needs_walk {
        require(&config.walk, "walk", kind, &mut out);
    }
    match kind {
        Green => {
            require(&config.green, "green", kind, &mut out);
        }
        CltTriangular => {
            require(&config.triangular, "triangular", kind, &mut out);
        }
        DependenceProfile => {
            if config.profile.is_none() && config.model.is_none() {
                out.push(Diagnostic::error("profile", "a profile block or a model block is required"));
            }
        }
        Estimate => {
            require(&config.estimate, "estimate", kind, &mut out);
        }
        OptimalDesign => {
            require(&config.design, "design", kind, &mut out);
        }
        _ => {}
    }
    let grid_required = matches!(kind, WalkDiagnostics | CltTriangular | CltSampled | Estimate);
    check_grid(&config.n_grid, grid_required, &mut out);
    if matches!(kind, CltTriangular | CltSampled) {
        match config.replicates {
            None => out.push(Diagnostic::error("replicates", format!("required for experiment {}", kind.name()))),
            Some(r) if r < 100 => out.push(Diagnostic::error("replicates", format!("need at least 100, got {r}"))),
            _ => {}
        }
    }

    let model = config.model.as_ref().and_then(|m| build_model(m, config.marginal.as_ref(), &mut out));
    let law = match &config.walk {
        Some(w) => match parse_walk(w) {
            Ok(law) => Some(law),
            Err(e) => {
                out.push(Diagnostic::error("walk", e));
                None
            }
        },
        None => None,
    };
    if let Some(law) = &law {
        let transient_needed = matches!(kind, Green | Variance | CltSampled);
        if transient_needed && !law.is_transient() {
            out.push(Diagnostic::assumption(
                "walk",
                format!("the walk must be transient (nonzero mean step), got mean {}", law.mean()),
            ));
        }
    }
    let f = match (&config.f, &model) {
        (Some(kind), Some(model)) => match Observable::new(*kind, model) {
            Ok(f) => Some(f),
            Err(e) => {
                out.push(Diagnostic::error("f", e.to_string()));
                None
            }
        },
        _ => None,
    };

    if let Some(g) = &config.green {
        if g.hi < g.lo {
            out.push(Diagnostic::error("green.hi", "must be at least green.lo"));
        }
        if g.method != GreenChoice::Exact && (g.truncation == 0 || g.replicates == 0) {
            out.push(Diagnostic::error("green", "truncation and replicates must be positive"));
        }
        if g.method != GreenChoice::MonteCarlo {
            if let Some(law) = &law {
                if law.is_transient() && law.as_nearest_neighbour().is_none() && law.as_delta().is_none() {
                    out.push(Diagnostic::error(
                        "green.method",
                        "exact Green functions need a nearest-neighbour or deterministic walk",
                    ));
                }
            }
        }
    }
    if let Some(t) = &config.triangular {
        if let Some(eps) = t.lindeberg_epsilon {
            if !(eps > 0.0) {
                out.push(Diagnostic::error("triangular.lindeberg_epsilon", "must be positive"));
            }
        }
        match t.k_n {
            KnRule::Linear { factor: x } | KnRule::Power { exponent: x } if !(x > 0.0 && x.is_finite()) => {
                out.push(Diagnostic::error("triangular.k_n", "rule parameter must be positive"));
            }
            _ => {}
        }
        if let WeightRule::Explicit { weights } = &t.weights {
            if weights.len() % 2 == 0 || weights.iter().all(|w| *w == 0.0) {
                out.push(Diagnostic::error(
                    "triangular.weights",
                    "explicit weights need odd length and a nonzero entry",
                ));
            }
        }
    }
    let profile = if kind == DependenceProfile {
        match &config.profile {
            Some(block) => build_profile(block, model.as_ref(), &mut out),
            None => model.as_ref().and_then(|m| quenched::dependence::DependenceProfile::for_model(m).ok()),
        }
    } else {
        None
    };
    if let Some(d) = &config.design {
        if d.rho.is_empty() || d.kappa.is_empty() {
            out.push(Diagnostic::error("design", "rho and kappa lists must be non-empty"));
        }
        if let Some(r) = d.rho.iter().find(|r| !(r.abs() < 1.0)) {
            out.push(Diagnostic::error("design.rho", format!("need |rho| < 1, got {r}")));
        }
        if let Some(k) = d.kappa.iter().find(|k| !(**k >= 1.0 && k.is_finite())) {
            out.push(Diagnostic::error("design.kappa", format!("need kappa >= 1, got {k}")));
        }
        if let (Some(k), Some(kmax)) = (d.max_support, d.kappa.iter().cloned().reduce(f64::max)) {
            if (k as f64) < kmax.ceil() + 2.0 {
                out.push(Diagnostic::error("design.max_support", "must be at least ceil(kappa) + 2 for every kappa"));
            }
        }
    }
    if let Some(e) = &config.estimate {
        if e.runs == 0 {
            out.push(Diagnostic::error("estimate.runs", "must be positive"));
        }
        match &e.design {
            DesignChoice::Taga { kappa } => {
                if !(*kappa >= 1.0 && kappa.is_finite()) {
                    out.push(Diagnostic::error("estimate.design.kappa", format!("need kappa >= 1, got {kappa}")));
                }
                if !matches!(config.model, Some(ModelBlock::Ar1 { .. })) {
                    out.push(Diagnostic::error("estimate.design", "the Taga design applies to AR(1) models only"));
                }
            }
            DesignChoice::Law { walk } => match parse_walk(walk) {
                Ok(law) if law.min_step() < 1 => {
                    out.push(Diagnostic::error("estimate.design.walk", "sampling designs need steps in {1, 2, ...}"));
                }
                Ok(_) => {}
                Err(e) => out.push(Diagnostic::error("estimate.design.walk", e)),
            },
        }
    }

    let master = seed_override.or(config.seeds.master).unwrap_or(DEFAULT_MASTER_SEED);
    let seeds = SeedRecord {
        master,
        path: config.seeds.path.unwrap_or(DEFAULT_PATH_SEED),
        process: config.seeds.process.unwrap_or_else(|| derive_seed(master, STREAM_PROCESS, 0)),
        path_sweep: config.seeds.path_sweep,
    };
    if out.is_empty() {
        (Some(Validated { config, model, law, f, profile, seeds }), out)
    } else {
        (None, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diags(text: &str) -> Vec<Diagnostic> {
        match parse(text) {
            Ok(c) => validate(c, None).1,
            Err(d) => d,
        }
    }

    const SAMPLED: &str = r#"{
        "experiment": "clt-sampled",
        "model": {"kind": "ar1", "rho": 0.5, "unit_variance": true},
        "walk": "nn(0.75)",
        "f": {"kind": "identity_centered"},
        "n_grid": [1000],
        "replicates": 200
    }"#;

    #[test]
    fn valid_config_has_no_diagnostics() {
        assert!(diags(SAMPLED).is_empty());
    }

    #[test]
    fn rho_out_of_range_names_field() {
        let d = diags(&SAMPLED.replace("0.5", "1.0"));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "model.rho");
    }

    #[test]
    fn missing_f_block() {
        let d = diags(&SAMPLED.replace(r#""f": {"kind": "identity_centered"},"#, ""));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "f");
    }

    #[test]
    fn recurrent_walk_is_an_assumption_failure() {
        let d = diags(&SAMPLED.replace("nn(0.75)", "nn(0.5)"));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Assumption);
        assert!(d[0].message.contains("transient"));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let d = diags("{\n  \"experiment\": \"green\",\n  oops\n}");
        assert_eq!(d.len(), 1);
        assert!(d[0].field.starts_with("line 3"), "{}", d[0].field);
        let d = diags(r#"{"experiment": "green", "unknown_key": 1}"#);
        assert!(d[0].message.contains("unknown_key"));
    }

    #[test]
    fn walk_shorthands() {
        assert_eq!(parse_walk(&WalkBlock::Short("delta(2)".into())).unwrap(), StepLaw::delta(2));
        assert_eq!(
            parse_walk(&WalkBlock::Short(" nn(0.9) ".into())).unwrap(),
            StepLaw::nearest_neighbour(0.9).unwrap()
        );
        assert!(parse_walk(&WalkBlock::Short("levy(1)".into())).is_err());
    }

    #[test]
    fn seed_override_and_defaults() {
        let c = parse(SAMPLED).unwrap();
        let (v, _) = validate(c.clone(), Some(99));
        let v = v.unwrap();
        assert_eq!(v.seeds.master, 99);
        assert_eq!(v.seeds.path, DEFAULT_PATH_SEED);
        assert_eq!(v.seeds.process, derive_seed(99, STREAM_PROCESS, 0));
    }
}
