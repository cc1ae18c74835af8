//! Stationary process catalog.
//!
//! Four families are available: the Andrews Bernoulli chain
//! `ξ_n = (ξ_{n-1} + ε_n)/2`, the linear AR(1) recursion, causal linear
//! filters `ξ_n = Σ_j a_j ε_{n-j}` and iterated random contractions
//! `ξ_n = F(ξ_{n-1}, ε_n)`. Windows over an integer interval `[lo, hi]` are
//! produced by running a one-sided simulation and relabelling its indices,
//! which is legitimate because every model is stationary.

mod covariance;
pub(crate) mod observable;

pub use covariance::{covariance, covariance_table, CovarianceTable, CovarianceTail};
pub use observable::{Observable, ObservableKind, HINGE_GRID};

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::seed::{replicate_seed, rng_from_seed, SimRng};

/// Initialisation bias left after burn-in, relative to the start offset.
pub const BURN_IN_RESIDUAL: f64 = 1e-12;

/// Coefficients of a causal filter smaller than this fraction of `Σ|a_j|`
/// are dropped during simulation.
pub const FILTER_TRUNCATION: f64 = 1e-17;

/// Seed of the pre-pass used when a marginal moment has no closed form.
pub const PREPASS_SEED: u64 = 0x6d61_7267_696e_616c;
/// Sample size of that pre-pass.
pub const PREPASS_LEN: usize = 1 << 18;

/// Law of the iid innovations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NoiseSpec {
    Bernoulli { p: f64 },
    Gaussian { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl NoiseSpec {
    pub fn standard_gaussian() -> Self {
        NoiseSpec::Gaussian { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::Bernoulli { p } if !(0.0..=1.0).contains(&p) => {
                Err(domain(format!("bernoulli parameter {p} outside [0, 1]")))
            }
            NoiseSpec::Gaussian { mean, sd } if !mean.is_finite() || !(sd >= 0.0) || !sd.is_finite() => {
                Err(domain(format!("gaussian noise needs finite mean and sd >= 0, got ({mean}, {sd})")))
            }
            NoiseSpec::Uniform { lo, hi } if !lo.is_finite() || !hi.is_finite() || lo > hi => {
                Err(domain(format!("uniform noise needs lo <= hi, got [{lo}, {hi}]")))
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            NoiseSpec::Bernoulli { p } => p,
            NoiseSpec::Gaussian { mean, .. } => mean,
            NoiseSpec::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            NoiseSpec::Bernoulli { p } => p * (1.0 - p),
            NoiseSpec::Gaussian { sd, .. } => sd * sd,
            NoiseSpec::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
        }
    }

    pub fn second_moment(&self) -> f64 {
        self.variance() + self.mean().powi(2)
    }

    /// `‖ε − ε'‖₂` for two independent copies.
    pub fn coupling_distance(&self) -> f64 {
        (2.0 * self.variance()).sqrt()
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, NoiseSpec::Gaussian { .. })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseSpec::Bernoulli { p } => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            NoiseSpec::Gaussian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            NoiseSpec::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

/// Finite coefficient list `a_0..a_J` followed by the geometric tail
/// `a_j = a_J q^{j-J}` for `j > J` (no tail when `tail_ratio` is `None`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalCoefficients {
    pub head: Vec<f64>,
    pub tail_ratio: Option<f64>,
}

impl CausalCoefficients {
    pub fn new(head: Vec<f64>, tail_ratio: Option<f64>) -> Result<Self> {
        if head.is_empty() {
            return Err(domain("causal filter needs at least one coefficient"));
        }
        if head.iter().any(|a| !a.is_finite()) {
            return Err(domain("causal filter coefficients must be finite"));
        }
        if let Some(q) = tail_ratio {
            if !(q.abs() < 1.0) {
                return Err(domain(format!("tail ratio q = {q} must satisfy |q| < 1")));
            }
        }
        Ok(CausalCoefficients { head, tail_ratio })
    }

    /// `a_j = 2^{-(j+1)}`, the filter behind the Andrews chain.
    pub fn dyadic() -> Self {
        CausalCoefficients { head: vec![0.5], tail_ratio: Some(0.5) }
    }

    fn last_index(&self) -> usize {
        self.head.len() - 1
    }

    fn last(&self) -> f64 {
        self.head[self.last_index()]
    }

    pub fn coeff(&self, j: usize) -> f64 {
        let jl = self.last_index();
        if j <= jl {
            self.head[j]
        } else {
            match self.tail_ratio {
                Some(q) => self.last() * q.powi((j - jl) as i32),
                None => 0.0,
            }
        }
    }

    pub fn sum(&self) -> f64 {
        let head: f64 = self.head.iter().sum();
        match self.tail_ratio {
            Some(q) => head + self.last() * q / (1.0 - q),
            None => head,
        }
    }

    pub fn abs_sum(&self) -> f64 {
        self.abs_tail_sum(0)
    }

    /// `Σ_{j ≥ i} |a_j|`, in closed form.
    pub fn abs_tail_sum(&self, i: usize) -> f64 {
        let jl = self.last_index();
        let aj = self.last().abs();
        match self.tail_ratio {
            Some(q) => {
                let q = q.abs();
                if i <= jl {
                    self.head[i..].iter().map(|a| a.abs()).sum::<f64>() + aj * q / (1.0 - q)
                } else {
                    aj * q.powi((i - jl) as i32) / (1.0 - q)
                }
            }
            None => self.head.iter().skip(i).map(|a| a.abs()).sum(),
        }
    }

    /// `Σ_{j ≥ 0} a_j a_{j+x}`, exact.
    pub fn lag_product_sum(&self, x: usize) -> f64 {
        let jl = self.last_index();
        let head: f64 = (0..jl).map(|j| self.head[j] * self.coeff(j + x)).sum();
        let tail = match self.tail_ratio {
            Some(q) => self.last().powi(2) * q.powi(x as i32) / (1.0 - q * q),
            None => self.last() * self.coeff(jl + x),
        };
        head + tail
    }

    /// Coefficients used by the simulator: everything up to the point where
    /// the remaining tail is below `FILTER_TRUNCATION·Σ|a_j|`.
    pub fn truncated(&self) -> Vec<f64> {
        let total = self.abs_sum();
        let mut out = self.head.clone();
        if self.tail_ratio.is_some() && total > 0.0 {
            let mut j = self.head.len();
            while self.abs_tail_sum(j) > FILTER_TRUNCATION * total {
                out.push(self.coeff(j));
                j += 1;
            }
        }
        out
    }
}

/// Lipschitz maps `F(x, ε) = κ·g(x) + ε` with `g` 1-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractionMap {
    Affine,
    Tanh,
    Sine,
}

impl ContractionMap {
    #[inline]
    pub fn apply(self, kappa: f64, x: f64, eps: f64) -> f64 {
        match self {
            ContractionMap::Affine => kappa * x + eps,
            ContractionMap::Tanh => kappa * x.tanh() + eps,
            ContractionMap::Sine => kappa * x.sin() + eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ProcessKind {
    /// `ξ_n = (ξ_{n-1} + ε_n)/2` with `ε ~ Bernoulli(1/2)`; uniform marginal.
    AndrewsBernoulli,
    LinearAr1 {
        rho: f64,
        noise: NoiseSpec,
    },
    CausalLinear {
        coeffs: CausalCoefficients,
        noise: NoiseSpec,
    },
    IteratedContraction {
        map: ContractionMap,
        kappa: f64,
        noise: NoiseSpec,
    },
}

impl ProcessKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessKind::AndrewsBernoulli => "andrews-bernoulli",
            ProcessKind::LinearAr1 { .. } => "linear-ar1",
            ProcessKind::CausalLinear { .. } => "causal-linear",
            ProcessKind::IteratedContraction { .. } => "iterated-contraction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalSource {
    Analytic,
    Estimated,
    Declared,
}

/// Shape of the one-dimensional marginal, when it has a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalShape {
    Gaussian,
    UniformUnit,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessModel {
    pub kind: ProcessKind,
    pub marginal_mean: f64,
    pub marginal_variance: f64,
    pub marginal_source: MarginalSource,
}

impl ProcessModel {
    pub fn new(kind: ProcessKind) -> Result<Self> {
        match &kind {
            ProcessKind::AndrewsBernoulli => {}
            ProcessKind::LinearAr1 { rho, noise } => {
                if !(rho.abs() < 1.0) {
                    return Err(domain(format!("AR(1) coefficient rho = {rho} must satisfy |rho| < 1")));
                }
                noise.validate()?;
            }
            ProcessKind::CausalLinear { coeffs, noise } => {
                CausalCoefficients::new(coeffs.head.clone(), coeffs.tail_ratio)?;
                noise.validate()?;
            }
            ProcessKind::IteratedContraction { kappa, noise, .. } => {
                if !(*kappa > 0.0 && *kappa < 1.0) {
                    return Err(domain(format!("contraction factor kappa = {kappa} must lie in (0, 1)")));
                }
                noise.validate()?;
            }
        }
        let analytic = match &kind {
            ProcessKind::AndrewsBernoulli => Some((0.5, 1.0 / 12.0)),
            ProcessKind::LinearAr1 { rho, noise } => {
                Some((noise.mean() / (1.0 - rho), noise.variance() / (1.0 - rho * rho)))
            }
            ProcessKind::CausalLinear { coeffs, noise } => {
                Some((noise.mean() * coeffs.sum(), noise.variance() * coeffs.lag_product_sum(0)))
            }
            ProcessKind::IteratedContraction { map: ContractionMap::Affine, kappa, noise } => {
                Some((noise.mean() / (1.0 - kappa), noise.variance() / (1.0 - kappa * kappa)))
            }
            ProcessKind::IteratedContraction { .. } => None,
        };
        let mut model = ProcessModel {
            kind,
            marginal_mean: 0.0,
            marginal_variance: 0.0,
            marginal_source: MarginalSource::Analytic,
        };
        match analytic {
            Some((m, v)) => {
                model.marginal_mean = m;
                model.marginal_variance = v;
            }
            None => {
                let mut rng = rng_from_seed(PREPASS_SEED);
                let mut buf = vec![0.0; PREPASS_LEN];
                model.fill(&mut rng, &mut buf);
                let (m, v) = mean_and_variance(&buf);
                model.marginal_mean = m;
                model.marginal_variance = v;
                model.marginal_source = MarginalSource::Estimated;
            }
        }
        Ok(model)
    }

    pub fn andrews() -> Self {
        ProcessModel::new(ProcessKind::AndrewsBernoulli).expect("andrews chain has no parameters")
    }

    pub fn ar1(rho: f64, noise: NoiseSpec) -> Result<Self> {
        ProcessModel::new(ProcessKind::LinearAr1 { rho, noise })
    }

    /// Gaussian AR(1) with innovation sd `√(1−ρ²)`, so the marginal is `N(0, 1)`.
    pub fn ar1_unit_variance(rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(domain(format!("AR(1) coefficient rho = {rho} must satisfy |rho| < 1")));
        }
        ProcessModel::ar1(rho, NoiseSpec::Gaussian { mean: 0.0, sd: (1.0 - rho * rho).sqrt() })
    }

    /// iid sequence with the given law.
    pub fn iid(noise: NoiseSpec) -> Result<Self> {
        ProcessModel::ar1(0.0, noise)
    }

    pub fn causal_linear(coeffs: CausalCoefficients, noise: NoiseSpec) -> Result<Self> {
        ProcessModel::new(ProcessKind::CausalLinear { coeffs, noise })
    }

    pub fn contraction(map: ContractionMap, kappa: f64, noise: NoiseSpec) -> Result<Self> {
        ProcessModel::new(ProcessKind::IteratedContraction { map, kappa, noise })
    }

    /// Replaces the marginal moments by declared values.
    pub fn with_marginal(mut self, mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !(variance >= 0.0) || !variance.is_finite() {
            return Err(domain(format!("declared marginal ({mean}, {variance}) is invalid")));
        }
        self.marginal_mean = mean;
        self.marginal_variance = variance;
        self.marginal_source = MarginalSource::Declared;
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Geometric forgetting rate of the recursion, if any.
    pub fn decay(&self) -> Option<f64> {
        match &self.kind {
            ProcessKind::AndrewsBernoulli => Some(0.5),
            ProcessKind::LinearAr1 { rho, .. } => Some(rho.abs()),
            ProcessKind::CausalLinear { coeffs, .. } => coeffs.tail_ratio.map(f64::abs),
            ProcessKind::IteratedContraction { kappa, .. } => Some(*kappa),
        }
    }

    /// Burn-in steps `⌈ln(1e-12)/ln(decay)⌉`; zero for the exact samplers.
    pub fn burn_in(&self) -> usize {
        match &self.kind {
            ProcessKind::AndrewsBernoulli | ProcessKind::CausalLinear { .. } => 0,
            ProcessKind::LinearAr1 { rho, .. } => burn_in_for(rho.abs()),
            ProcessKind::IteratedContraction { kappa, .. } => burn_in_for(*kappa),
        }
    }

    pub fn marginal_shape(&self) -> MarginalShape {
        match &self.kind {
            ProcessKind::AndrewsBernoulli => MarginalShape::UniformUnit,
            ProcessKind::LinearAr1 { noise, .. }
            | ProcessKind::CausalLinear { noise, .. }
            | ProcessKind::IteratedContraction { map: ContractionMap::Affine, noise, .. }
                if noise.is_gaussian() =>
            {
                MarginalShape::Gaussian
            }
            ProcessKind::LinearAr1 { rho, noise: NoiseSpec::Uniform { lo, hi } }
                if *rho == 0.0 && *lo == 0.0 && *hi == 1.0 =>
            {
                MarginalShape::UniformUnit
            }
            _ => MarginalShape::Other,
        }
    }

    fn start_value(&self) -> f64 {
        match &self.kind {
            ProcessKind::LinearAr1 { rho, noise } => noise.mean() / (1.0 - rho),
            ProcessKind::IteratedContraction { map: ContractionMap::Affine, kappa, noise } => {
                noise.mean() / (1.0 - kappa)
            }
            _ => 0.0,
        }
    }

    /// Writes `out.len()` consecutive stationary values.
    pub(crate) fn fill(&self, rng: &mut SimRng, out: &mut [f64]) {
        match &self.kind {
            ProcessKind::AndrewsBernoulli => fill_andrews(rng, out),
            ProcessKind::LinearAr1 { rho, noise } => {
                let rho = *rho;
                let mut x = self.start_value();
                for _ in 0..self.burn_in() {
                    x = rho * x + noise.sample(rng);
                }
                for v in out.iter_mut() {
                    x = rho * x + noise.sample(rng);
                    *v = x;
                }
            }
            ProcessKind::CausalLinear { coeffs, noise } => {
                let a = coeffs.truncated();
                let lead = a.len() - 1;
                let eps: Vec<f64> = (0..out.len() + lead).map(|_| noise.sample(rng)).collect();
                for (i, v) in out.iter_mut().enumerate() {
                    let newest = i + lead;
                    *v = a.iter().enumerate().map(|(j, aj)| aj * eps[newest - j]).sum();
                }
            }
            ProcessKind::IteratedContraction { map, kappa, noise } => {
                let mut x = self.start_value();
                for _ in 0..self.burn_in() {
                    x = map.apply(*kappa, x, noise.sample(rng));
                }
                for v in out.iter_mut() {
                    x = map.apply(*kappa, x, noise.sample(rng));
                    *v = x;
                }
            }
        }
    }
}

fn burn_in_for(decay: f64) -> usize {
    if decay <= 0.0 {
        0
    } else {
        (BURN_IN_RESIDUAL.ln() / decay.ln()).ceil() as usize
    }
}

/// Binary-expansion sampler: `ξ_n = Σ_{j≥0} 2^{-(j+1)} ε_{n-j}`, kept as a
/// 64-bit shift register whose top bit is the newest innovation. The value
/// is read from the top 53 bits, which is exact in double precision.
fn fill_andrews(rng: &mut SimRng, out: &mut [f64]) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let mut register = rng.next_u64();
    let mut word = 0u64;
    let mut left = 0u32;
    for v in out.iter_mut() {
        if left == 0 {
            word = rng.next_u64();
            left = 64;
        }
        let bit = word & 1;
        word >>= 1;
        left -= 1;
        register = (register >> 1) | (bit << 63);
        *v = (register >> 11) as f64 * SCALE;
    }
}

pub(crate) fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

/// Realisation of the stationary sequence on the integer interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryWindow {
    pub model: ProcessModel,
    pub lo: i64,
    pub hi: i64,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl StationaryWindow {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at site `i`, `None` outside the window.
    pub fn at(&self, i: i64) -> Option<f64> {
        if i < self.lo || i > self.hi {
            None
        } else {
            Some(self.values[(i - self.lo) as usize])
        }
    }
}

/// Stationary window on `[-m, m]`.
pub fn stationary_window(model: &ProcessModel, m: usize, seed: u64) -> Result<StationaryWindow> {
    if m == 0 {
        return Err(domain("window half-width M must be at least 1"));
    }
    stationary_segment(model, -(m as i64), m as i64, seed)
}

/// Stationary window on an arbitrary interval `[lo, hi]`.
pub fn stationary_segment(model: &ProcessModel, lo: i64, hi: i64, seed: u64) -> Result<StationaryWindow> {
    if hi < lo {
        return Err(domain(format!("empty interval [{lo}, {hi}]")));
    }
    let mut values = vec![0.0; (hi - lo + 1) as usize];
    let mut rng = rng_from_seed(seed);
    model.fill(&mut rng, &mut values);
    Ok(StationaryWindow { model: model.clone(), lo, hi, values, seed })
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Sample covariance of `(f(ξ_0), f(ξ_lag))` over independent replicates.
pub fn estimate_covariance(
    model: &ProcessModel,
    f: &Observable,
    lag: usize,
    replicates: usize,
    seed: u64,
) -> Result<Estimate> {
    if replicates < 100 {
        return Err(domain(format!("estimate_covariance needs at least 100 replicates, got {replicates}")));
    }
    let mut buf = vec![0.0; lag + 1];
    let mut xs = Vec::with_capacity(replicates);
    let mut ys = Vec::with_capacity(replicates);
    for r in 0..replicates {
        let mut rng = rng_from_seed(replicate_seed(seed, r as u64));
        model.fill(&mut rng, &mut buf);
        xs.push(f.eval(buf[0]));
        ys.push(f.eval(buf[lag]));
    }
    let n = replicates as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let prods: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let value = prods.iter().sum::<f64>() / (n - 1.0);
    let spread = prods.iter().map(|p| (p - value).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate { value, std_error: (spread / n).sqrt() })
}

/// Monte Carlo estimate of `E[f(ξ)² 1{|f(ξ)| > M}]`.
pub fn uniform_integrability_tail(
    model: &ProcessModel,
    f: &Observable,
    threshold: f64,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(domain(format!("threshold must be non-negative, got {threshold}")));
    }
    if replicates == 0 {
        return Err(Error::Domain("at least one replicate is needed".into()));
    }
    let mut buf = vec![0.0; replicates];
    let mut rng = rng_from_seed(seed);
    model.fill(&mut rng, &mut buf);
    let total: f64 = buf.iter().map(|&x| f.eval(x)).filter(|y| y.abs() > threshold).map(|y| y * y).sum();
    Ok(total / replicates as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn andrews_window_in_unit_interval() {
        let w = stationary_window(&ProcessModel::andrews(), 10, 3).unwrap();
        assert_eq!(w.len(), 21);
        assert!(w.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn andrews_register_follows_recursion() {
        // consecutive values satisfy ξ_n = (ξ_{n-1} + ε_n)/2 up to the dropped low bit
        let w = stationary_window(&ProcessModel::andrews(), 200, 11).unwrap();
        for pair in w.values.windows(2) {
            let eps = 2.0 * pair[1] - pair[0];
            let nearest = eps.round();
            assert!(nearest == 0.0 || nearest == 1.0);
            assert!((eps - nearest).abs() < 1e-15);
        }
    }

    #[test]
    fn parameter_domain_errors() {
        assert!(matches!(ProcessModel::ar1(1.0, NoiseSpec::standard_gaussian()), Err(Error::Domain(_))));
        assert!(matches!(ProcessModel::ar1(-1.2, NoiseSpec::standard_gaussian()), Err(Error::Domain(_))));
        assert!(matches!(
            ProcessModel::contraction(ContractionMap::Tanh, 1.0, NoiseSpec::standard_gaussian()),
            Err(Error::Domain(_))
        ));
        assert!(CausalCoefficients::new(vec![1.0], Some(1.0)).is_err());
        assert!(stationary_window(&ProcessModel::andrews(), 0, 1).is_err());
    }

    #[test]
    fn window_is_seed_deterministic() {
        let model = ProcessModel::ar1_unit_variance(0.7).unwrap();
        let a = stationary_window(&model, 50, 99).unwrap();
        let b = stationary_window(&model, 50, 99).unwrap();
        let c = stationary_window(&model, 50, 100).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn burn_in_rule() {
        let model = ProcessModel::ar1_unit_variance(0.5).unwrap();
        assert_eq!(model.burn_in(), 40);
        assert_eq!(ProcessModel::iid(NoiseSpec::standard_gaussian()).unwrap().burn_in(), 0);
        assert_eq!(ProcessModel::andrews().burn_in(), 0);
    }

    #[test]
    fn causal_closed_forms() {
        let c = CausalCoefficients::new(vec![1.0, -0.5, 0.25], Some(0.5)).unwrap();
        let brute_abs: f64 = (0..200).map(|j| c.coeff(j).abs()).sum();
        assert!((c.abs_sum() - brute_abs).abs() < 1e-14);
        for i in [0usize, 1, 2, 3, 7] {
            let brute: f64 = (i..300).map(|j| c.coeff(j).abs()).sum();
            assert!((c.abs_tail_sum(i) - brute).abs() < 1e-14, "tail from {i}");
        }
        for x in [0usize, 1, 2, 3, 5, 9] {
            let brute: f64 = (0..400).map(|j| c.coeff(j) * c.coeff(j + x)).sum();
            assert!((c.lag_product_sum(x) - brute).abs() < 1e-14, "lag {x}");
        }
    }

    #[test]
    fn dyadic_filter_matches_andrews_moments() {
        let model = ProcessModel::causal_linear(CausalCoefficients::dyadic(), NoiseSpec::Bernoulli { p: 0.5 }).unwrap();
        assert!((model.marginal_mean - 0.5).abs() < 1e-15);
        assert!((model.marginal_variance - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_integrability_edges() {
        let andrews = ProcessModel::andrews();
        let id = Observable::new(ObservableKind::IdentityCentered, &andrews).unwrap();
        assert_eq!(uniform_integrability_tail(&andrews, &id, 1.0, 10_000, 5).unwrap(), 0.0);

        let ar = ProcessModel::ar1(0.5, NoiseSpec::standard_gaussian()).unwrap();
        let id = Observable::new(ObservableKind::IdentityCentered, &ar).unwrap();
        let full = uniform_integrability_tail(&ar, &id, 0.0, 10_000, 5).unwrap();
        let mut buf = vec![0.0; 10_000];
        ar.fill(&mut rng_from_seed(5), &mut buf);
        let second: f64 = buf.iter().map(|x| x * x).sum::<f64>() / 10_000.0;
        assert_eq!(full, second);
    }

    #[test]
    fn estimated_marginal_for_nonlinear_map() {
        let m = ProcessModel::contraction(ContractionMap::Tanh, 0.6, NoiseSpec::standard_gaussian()).unwrap();
        assert_eq!(m.marginal_source, MarginalSource::Estimated);
        // odd map with symmetric noise
        assert!(m.marginal_mean.abs() < 0.02);
        assert!(m.marginal_variance > 1.0);
    }
}
