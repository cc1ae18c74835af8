//! θ₂ dependence coefficients.
//!
//! Upper bounds come from coupling arguments on the catalog models:
//! contractions give `κ^n‖ξ_0 − ξ_0*‖₂`, causal linear filters give
//! `‖ε_0 − ε_0'‖₂ Σ_{j≥n}|a_j|`. For finite Markov chains the coefficient
//! `θ₂(σ(ξ_0), ξ_n)` is evaluated on a dictionary of 1-Lipschitz functions,
//! which is a lower bound in general and exact for up to three states.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::process::{CausalCoefficients, ProcessKind, ProcessModel};

/// Number of terms in the numerical trace of the (A₃) series.
pub const A3_TRACE_TERMS: usize = 200;
/// Relative tail size below which the trace counts as converged.
pub const A3_TAIL_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundKind {
    /// `κ^n · d` for an iterated random contraction.
    Contraction { kappa: f64, initial_distance: f64 },
    /// `d · Σ_{j≥n} |a_j|` for a causal filter with iid innovations.
    LinearTail { coeffs: CausalCoefficients, noise_distance: f64 },
    /// `C ρ^n`.
    Geometric { c: f64, rho: f64 },
    /// `C n^{−a}`.
    PowerLaw { c: f64, a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceProfile {
    pub model: Option<String>,
    pub bound: BoundKind,
}

impl DependenceProfile {
    pub fn new(bound: BoundKind) -> Result<Self> {
        let ok = match &bound {
            BoundKind::Contraction { kappa, initial_distance } => {
                (0.0..1.0).contains(kappa) && *initial_distance >= 0.0
            }
            BoundKind::LinearTail { noise_distance, .. } => *noise_distance >= 0.0,
            BoundKind::Geometric { c, rho } => *c >= 0.0 && (0.0..1.0).contains(rho),
            BoundKind::PowerLaw { c, a } => *c >= 0.0 && *a > 0.0,
        };
        if !ok {
            return Err(domain(format!("invalid dependence profile {bound:?}")));
        }
        Ok(DependenceProfile { model: None, bound })
    }

    /// Catalog bound attached to a process model.
    pub fn for_model(model: &ProcessModel) -> Result<Self> {
        let coupling = (2.0 * model.marginal_variance).sqrt();
        let bound = match &model.kind {
            ProcessKind::AndrewsBernoulli => BoundKind::Contraction { kappa: 0.5, initial_distance: coupling },
            ProcessKind::LinearAr1 { rho, .. } => {
                BoundKind::Contraction { kappa: rho.abs(), initial_distance: coupling }
            }
            ProcessKind::IteratedContraction { kappa, .. } => {
                BoundKind::Contraction { kappa: *kappa, initial_distance: coupling }
            }
            ProcessKind::CausalLinear { coeffs, noise } => {
                BoundKind::LinearTail { coeffs: coeffs.clone(), noise_distance: noise.coupling_distance() }
            }
        };
        let mut profile = DependenceProfile::new(bound)?;
        profile.model = Some(model.name().to_string());
        Ok(profile)
    }

    fn bound_at(&self, n: usize) -> f64 {
        match &self.bound {
            BoundKind::Contraction { kappa, initial_distance } => initial_distance * kappa.powi(n as i32),
            BoundKind::LinearTail { coeffs, noise_distance } => noise_distance * coeffs.abs_tail_sum(n),
            BoundKind::Geometric { c, rho } => c * rho.powi(n as i32),
            BoundKind::PowerLaw { c, a } => c * (n as f64).powf(-a),
        }
    }

    /// `(n, bound)` rows for `n = 1..=n_max`.
    pub fn decay_table(&self, n_max: usize) -> Vec<(usize, f64)> {
        (1..=n_max).map(|n| (n, self.bound_at(n))).collect()
    }

    /// (A₃) verdict. Geometric-type bounds are majorised by `C' n^{-3}`.
    pub fn a3_verdict(&self) -> A3Verdict {
        match self.bound {
            BoundKind::PowerLaw { c, a } => a3_check(c.max(f64::MIN_POSITIVE), a).expect("validated profile"),
            _ => {
                let c = (1..=10_000usize)
                    .map(|n| self.bound_at(n) * (n as f64).powi(3))
                    .fold(0.0f64, f64::max)
                    .max(f64::MIN_POSITIVE);
                a3_check(c, 3.0).expect("positive majorant")
            }
        }
    }
}

/// Catalog upper bound on `θ₂(n)`.
pub fn theta2_upper(profile: &DependenceProfile, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(domain("theta2_upper is defined for n >= 1"));
    }
    Ok(profile.bound_at(n))
}

/// Outcome of the (A₃) summability check for `g(x) = C x^{−a}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A3Verdict {
    pub satisfied: bool,
    pub witness_epsilon: Option<f64>,
    /// Whether `x ↦ x^{3/2} g(x)` is non-increasing (`a ≥ 3/2`).
    pub monotone: bool,
    /// Partial sums of `Σ_i 2^{3i/2} g(2^{iε})`.
    pub partial_sums: Vec<f64>,
    /// Ratio of successive terms; the series is geometric.
    pub term_ratio: f64,
    /// Successive terms shrink by a fixed ratio below one.
    pub numerically_cauchy: bool,
    /// Remaining tail after the trace is below `A3_TAIL_THRESHOLD` relative.
    pub tail_below_threshold: bool,
}

/// (A₃) for `θ₂(n) = O(n^{−a})`: satisfied iff `a > 3/2`.
///
/// The witness `ε = (3/2 + a)/(2a)` lies in `(0, 1)` and gives `εa > 3/2`.
pub fn a3_check(c: f64, a: f64) -> Result<A3Verdict> {
    if !(c > 0.0) || !(a > 0.0) {
        return Err(domain(format!("a3_check needs C > 0 and a > 0, got C = {c}, a = {a}")));
    }
    let satisfied = a > 1.5;
    let witness_epsilon = satisfied.then(|| (1.5 + a) / (2.0 * a));
    // without a witness, trace the most favourable admissible ε
    let eps = witness_epsilon.unwrap_or(0.999);
    let term_ratio = 2f64.powf(1.5 - eps * a);
    let mut partial_sums = Vec::with_capacity(A3_TRACE_TERMS + 1);
    let mut total = 0.0;
    let mut term = c;
    for _ in 0..=A3_TRACE_TERMS {
        total += term;
        partial_sums.push(total);
        term *= term_ratio;
    }
    let numerically_cauchy = term_ratio < 1.0;
    let tail = if numerically_cauchy { term / (1.0 - term_ratio) } else { f64::INFINITY };
    Ok(A3Verdict {
        satisfied,
        witness_epsilon,
        monotone: a >= 1.5,
        partial_sums,
        term_ratio,
        numerically_cauchy,
        tail_below_threshold: tail < A3_TAIL_THRESHOLD * total,
    })
}

/// `Σ_{l≥1} θ(l)` for the profile: explicit terms up to `k_max` plus the
/// tail in closed form (geometric) or by Euler–Maclaurin (power law).
pub fn theta_series_sum(profile: &DependenceProfile, k_max: usize) -> Result<f64> {
    let partial = |upto: usize| -> f64 { (1..=upto).rev().map(|l| profile.bound_at(l)).sum() };
    match &profile.bound {
        BoundKind::Contraction { kappa: r, initial_distance: c } | BoundKind::Geometric { c, rho: r } => {
            let tail = c * r.powi(k_max as i32 + 1) / (1.0 - r);
            Ok(partial(k_max) + tail)
        }
        BoundKind::LinearTail { coeffs, noise_distance } => {
            let last = coeffs.head.len() - 1;
            let k = k_max.max(last);
            let tail = match coeffs.tail_ratio {
                // Σ_{l>k} |a_J| |q|^{l−J}/(1−|q|)
                Some(q) => {
                    let q = q.abs();
                    noise_distance * coeffs.head[last].abs() * q.powi((k + 1 - last) as i32) / (1.0 - q).powi(2)
                }
                None => 0.0,
            };
            Ok(partial(k) + tail)
        }
        BoundKind::PowerLaw { c, a } => {
            if *a <= 1.0 {
                return Err(Error::Divergent(format!("Σ n^(-{a}) diverges for a <= 1")));
            }
            let k = k_max.max(1) as f64;
            let tail = k.powf(1.0 - a) / (a - 1.0) - 0.5 * k.powf(-a) + a / 12.0 * k.powf(-a - 1.0);
            Ok(partial(k_max.max(1)) + c * tail)
        }
    }
}

/// Dictionary evaluation of `θ₂(σ(ξ_0), ξ_n)` for a finite stationary chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovTheta {
    pub lower: f64,
    /// The dictionary contains every extreme point of the 1-Lipschitz ball.
    pub exact: bool,
    pub best: String,
    pub note: String,
}

/// Dictionary order: `+id`, `−id`, then hinges `|x − t|` at each state value
/// in increasing order.
pub fn theta2_exact_markov(
    kernel: &[Vec<f64>],
    stationary: &[f64],
    values: &[f64],
    n: usize,
    dictionary_size: usize,
) -> Result<MarkovTheta> {
    let k = kernel.len();
    if k == 0 || stationary.len() != k || values.len() != k || kernel.iter().any(|row| row.len() != k) {
        return Err(domain("kernel, stationary vector and state values must have matching sizes"));
    }
    for (i, row) in kernel.iter().enumerate() {
        let s: f64 = row.iter().sum();
        if row.iter().any(|p| !(*p >= 0.0)) || (s - 1.0).abs() > 1e-12 {
            return Err(domain(format!("kernel row {i} is not a probability vector")));
        }
    }
    if (stationary.iter().sum::<f64>() - 1.0).abs() > 1e-10 || stationary.iter().any(|p| !(*p >= 0.0)) {
        return Err(domain("stationary vector is not a probability vector"));
    }
    for j in 0..k {
        let flow: f64 = (0..k).map(|i| stationary[i] * kernel[i][j]).sum();
        if (flow - stationary[j]).abs() > 1e-10 {
            return Err(domain("stationary vector is not invariant under the kernel"));
        }
    }
    if n == 0 || dictionary_size == 0 {
        return Err(domain("need n >= 1 and a non-empty dictionary"));
    }

    let mut power = identity_matrix(k);
    for _ in 0..n {
        power = mat_mul(&power, kernel);
    }

    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut dictionary: Vec<(String, Vec<f64>)> =
        vec![("+id".into(), values.to_vec()), ("-id".into(), values.iter().map(|x| -x).collect())];
    for t in &sorted {
        dictionary.push((format!("|x-{t}|"), values.iter().map(|x| (x - t).abs()).collect()));
    }
    let used = dictionary_size.min(dictionary.len());

    let mut lower = 0.0;
    let mut best = dictionary[0].0.clone();
    for (name, f) in &dictionary[..used] {
        let mean: f64 = stationary.iter().zip(f).map(|(p, v)| p * v).sum();
        let norm2: f64 = (0..k)
            .map(|i| {
                let cond: f64 = (0..k).map(|j| power[i][j] * f[j]).sum();
                stationary[i] * (cond - mean).powi(2)
            })
            .sum();
        let norm = norm2.sqrt();
        if norm > lower {
            lower = norm;
            best = name.clone();
        }
    }

    // on ≤ 3 states the Lipschitz ball modulo constants is a box whose
    // corners are ±id and ±(hinge at the middle state)
    let exact = match k {
        1 => true,
        2 => used >= 1,
        3 => used >= 2 + 2,
        _ => false,
    };
    let note = if exact {
        format!("exact: dictionary spans all extreme 1-Lipschitz functions on {k} states")
    } else {
        format!("lower bound from {used} dictionary functions")
    };
    Ok(MarkovTheta { lower, exact, best, note })
}

fn identity_matrix(k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = a.len();
    (0..k).map(|i| (0..k).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}
