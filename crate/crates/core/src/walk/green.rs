use rayon::prelude::*;
use serde::Serialize;

use super::StepLaw;
use crate::error::{domain, Error, Result};
use crate::seed::{replicate_seed, rng_from_seed};

/// Number of points in the θ-grid used for the truncation bound of
/// [`green_mc`].
pub const MGF_GRID: usize = 200;

const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum GreenMethod {
    ExactNearestNeighbour { p: f64 },
    DeterministicStep { d: i64 },
    MonteCarlo { truncation: usize, replicates: usize, seed: u64 },
}

/// `x ↦ G(0, x) = Σ_{k≥0} P(S_k = x)` on the sites `lo..=lo+len−1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenTable {
    pub lo: i64,
    pub values: Vec<f64>,
    /// Monte Carlo standard errors (zero for exact tables).
    pub std_errors: Vec<f64>,
    pub method: GreenMethod,
    /// Bound on the neglected part of the series (truncation at `K` steps).
    pub error_bound: f64,
}

impl GreenTable {
    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn get(&self, x: i64) -> Option<f64> {
        if x < self.lo || x > self.hi() {
            None
        } else {
            Some(self.values[(x - self.lo) as usize])
        }
    }

    pub fn std_error(&self, x: i64) -> Option<f64> {
        self.get(x).map(|_| self.std_errors[(x - self.lo) as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, g)| (self.lo + i as i64, *g))
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        lo >= self.lo && hi <= self.hi()
    }
}

fn check_range(lo: i64, hi: i64) -> Result<()> {
    if hi < lo {
        Err(domain(format!("empty site range [{lo}, {hi}]")))
    } else {
        Ok(())
    }
}

/// Closed-form Green function on `[lo, hi]` for the biased nearest-neighbour
/// walk and for deterministic steps `δ_d`, `d ≠ 0`.
///
/// For `q δ_{−1} + p δ_{+1}` with `p > q`: `G(0, x) = 1/(p − q)` for `x ≥ 0`
/// and `(p/q)^x/(p − q)` for `x ≤ −1`. Laws drifting left are reflected.
pub fn green_exact(law: &StepLaw, lo: i64, hi: i64) -> Result<GreenTable> {
    check_range(lo, hi)?;
    let sites = lo..=hi;
    if let Some(d) = law.as_delta() {
        if d == 0 {
            return Err(Error::UnsupportedExact("δ_0 (the walk never moves)".into()));
        }
        let values = sites.map(|x| if x % d == 0 && x / d >= 0 { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let len = values.len();
        return Ok(GreenTable {
            lo,
            values,
            std_errors: vec![0.0; len],
            method: GreenMethod::DeterministicStep { d },
            error_bound: 0.0,
        });
    }
    let p =
        law.as_nearest_neighbour().ok_or_else(|| Error::UnsupportedExact(format!("support {:?}", law.support())))?;
    let q = 1.0 - p;
    if p == q {
        return Err(Error::UnsupportedExact("symmetric nearest-neighbour walk is recurrent".into()));
    }
    // reflect so that the drift is to the right
    let (hi_p, sign) = if p > q { (p, 1) } else { (q, -1) };
    let lo_p = 1.0 - hi_p;
    let values: Vec<f64> = sites
        .map(|x| {
            let y = sign * x;
            let base = 1.0 / (hi_p - lo_p);
            if y >= 0 {
                base
            } else {
                base * (lo_p / hi_p).powi((-y) as i32)
            }
        })
        .collect();
    let len = values.len();
    Ok(GreenTable {
        lo,
        values,
        std_errors: vec![0.0; len],
        method: GreenMethod::ExactNearestNeighbour { p },
        error_bound: 0.0,
    })
}

/// Monte Carlo estimate of `Σ_{k=0}^{K} P(S_k = x)` on `[lo, hi]` from `R`
/// independent paths, with standard errors and a Chernoff bound on the
/// neglected terms `k > K`.
pub fn green_mc(
    law: &StepLaw,
    lo: i64,
    hi: i64,
    truncation: usize,
    replicates: usize,
    seed: u64,
) -> Result<GreenTable> {
    check_range(lo, hi)?;
    if truncation == 0 || replicates == 0 {
        return Err(domain("green_mc needs truncation K >= 1 and replicates R >= 1"));
    }
    if !law.is_transient() {
        return Err(Error::NotTransient { mean: law.mean() });
    }
    let width = (hi - lo + 1) as usize;
    let forward = law.mean() > 0.0;
    // monotone walks never come back once they have left the range
    let monotone = if forward { law.min_step() >= 0 } else { law.max_step() <= 0 };

    let chunks = replicates.div_ceil(CHUNK);
    let partial: Vec<(Vec<u64>, Vec<u64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0u64; width];
            let mut sumsq = vec![0u64; width];
            let mut visits = vec![0u64; width];
            let start = c * CHUNK;
            let end = (start + CHUNK).min(replicates);
            for r in start..end {
                let mut rng = rng_from_seed(replicate_seed(seed, r as u64));
                visits.iter_mut().for_each(|v| *v = 0);
                let mut s = 0i64;
                let mut k = 0usize;
                loop {
                    if s >= lo && s <= hi {
                        visits[(s - lo) as usize] += 1;
                    } else if monotone && ((forward && s > hi) || (!forward && s < lo)) {
                        break;
                    }
                    if k == truncation {
                        break;
                    }
                    s += law.sample(&mut rng);
                    k += 1;
                }
                for ((a, b), v) in sum.iter_mut().zip(sumsq.iter_mut()).zip(&visits) {
                    *a += v;
                    *b += v * v;
                }
            }
            (sum, sumsq)
        })
        .collect();

    let mut sum = vec![0u64; width];
    let mut sumsq = vec![0u64; width];
    for (s, q) in partial {
        for i in 0..width {
            sum[i] += s[i];
            sumsq[i] += q[i];
        }
    }
    let r = replicates as f64;
    let values: Vec<f64> = sum.iter().map(|&s| s as f64 / r).collect();
    let std_errors = values
        .iter()
        .zip(&sumsq)
        .map(|(&m, &q)| {
            if replicates < 2 {
                return f64::NAN;
            }
            let var = ((q as f64 - r * m * m) / (r - 1.0)).max(0.0);
            (var / r).sqrt()
        })
        .collect();
    Ok(GreenTable {
        lo,
        values,
        std_errors,
        method: GreenMethod::MonteCarlo { truncation, replicates, seed },
        error_bound: truncation_bound(law, lo, hi, truncation),
    })
}

/// Bound on `Σ_{k>K} P(S_k = x)` uniformly over `x ∈ [lo, hi]`.
///
/// For a right-drifting law, `P(S_k = x) ≤ P(S_k ≤ hi) ≤ e^{θ·hi} Λ(θ)^k` with
/// `Λ(θ) = E e^{−θX} < 1` for small `θ > 0`; summing the geometric series and
/// minimising over a logarithmic θ-grid on `[1e-4, 10]` gives the bound.
pub(crate) fn truncation_bound(law: &StepLaw, lo: i64, hi: i64, truncation: usize) -> f64 {
    let (law, edge) = if law.mean() > 0.0 { (law.clone(), hi) } else { (law.reflected(), -lo) };
    let mut best = f64::INFINITY;
    for i in 0..MGF_GRID {
        let theta = 1e-4 * (1e5f64).powf(i as f64 / (MGF_GRID - 1) as f64);
        let lambda = law.mgf(-theta);
        if !(lambda < 1.0) {
            continue;
        }
        let log_bound = theta * edge as f64 + (truncation as f64 + 1.0) * lambda.ln() - (1.0 - lambda).ln();
        best = best.min(log_bound.exp());
    }
    best
}
