//! Integer random walks `S_n = X_1 + … + X_n`, `S_0 = 0`, with iid steps from
//! a finitely supported law, together with their occupation statistics.

mod green;

pub use green::{green_exact, green_mc, GreenMethod, GreenTable, MGF_GRID};

use rand::RngCore;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::seed::{rng_from_seed, SimRng};

/// Tolerance on `Σ p = 1`.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Finitely supported step distribution on ℤ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepLaw {
    support: Vec<i64>,
    probs: Vec<f64>,
    /// Cumulative thresholds in units of 2⁻⁶⁴, for one-draw sampling.
    #[serde(skip)]
    thresholds: Vec<u64>,
}

impl StepLaw {
    pub fn new(support: Vec<i64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(domain("step law needs matching, non-empty support and probability lists"));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(domain("step probabilities must be non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(domain(format!("step probabilities sum to {total}, not 1")));
        }
        let mut pairs: Vec<(i64, f64)> = support.into_iter().zip(probs).collect();
        pairs.sort_by_key(|&(s, _)| s);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(domain("step support contains duplicates"));
        }
        let (support, probs): (Vec<i64>, Vec<f64>) = pairs.into_iter().unzip();
        let mut cum = 0.0;
        let mut thresholds: Vec<u64> = probs
            .iter()
            .map(|p| {
                cum += p;
                // saturating float-to-int conversion
                (cum * 18_446_744_073_709_551_616.0) as u64
            })
            .collect();
        if let Some(last) = thresholds.last_mut() {
            *last = u64::MAX;
        }
        Ok(StepLaw { support, probs, thresholds })
    }

    /// `q δ_{−1} + p δ_{+1}`.
    pub fn nearest_neighbour(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("nearest-neighbour parameter p = {p} outside [0, 1]")));
        }
        StepLaw::new(vec![-1, 1], vec![1.0 - p, p])
    }

    /// The deterministic step `δ_d`.
    pub fn delta(d: i64) -> Self {
        StepLaw::new(vec![d], vec![1.0]).expect("point mass is a valid law")
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Atoms with positive probability.
    pub fn atoms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied()).filter(|&(_, p)| p > 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(s, p)| s as f64 * p).sum()
    }

    pub fn mean_abs(&self) -> f64 {
        self.atoms().map(|(s, p)| s.unsigned_abs() as f64 * p).sum()
    }

    pub fn is_transient(&self) -> bool {
        self.mean().abs() > PROBABILITY_TOLERANCE
    }

    /// `Some(p)` if the law is `q δ_{−1} + p δ_{+1}` (either atom may be absent).
    pub fn as_nearest_neighbour(&self) -> Option<f64> {
        let mut p = 0.0;
        for (s, w) in self.atoms() {
            match s {
                1 => p = w,
                -1 => {}
                _ => return None,
            }
        }
        Some(p)
    }

    /// `Some(d)` if the law is a point mass.
    pub fn as_delta(&self) -> Option<i64> {
        let mut atoms = self.atoms();
        match (atoms.next(), atoms.next()) {
            (Some((d, _)), None) => Some(d),
            _ => None,
        }
    }

    /// The law of `−X`.
    pub fn reflected(&self) -> StepLaw {
        StepLaw::new(self.support.iter().map(|s| -s).collect(), self.probs.clone())
            .expect("reflection preserves validity")
    }

    pub fn min_step(&self) -> i64 {
        self.atoms().map(|(s, _)| s).min().expect("law has an atom")
    }

    pub fn max_step(&self) -> i64 {
        self.atoms().map(|(s, _)| s).max().expect("law has an atom")
    }

    /// Total variation distance `½ Σ |p(x) − q(x)|`.
    pub fn total_variation(&self, other: &StepLaw) -> f64 {
        let mut xs: Vec<i64> = self.support.iter().chain(&other.support).copied().collect();
        xs.sort_unstable();
        xs.dedup();
        0.5 * xs.iter().map(|&x| (self.prob(x) - other.prob(x)).abs()).sum::<f64>()
    }

    pub fn prob(&self, x: i64) -> f64 {
        self.support.binary_search(&x).map(|i| self.probs[i]).unwrap_or(0.0)
    }

    /// `E[e^{θX}]`.
    pub fn mgf(&self, theta: f64) -> f64 {
        self.atoms().map(|(s, p)| p * (theta * s as f64).exp()).sum()
    }

    #[inline]
    pub(crate) fn sample(&self, rng: &mut SimRng) -> i64 {
        if self.support.len() == 1 {
            return self.support[0];
        }
        let u = rng.next_u64();
        let i = self.thresholds.iter().position(|&t| u < t).unwrap_or(self.support.len() - 1);
        self.support[i]
    }
}

/// Whether `sample_path` insists on a transient law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transience {
    Required,
    /// Allow zero-drift laws, e.g. for occupation statistics only.
    Override,
}

/// Realised path `S_0, …, S_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkPath {
    pub positions: Vec<i64>,
    pub seed: u64,
}

impl WalkPath {
    /// Wraps hand-made positions; `S_0` must be 0.
    pub fn from_positions(positions: Vec<i64>) -> Result<Self> {
        match positions.first() {
            Some(0) => Ok(WalkPath { positions, seed: 0 }),
            _ => Err(domain("a walk path starts at S_0 = 0")),
        }
    }

    pub fn n(&self) -> usize {
        self.positions.len() - 1
    }

    /// The path truncated at time `n`.
    pub fn prefix(&self, n: usize) -> WalkPath {
        WalkPath { positions: self.positions[..=n.min(self.n())].to_vec(), seed: self.seed }
    }

    pub fn range(&self) -> (i64, i64) {
        let lo = *self.positions.iter().min().expect("non-empty path");
        let hi = *self.positions.iter().max().expect("non-empty path");
        (lo, hi)
    }
}

/// Samples `n` iid steps from `law` starting at 0.
pub fn sample_path(law: &StepLaw, n: usize, seed: u64, transience: Transience) -> Result<WalkPath> {
    if transience == Transience::Required && !law.is_transient() {
        return Err(Error::NotTransient { mean: law.mean() });
    }
    let mut rng = rng_from_seed(seed);
    let mut positions = Vec::with_capacity(n + 1);
    let mut s = 0i64;
    positions.push(s);
    for _ in 0..n {
        s += law.sample(&mut rng);
        positions.push(s);
    }
    Ok(WalkPath { positions, seed })
}

/// Occupation counts `N_n(x) = Σ_{i=0}^{n} 1{S_i = x}`, stored sparsely as
/// `(x, N_n(x))` pairs sorted by site.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalTimeField {
    pub n: usize,
    pub entries: Vec<(i64, u64)>,
    /// `M_n = max_{k ≤ n} |S_k|`.
    pub max_abs_position: u64,
}

impl LocalTimeField {
    pub fn count(&self, x: i64) -> u64 {
        self.entries.binary_search_by_key(&x, |e| e.0).map(|i| self.entries[i].1).unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn max_count(&self) -> u64 {
        self.entries.iter().map(|e| e.1).max().unwrap_or(0)
    }

    /// `(min, max)` of visited sites.
    pub fn span(&self) -> (i64, i64) {
        (self.entries[0].0, self.entries[self.entries.len() - 1].0)
    }

    /// `α(n, x) = Σ_y N_n(y + x) N_n(y)`, by a merge over the sorted sites.
    pub fn self_intersection(&self, x: i64) -> u64 {
        let e = &self.entries;
        let mut j = 0usize;
        let mut total = 0u64;
        for &(y, ny) in e {
            let target = y + x;
            while j < e.len() && e[j].0 < target {
                j += 1;
            }
            if j == e.len() {
                break;
            }
            if e[j].0 == target {
                total += ny * e[j].1;
            }
        }
        total
    }

    /// `α(n, z)` for `z = 0..=max_lag`.
    pub fn self_intersection_profile(&self, max_lag: usize) -> Vec<u64> {
        (0..=max_lag as i64).map(|z| self.self_intersection(z)).collect()
    }
}

pub fn local_time(path: &WalkPath) -> LocalTimeField {
    let mut sorted = path.positions.clone();
    sorted.sort_unstable();
    let mut entries: Vec<(i64, u64)> = Vec::new();
    for x in sorted {
        match entries.last_mut() {
            Some(last) if last.0 == x => last.1 += 1,
            _ => entries.push((x, 1)),
        }
    }
    let max_abs_position = path.positions.iter().map(|s| s.unsigned_abs()).max().unwrap_or(0);
    LocalTimeField { n: path.n(), entries, max_abs_position }
}

/// `α(n, x)`.
pub fn self_intersection(ltf: &LocalTimeField, x: i64) -> u64 {
    ltf.self_intersection(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_path() -> WalkPath {
        WalkPath::from_positions(vec![0, 1, 0, 1, 2]).unwrap()
    }

    #[test]
    fn deterministic_walks() {
        let p = sample_path(&StepLaw::delta(1), 5, 9, Transience::Required).unwrap();
        assert_eq!(p.positions, vec![0, 1, 2, 3, 4, 5]);
        let q = sample_path(&StepLaw::nearest_neighbour(1.0).unwrap(), 5, 9, Transience::Required).unwrap();
        assert_eq!(q.positions, p.positions);
    }

    #[test]
    fn zero_drift_needs_override() {
        let law = StepLaw::nearest_neighbour(0.5).unwrap();
        assert!(matches!(sample_path(&law, 10, 1, Transience::Required), Err(Error::NotTransient { .. })));
        assert!(sample_path(&law, 10, 1, Transience::Override).is_ok());
    }

    #[test]
    fn law_validation() {
        assert!(StepLaw::new(vec![1, 2], vec![0.5, 0.6]).is_err());
        assert!(StepLaw::new(vec![1, 1], vec![0.5, 0.5]).is_err());
        assert!(StepLaw::new(vec![1], vec![-0.0 - 1.0]).is_err());
        let law = StepLaw::new(vec![3, -1], vec![0.25, 0.75]).unwrap();
        assert_eq!(law.support(), &[-1, 3]);
        assert_eq!(law.mean(), 0.0);
        assert_eq!(law.mean_abs(), 1.5);
        assert!(!law.is_transient());
        assert_eq!(StepLaw::nearest_neighbour(0.7).unwrap().as_nearest_neighbour(), Some(0.7));
        assert_eq!(StepLaw::delta(-2).as_delta(), Some(-2));
    }

    #[test]
    fn local_time_of_hand_path() {
        let ltf = local_time(&hand_path());
        assert_eq!(ltf.count(0), 2);
        assert_eq!(ltf.count(1), 2);
        assert_eq!(ltf.count(2), 1);
        assert_eq!(ltf.count(3), 0);
        assert_eq!(ltf.total(), 5);
        assert_eq!(ltf.max_abs_position, 2);
    }

    #[test]
    fn self_intersection_of_hand_path() {
        // brute force over time pairs
        let path = hand_path();
        let brute = |z: i64| {
            let s = &path.positions;
            let mut c = 0u64;
            for i in s {
                for j in s {
                    if i - j == z {
                        c += 1;
                    }
                }
            }
            c
        };
        assert_eq!(brute(0), 9);
        assert_eq!(brute(1), 6);
        let ltf = local_time(&path);
        assert_eq!(self_intersection(&ltf, 0), 9);
        assert_eq!(self_intersection(&ltf, 1), 6);
        assert_eq!(self_intersection(&ltf, -1), 6);
        assert_eq!(self_intersection(&ltf, 7), 0);
    }

    #[test]
    fn unit_walk_self_intersection() {
        let n = 40;
        let ltf = local_time(&sample_path(&StepLaw::delta(1), n, 0, Transience::Required).unwrap());
        for x in 0..=n as i64 {
            assert_eq!(ltf.count(x), 1);
        }
        for x in -(n as i64)..=n as i64 {
            assert_eq!(ltf.self_intersection(x), (n as i64 + 1 - x.abs()) as u64);
        }
    }

    #[test]
    fn drift_matches_law_of_large_numbers() {
        let n = 100_000;
        let p = 0.9;
        let path = sample_path(&StepLaw::nearest_neighbour(p).unwrap(), n, 77, Transience::Required).unwrap();
        let mean = path.positions[n] as f64 / n as f64;
        // Var(step) = 1 − (2p−1)²
        let se = ((1.0 - (2.0 * p - 1.0f64).powi(2)) / n as f64).sqrt();
        assert!((mean - 0.8).abs() < 3.0 * se, "{mean}");
    }
}
